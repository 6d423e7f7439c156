#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "plab/expression.hpp"
#include "plab/geometry.hpp"

namespace plab {

class GridMesh;

/// Metric tensor at a point: inverse g^{ij} and sqrt(det g_{ij}).
struct MetricSample {
  Matrix inverse;
  double sqrt_det;
};

/// Symmetric metric field x -> g_{ij}(x) on a single chart.
class MetricField {
 public:
  using Function = std::function<Matrix(const Point&)>;

  MetricField(int dim, Function g, std::string description = "custom");

  static MetricField identity(int dim);
  /// g = diag(e_1(x), ..., e_n(x)).
  static MetricField diagonal(std::vector<Expression> entries);
  /// g = e(x) I.
  static MetricField conformal(int dim, Expression factor);

  int dim() const { return dim_; }
  Matrix tensor(const Point& x) const;
  MetricSample sample(const Point& x) const;
  bool is_identity() const { return identity_; }
  const std::string& description() const { return description_; }

 private:
  int dim_;
  Function g_;
  std::string description_;
  bool identity_ = false;
};

enum class FluxKind { EuclideanPLaplace, MetricPLaplace };

/// The operator A(x, v) with exponent p and ellipticity constants
/// alpha <= betaEll (betaEll is the upper constant of |A| <= betaEll |v|^{p-1}).
class FluxField {
 public:
  static FluxField euclidean(double p, int dim);
  /// Metric kind with constants computed over every node of `mesh`; throws
  /// when g is not symmetric positive definite at some node.
  static FluxField metric(double p, std::shared_ptr<const MetricField> g, const GridMesh& mesh);
  /// Metric kind with caller-supplied constants and no validation.
  static FluxField metric_unchecked(double p, std::shared_ptr<const MetricField> g, double alpha,
                                    double beta_ell);

  double p() const { return p_; }
  int dim() const { return dim_; }
  FluxKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta_ell() const { return beta_ell_; }
  const MetricField* metric_field() const { return metric_.get(); }
  std::shared_ptr<const MetricField> metric_ptr() const { return metric_; }

  /// Same operator with a different exponent (constants recomputed).
  FluxField with_exponent(double p) const;

 private:
  FluxField() = default;

  double p_ = 2.0;
  int dim_ = 0;
  FluxKind kind_ = FluxKind::EuclideanPLaplace;
  std::shared_ptr<const MetricField> metric_;
  double alpha_ = 1.0;
  double beta_ell_ = 1.0;
  // eigenvalue extremes of g^{ij} and sqrt(det g) over the mesh, kept so
  // with_exponent can recompute the constants
  double mu_min_ = 1.0, mu_max_ = 1.0, sg_min_ = 1.0, sg_max_ = 1.0;

  friend void compute_constants(FluxField&);
};

/// A(x, v): |v|^{p-2} v, or sqrt(g) (g^{st} v_s v_t)^{(p-2)/2} g^{ij} v_i for
/// the metric kind. A(x, 0) = 0 for every p.
Vector flux_eval(const FluxField& a, const Point& x, const Vector& v);

/// Same as flux_eval with a precomputed metric sample.
Vector flux_eval(const FluxField& a, const MetricSample& m, const Vector& v);

/// <A(x, v), v> / p: |v|^p / p, or sqrt(g) (g^{ij} v_i v_j)^{p/2} / p.
double energy_density(const FluxField& a, const Point& x, const Vector& v);

struct AxiomSample {
  Point x;
  Vector v;
  Vector w;
  double lambda;
};

struct AxiomReport {
  double homogeneity_violation = 0.0;     // relative, axiom (2)
  double min_monotonicity_margin = 0.0;   // normalised, axiom (3); must be > 0
  double lower_bound_violation = 0.0;     // relative, <A,v> >= alpha |v|^p
  double upper_bound_violation = 0.0;     // relative, |A| <= betaEll |v|^{p-1}
  int samples = 0;
  bool pass = false;
};

AxiomReport check_axioms(const FluxField& a, const std::vector<AxiomSample>& samples);

}  // namespace plab
