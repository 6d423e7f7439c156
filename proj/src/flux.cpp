#include "plab/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "plab/mesh.hpp"

namespace plab {

MetricField::MetricField(int dim, Function g, std::string description)
    : dim_(dim), g_(std::move(g)), description_(std::move(description)) {
  if (dim_ < 1) throw InvalidInput("MetricField: dimension must be >= 1");
}

MetricField MetricField::identity(int dim) {
  MetricField m(dim, [dim](const Point&) { return Matrix::Identity(dim, dim); }, "identity");
  m.identity_ = true;
  return m;
}

MetricField MetricField::diagonal(std::vector<Expression> entries) {
  const int n = static_cast<int>(entries.size());
  std::string desc = "diagonal(";
  for (const auto& e : entries) {
    if (e.max_coordinate() > n) throw InvalidInput("MetricField: coordinate out of range");
    desc += e.text() + ";";
  }
  desc += ")";
  return MetricField(
      n,
      [entries](const Point& x) {
        const int k = static_cast<int>(entries.size());
        Matrix g = Matrix::Zero(k, k);
        for (int i = 0; i < k; ++i) g(i, i) = entries[i](x);
        return g;
      },
      desc);
}

MetricField MetricField::conformal(int dim, Expression factor) {
  if (factor.max_coordinate() > dim) throw InvalidInput("MetricField: coordinate out of range");
  const std::string desc = "conformal(" + factor.text() + ")";
  return MetricField(
      dim, [dim, factor](const Point& x) { return Matrix(factor(x) * Matrix::Identity(dim, dim)); },
      desc);
}

Matrix MetricField::tensor(const Point& x) const {
  if (x.size() != dim_) throw InvalidInput("MetricField: dimension mismatch");
  Matrix g = g_(x);
  if (g.rows() != dim_ || g.cols() != dim_) throw InvalidInput("MetricField: wrong tensor shape");
  // exact symmetry
  return 0.5 * (g + g.transpose());
}

MetricSample MetricField::sample(const Point& x) const {
  const Matrix g = tensor(x);
  const double det = g.determinant();
  return MetricSample{g.inverse(), std::sqrt(std::abs(det))};
}

void compute_constants(FluxField& a) {
  const double p = a.p_;
  if (a.kind_ == FluxKind::EuclideanPLaplace) {
    a.alpha_ = a.beta_ell_ = 1.0;
    return;
  }
  // <A,v> = sg q^{p/2} with mu_min |v|^2 <= q <= mu_max |v|^2, and
  // |A| <= sg q^{(p-2)/2} mu_max |v|.
  a.alpha_ = a.sg_min_ * std::pow(a.mu_min_, 0.5 * p);
  const double qfac = p >= 2.0 ? std::pow(a.mu_max_, 0.5 * (p - 2.0))
                               : std::pow(a.mu_min_, 0.5 * (p - 2.0));
  a.beta_ell_ = a.sg_max_ * qfac * a.mu_max_;
  a.beta_ell_ = std::max(a.beta_ell_, a.alpha_);
}

FluxField FluxField::euclidean(double p, int dim) {
  if (!(p > 1.0)) throw InvalidInput("FluxField: exponent must exceed 1");
  FluxField a;
  a.p_ = p;
  a.dim_ = dim;
  a.kind_ = FluxKind::EuclideanPLaplace;
  return a;
}

FluxField FluxField::metric(double p, std::shared_ptr<const MetricField> g, const GridMesh& mesh) {
  if (!(p > 1.0)) throw InvalidInput("FluxField: exponent must exceed 1");
  if (!g || g->dim() != mesh.dim()) throw InvalidInput("FluxField: metric dimension mismatch");
  FluxField a;
  a.p_ = p;
  a.dim_ = g->dim();
  a.kind_ = FluxKind::MetricPLaplace;
  a.mu_min_ = a.sg_min_ = std::numeric_limits<double>::infinity();
  a.mu_max_ = a.sg_max_ = 0.0;
  for (int v = 0; v < mesh.node_count(); ++v) {
    const Matrix t = g->tensor(mesh.node_point(v));
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || !std::isfinite(hi)) {
      throw InvalidInput("FluxField: metric is not positive definite at a mesh node");
    }
    // eigenvalues of g^{ij} are reciprocals
    a.mu_min_ = std::min(a.mu_min_, 1.0 / hi);
    a.mu_max_ = std::max(a.mu_max_, 1.0 / lo);
    const double sg = std::sqrt(es.eigenvalues().prod());
    a.sg_min_ = std::min(a.sg_min_, sg);
    a.sg_max_ = std::max(a.sg_max_, sg);
  }
  a.metric_ = std::move(g);
  compute_constants(a);
  return a;
}

FluxField FluxField::metric_unchecked(double p, std::shared_ptr<const MetricField> g, double alpha,
                                      double beta_ell) {
  if (!(p > 1.0)) throw InvalidInput("FluxField: exponent must exceed 1");
  FluxField a;
  a.p_ = p;
  a.dim_ = g->dim();
  a.kind_ = FluxKind::MetricPLaplace;
  a.metric_ = std::move(g);
  a.alpha_ = alpha;
  a.beta_ell_ = beta_ell;
  return a;
}

FluxField FluxField::with_exponent(double p) const {
  if (!(p > 1.0)) throw InvalidInput("FluxField: exponent must exceed 1");
  FluxField a = *this;
  a.p_ = p;
  if (kind_ == FluxKind::MetricPLaplace && std::isfinite(mu_min_) && mu_max_ > 0.0) {
    compute_constants(a);
  }
  return a;
}

namespace {

void require_finite(const Vector& v) {
  if (!v.allFinite()) throw InvalidInput("flux_eval: non-finite argument");
}

}  // namespace

Vector flux_eval(const FluxField& a, const MetricSample& m, const Vector& v) {
  require_finite(v);
  const double p = a.p();
  if (a.kind() == FluxKind::EuclideanPLaplace) {
    const double r2 = v.squaredNorm();
    if (r2 == 0.0) return Vector::Zero(v.size());
    return std::pow(r2, 0.5 * (p - 2.0)) * v;
  }
  const Vector gv = m.inverse * v;
  const double q = v.dot(gv);
  if (q == 0.0) return Vector::Zero(v.size());
  // |q| keeps the formula evaluable for unvalidated (indefinite) metrics
  const double scale = p == 2.0 ? 1.0 : std::pow(std::abs(q), 0.5 * (p - 2.0));
  return m.sqrt_det * scale * gv;
}

Vector flux_eval(const FluxField& a, const Point& x, const Vector& v) {
  if (v.size() != a.dim() || x.size() != a.dim()) throw InvalidInput("flux_eval: dimension mismatch");
  if (!x.allFinite()) throw InvalidInput("flux_eval: non-finite point");
  if (a.kind() == FluxKind::EuclideanPLaplace) return flux_eval(a, MetricSample{}, v);
  return flux_eval(a, a.metric_field()->sample(x), v);
}

double energy_density(const FluxField& a, const Point& x, const Vector& v) {
  if (v.size() != a.dim()) throw InvalidInput("energy_density: dimension mismatch");
  const double p = a.p();
  if (a.kind() == FluxKind::EuclideanPLaplace) return std::pow(v.squaredNorm(), 0.5 * p) / p;
  const auto m = a.metric_field()->sample(x);
  const double q = v.dot(m.inverse * v);
  return m.sqrt_det * std::pow(std::max(q, 0.0), 0.5 * p) / p;
}

AxiomReport check_axioms(const FluxField& a, const std::vector<AxiomSample>& samples) {
  AxiomReport r;
  r.samples = static_cast<int>(samples.size());
  r.min_monotonicity_margin = std::numeric_limits<double>::infinity();
  const double p = a.p();
  constexpr double tiny = 1e-300;
  for (const auto& s : samples) {
    const Vector av = flux_eval(a, s.x, s.v);
    const Vector aw = flux_eval(a, s.x, s.w);

    const double lam = s.lambda;
    const double factor = lam * std::pow(std::abs(lam), p - 2.0);
    const Vector alv = flux_eval(a, s.x, Vector(lam * s.v));
    const double hom_scale = std::abs(factor) * av.norm() + tiny;
    r.homogeneity_violation =
        std::max(r.homogeneity_violation, (alv - factor * av).norm() / hom_scale);

    const Vector dv = s.v - s.w;
    const double mono = (av - aw).dot(dv) / (dv.norm() * (av.norm() + aw.norm()) + tiny);
    r.min_monotonicity_margin = std::min(r.min_monotonicity_margin, mono);

    const double vv = s.v.squaredNorm();
    if (vv > 0.0) {
      // powers of |v|^2 keep p = 2 exact
      const double lower = a.alpha() * vv * std::pow(vv, 0.5 * (p - 2.0));
      r.lower_bound_violation =
          std::max(r.lower_bound_violation, std::max(0.0, lower - av.dot(s.v)) / lower);
      const double upper = a.beta_ell() * std::sqrt(vv) * std::pow(vv, 0.5 * (p - 2.0));
      r.upper_bound_violation =
          std::max(r.upper_bound_violation, std::max(0.0, av.norm() - upper) / upper);
    }
  }
  constexpr double tol = 1e-10;
  r.pass = !samples.empty() && r.homogeneity_violation <= tol && r.min_monotonicity_margin > 0.0 &&
           r.lower_bound_violation <= tol && r.upper_bound_violation <= tol;
  return r;
}

}  // namespace plab
