#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plab/barrier.hpp"
#include "plab/capacity.hpp"
#include "plab/expression.hpp"
#include "plab/wiener.hpp"

namespace plab {

struct ExperimentConfig {
  std::string name = "experiment";
  int n = 2;
  double p = 2.0;
  Region domain = Region::empty(2);
  Region obstacle = Region::empty(2);
  /// Designated point of K for the attainment test (cone vertex for run_cone).
  Point x0;
  /// Null for the Euclidean p-Laplacian.
  std::shared_ptr<const MetricField> metric;
  std::vector<double> spacings;
  double probe_distance = 0.3;
  /// Barrier scale eps for run_cone and the barrier subcommand.
  double barrier_epsilon = 0.25;
  double tol = 1e-10;
  unsigned seed = 0;
  /// Run per-h solves on worker threads. Results do not depend on it.
  bool parallel = false;
  std::string output_dir = ".";
  /// Expected verdict name, checked by the CLI exit code.
  std::optional<std::string> expect;

  /// Validates 1 < p, spacings strictly decreasing, dimensions consistent.
  void validate() const;
};

enum class VerdictKind { Regular, Irregular, Inconclusive };

const char* to_string(VerdictKind k);

struct DichotomyRow {
  double h = 0.0;
  bool resolved = true;
  double capacity = 0.0;
  double influence = 0.0;       // sup |u_{f+bump} - u_f| at probe nodes
  double attainment_gap = 0.0;  // max |u_f - f(x0)| within 4h of x0
  bool converged = true;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::vector<DichotomyRow> rows;
  TrendRecord capacity_trend;
  TrendRecord influence_trend;
  TrendRecord gap_trend;
  bool capacity_bounded = false;
  bool capacity_vanishing = false;
  bool influence_bounded = false;
  bool influence_vanishing = false;
  bool gap_vanishes = false;
  /// Barrier certificates (run_cone), one per spacing.
  std::vector<BarrierCertificate> barriers;
  std::string note;
};

/// Capacity trend, influence of a unit bump on K at distance >= probe
/// distance, and attainment of f(x) = |x - x0|^2 at x0, over cfg.spacings.
/// Regular iff the capacity stays bounded below, the influence stays bounded
/// below and the attainment gap decays like a power of h (or strictly, when
/// no model wins); Irregular iff capacity and influence both vanish.
Verdict run_dichotomy(const ExperimentConfig& cfg);

/// Dirichlet data: an expression on the outer boundary and a separate one on
/// the obstacle nodes.
struct DataSpec {
  Expression boundary;
  Expression on_obstacle;
};

struct RemovabilityRecord {
  std::vector<double> h;
  std::vector<double> sup_difference;
  TrendRecord trend;
};

/// Per spacing, sup over nodes at distance >= probe distance from K of
/// |u_f - u_g|. Requires codim(K) >= p and f = g on the outer boundary.
RemovabilityRecord run_removability(const ExperimentConfig& cfg, const DataSpec& f,
                                    const DataSpec& g);

struct InvarianceRecord {
  Verdict euclidean;
  Verdict metric;
  bool comparable = false;  // neither verdict Inconclusive
  bool agree = false;
};

/// run_dichotomy under the Euclidean p-Laplacian and under the metric flux of
/// g with identical geometry. g must be SPD with condition number <= 100.
InvarianceRecord run_operator_invariance(const ExperimentConfig& cfg,
                                         std::shared_ptr<const MetricField> g);

/// Attainment at the vertex and barrier certification of the potential of the
/// cone truncated at height barrier_epsilon. Requires codim < p.
Verdict run_cone(const ExperimentConfig& cfg);

struct PGreaterNRecord {
  WienerProfile profile;
  /// eta extrapolated in h (see WienerSample), one per scale; empty unless
  /// requested.
  std::vector<double> extrapolated;
  double target = 0.0;  // 1 - 2^{(n-p)/(p-1)}
  double spread = 0.0;  // (max - min) / mean of the asserted values
  double max_relative_error = 0.0;
  bool pass = false;
};

struct PGreaterNOptions {
  int K = 4;
  double t0 = 0.25;
  double cells = 16.0;
  /// Richardson extrapolation of each eta_k from h_k and 2 h_k with the
  /// fattening exponent (p - n)/(p - 1).
  bool extrapolate = false;
  double tol = 1e-10;
};

/// Wiener profile of the point complement {0} for p > n; asserts constancy
/// (spread <= 10%) and agreement within 10% with 1 - 2^{(n-p)/(p-1)}.
PGreaterNRecord run_p_greater_n(int n, double p, const PGreaterNOptions& opt = {});

/// The p > n Wiener integrand of a point, 1 - 2^{(n-p)/(p-1)}.
double point_eta_p_greater_n(int n, double p);

std::string verdict_json(const ExperimentConfig& cfg, const Verdict& v);
void write_dichotomy_csv(std::ostream& os, const ExperimentConfig& cfg, const Verdict& v);

}  // namespace plab
