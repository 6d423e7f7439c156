#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plab/capacity.hpp"

namespace plab {

enum class WienerVerdict { RegularEvidence, IrregularEvidence, Inconclusive };

const char* to_string(WienerVerdict v);

/// Per-scale spacing: Relative uses h_k = t_k / cells, Refining additionally
/// halves the relative spacing at every scale, h_k = t_k / (cells 2^k).
enum class HRule { Relative, Refining };

struct WienerOptions {
  double cells = 16.0;
  HRule rule = HRule::Relative;
  double delta = 0.05;
  /// Ratio bound for the geometric-decay fit.
  double decay_bound = 0.9;
  std::shared_ptr<const MetricField> metric;
  /// Coordinate box of the chart; scales whose B(x0, 2t) leaves it are
  /// flagged and excluded.
  std::optional<BoundingBox> chart;
  double tol = 1e-10;
};

struct WienerSample {
  int k = 0;
  double t = 0.0;
  double h = 0.0;
  double eta = 0.0;
  double numerator = 0.0;    // numeric cap(complement ∩ B(x0,t), B(x0,2t))
  double denominator = 0.0;  // condenser_oracle(t, 2t, n, p)
  bool unresolved = false;
  bool clipped = false;
  bool converged = true;
};

/// eta(t) = (cap(complement ∩ B(x0,t), B(x0,2t)) / cap(B(x0,t), B(x0,2t)))^{1/(p-1)};
/// the numerator is computed on a lattice anchored at x0 with spacing h.
WienerSample wiener_integrand(const Region& complement, const Point& x0, double t, double p,
                              double h, const WienerOptions& opt = {});

struct WienerProfile {
  Point x0;
  double p = 0.0;
  std::vector<WienerSample> scales;
  /// ln 2 * sum of eta over the valid scales up to each k (excluded scales
  /// repeat the previous sum).
  std::vector<double> partial_sums;
  WienerVerdict verdict = WienerVerdict::Inconclusive;
  double decay_ratio = 1.0;  // fitted q of eta_k ~ C q^k
  std::string note;
};

/// Dyadic scales t_k = t0 2^{-k}, k = 0..K. A non-positive t0 selects a
/// quarter of the distance from x0 to the chart box boundary.
WienerProfile wiener_profile(const Region& complement, const Point& x0, double p, double t0, int K,
                             const WienerOptions& opt = {});

void write_wiener_csv_header(std::ostream& os);
void write_wiener_csv(std::ostream& os, const WienerProfile& profile);

}  // namespace plab
