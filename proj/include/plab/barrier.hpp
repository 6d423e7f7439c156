#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plab/capacity.hpp"

namespace plab {

struct BarrierOptions {
  std::shared_ptr<const MetricField> metric;
  /// Closed domain whose nodes make up the closure of Omega; nodes outside
  /// it are masked out of certification. Defaults to the whole ball B(z, 1).
  std::optional<Region> domain;
  double tol = 1e-10;
};

/// beta_eps = 1 - u_eps on the nodes of B(z, 1), with the Dirichlet problem of
/// the potential kept for the supersolution check.
struct Barrier {
  Point x0;
  double epsilon = 0.0;
  ScalarField field;
  std::shared_ptr<const DirichletProblem> problem;
  /// 1 for nodes of the closure of Omega.
  std::vector<char> mask;
  /// Nodes closer than epsilon + snap to x0 may belong to the fattened
  /// obstacle; positivity is checked beyond that radius.
  double snap = 0.0;
  bool converged = false;
};

/// Barrier from the capacity potential of (D(z, eps, c), B(z, 1)).
/// Requires x0 in D(z, eps, c).
Barrier build_barrier(const Point& x0, const Point& z, double epsilon, int codim, double p,
                      double h, const BarrierOptions& opt = {});

/// Same construction with an arbitrary compact inner set inside B(z, 1)
/// (for instance a cone truncated at height eps).
Barrier build_barrier_from(const Region& inner, const Point& x0, const Point& z, double epsilon,
                           double p, double h, const BarrierOptions& opt = {});

struct BarrierCertificate {
  Point x0;
  double epsilon = 0.0;
  double supersolution_margin = 0.0;
  double supersolution_scale = 0.0;
  std::vector<double> probes;
  std::vector<double> vanish_at_x0;  // per probe radius
  double positivity_margin = 0.0;
  bool supersolution_ok = false;
  bool vanishes = false;
  bool positive = false;
  bool pass = false;
};

/// Checks the relaxed barrier conditions: discrete supersolution on the free
/// nodes of `problem`, decay of the max of the field over B(x0, rho) along the
/// probe ladder (first <= 0.5 last + tol), and strict positivity at nodes
/// farther than positivity_radius from x0.
BarrierCertificate certify(const DirichletProblem& problem, const ScalarField& field,
                           const std::vector<char>& mask, const Point& x0, double epsilon,
                           const std::vector<double>& probes, double positivity_radius,
                           double tol = 1e-6);

/// certify with the ladder {4h, 8h, 16h} and the barrier's own problem.
BarrierCertificate certify(const Barrier& b, double tol = 1e-6);
BarrierCertificate certify(const Barrier& b, const std::vector<double>& probes, double tol = 1e-6);

/// beta = min(local, m) inside V = B(x0, rv), m outside, with m the minimum of
/// the local field over V \ U, U = B(x0, ru).
ScalarField globalize(const ScalarField& local, const std::vector<char>& mask, const Point& x0,
                      double ru, double rv);

std::string certificate_json(const BarrierCertificate& c);

}  // namespace plab
