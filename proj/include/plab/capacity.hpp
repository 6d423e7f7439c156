#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plab/solver.hpp"
#include "plab/trend.hpp"

namespace plab {

/// Couple K = inner inside Omega = outer, with exponent p. A null metric
/// selects the Euclidean p-Laplacian.
struct Condenser {
  Region inner;
  Region outer;
  double p;
  std::shared_ptr<const MetricField> metric;
};

struct CapacityOptions {
  /// Lattice anchor; defaults to the origin.
  std::optional<Point> anchor;
  /// Obstacle snap tolerance; defaults to h/2.
  std::optional<double> snap;
  double tol = 1e-10;
};

struct CapacityEstimate {
  double value = 0.0;
  double h = 0.0;
  ScalarField potential;
  SolveReport report;
  /// Excursion of the potential outside [0, 1] over free nodes.
  double bound_violation = 0.0;
};

/// Lattice over the bounding box of `domain` (two cells of padding) at spacing
/// h, anchored at `anchor`, with nodes classified against domain and obstacle.
std::shared_ptr<const GridMesh> domain_mesh(const Region& domain, const Region& obstacle, double h,
                                            const Point& anchor, std::optional<double> snap);

/// Flux of the condenser on `mesh`.
FluxField condenser_flux(const Condenser& c, const GridMesh& mesh);

/// Solves for the p-potential (1 on inner nodes, 0 on the outer boundary);
/// value = p * minimised energy.
CapacityEstimate capacity_potential(const Condenser& c, double h, const CapacityOptions& opt = {});

/// Capacity of the spherical condenser (Ball(0, r), Ball(0, R)) in R^n.
double condenser_oracle(double r, double R, int n, double p);

struct RefinementRow {
  double h;
  double value;
  bool converged;
  bool resolved;  // false when the obstacle had no nodes at this h
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  TrendRecord trend;
};

/// Capacities along a decreasing list of at least three spacings and the
/// trend verdict over the resolved ones.
RefinementStudy refinement_study(const Condenser& c, const std::vector<double>& hs,
                                 const CapacityOptions& opt = {});

/// Best-fitting model even when it fails the residual-halving rule.
TrendModel best_fit(const TrendRecord& rec);

void write_capacity_csv_header(std::ostream& os);
void write_capacity_csv(std::ostream& os, const std::string& condenser_id, int n, double p,
                        const RefinementStudy& study);

}  // namespace plab
