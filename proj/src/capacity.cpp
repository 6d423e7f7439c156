#include "plab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace plab {

std::shared_ptr<const GridMesh> domain_mesh(const Region& domain, const Region& obstacle, double h,
                                            const Point& anchor, std::optional<double> snap) {
  const GridMesh lattice = build_aligned_mesh(bounding_box(domain), h, anchor);
  return std::make_shared<const GridMesh>(classify_nodes(lattice, domain, obstacle, snap));
}

FluxField condenser_flux(const Condenser& c, const GridMesh& mesh) {
  if (!c.metric || c.metric->is_identity()) return FluxField::euclidean(c.p, mesh.dim());
  return FluxField::metric(c.p, c.metric, mesh);
}

CapacityEstimate capacity_potential(const Condenser& c, double h, const CapacityOptions& opt) {
  if (!(c.p > 1.0)) throw InvalidInput("capacity: exponent must exceed 1");
  if (c.inner.dim() != c.outer.dim()) throw InvalidInput("capacity: dimension mismatch");
  if (c.inner.is_empty()) throw InvalidInput("capacity: empty inner set");
  const int n = c.outer.dim();
  const Point anchor = opt.anchor.value_or(Point::Zero(n));
  auto mesh = domain_mesh(c.outer, c.inner, h, anchor, opt.snap);

  if (mesh->count(NodeClass::Obstacle) == 0) {
    throw InvalidInput("capacity: inner set has no nodes at h = " + std::to_string(h));
  }
  // inner must sit inside the open outer set: no obstacle node may be
  // exterior or touch the outer boundary
  for (int v = 0; v < mesh->node_count(); ++v) {
    if (mesh->node_class(v) != NodeClass::Obstacle) continue;
    if (mesh->on_lattice_edge(v) || !contains(c.outer, mesh->node_point(v))) {
      throw InvalidInput("capacity: inner set is not contained in the outer set");
    }
    for (int s = 0; s < static_cast<int>(mesh->stencil().size()); ++s) {
      const int w = mesh->neighbour(v, s);
      if (w >= 0 && mesh->node_class(w) == NodeClass::OuterBoundary) {
        throw InvalidInput("capacity: inner set touches the outer boundary");
      }
    }
  }

  ScalarField data(mesh);
  for (int v = 0; v < mesh->node_count(); ++v) {
    data[v] = mesh->node_class(v) == NodeClass::Obstacle ? 1.0 : 0.0;
  }
  DirichletProblem problem(mesh, condenser_flux(c, *mesh), data);
  SolveReport report = solve(problem, opt.tol);

  CapacityEstimate est{c.p * report.energy, h, report.solution, report, 0.0};
  est.bound_violation = max_principle_violation(problem, est.potential);
  return est;
}

double condenser_oracle(double r, double R, int n, double p) {
  if (!(r > 0.0) || !(R > r)) throw InvalidInput("condenser_oracle: need 0 < r < R");
  if (!(p > 1.0)) throw InvalidInput("condenser_oracle: exponent must exceed 1");
  const double omega = unit_sphere_area(n);
  if (p == n) return omega * std::pow(std::log(R / r), 1.0 - n);
  const double e = (p - n) / (p - 1.0);
  return omega * std::pow(std::abs((n - p) / (p - 1.0)), p - 1.0) *
         std::pow(std::abs(std::pow(r, e) - std::pow(R, e)), 1.0 - p);
}

RefinementStudy refinement_study(const Condenser& c, const std::vector<double>& hs,
                                 const CapacityOptions& opt) {
  if (hs.size() < 3) throw InvalidInput("refinement_study: need at least three spacings");
  for (std::size_t i = 1; i < hs.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) throw InvalidInput("refinement_study: spacings must decrease");
  }
  RefinementStudy study;
  std::vector<double> h_ok, v_ok;
  for (double h : hs) {
    RefinementRow row{h, 0.0, false, true};
    try {
      const auto est = capacity_potential(c, h, opt);
      row.value = est.value;
      row.converged = est.report.converged;
    } catch (const InvalidInput& e) {
      if (std::string(e.what()).find("has no nodes") == std::string::npos) throw;
      row.resolved = false;
    }
    if (row.resolved) {
      h_ok.push_back(h);
      v_ok.push_back(row.value);
    }
    study.rows.push_back(row);
  }
  study.trend = classify_trend(h_ok, v_ok);
  return study;
}

TrendModel best_fit(const TrendRecord& rec) {
  const TrendFit* best = nullptr;
  for (const auto& f : rec.fits) {
    if (!best || f.residual < best->residual) best = &f;
  }
  return best && std::isfinite(best->residual) ? best->model : TrendModel::Inconclusive;
}

void write_capacity_csv_header(std::ostream& os) {
  os << "condenser_id,n,p,h,capacity,converged,model,verdict\n";
}

void write_capacity_csv(std::ostream& os, const std::string& condenser_id, int n, double p,
                        const RefinementStudy& study) {
  char buf[256], value[32];
  for (const auto& row : study.rows) {
    if (row.resolved) {
      std::snprintf(value, sizeof value, "%.17g", row.value);
    } else {
      std::snprintf(value, sizeof value, "unresolved");
    }
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%s,%d,%s,%s\n", condenser_id.c_str(), n, p,
                  row.h, value,
                  row.converged ? 1 : 0, to_string(best_fit(study.trend)),
                  to_string(study.trend.verdict));
    os << buf;
  }
}

}  // namespace plab
