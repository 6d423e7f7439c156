#include "plab/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace plab {

Barrier build_barrier(const Point& x0, const Point& z, double epsilon, int codim, double p,
                      double h, const BarrierOptions& opt) {
  const int n = static_cast<int>(z.size());
  if (codim < 0 || codim > n) throw InvalidInput("build_barrier: codimension out of range");
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw InvalidInput("build_barrier: need 0 < eps < 1");
  const Region disk = codim == 0 ? Region::ball(z, epsilon) : Region::codim_disk(z, epsilon, codim);
  if (!contains(disk, x0, 1e-12)) {
    throw InvalidInput("build_barrier: x0 does not lie in D(z, eps, c); choose a center z with x0 "
                       "in the disk");
  }
  return build_barrier_from(disk, x0, z, epsilon, p, h, opt);
}

Barrier build_barrier_from(const Region& inner, const Point& x0, const Point& z, double epsilon,
                           double p, double h, const BarrierOptions& opt) {
  if (x0.size() != z.size() || inner.dim() != z.size()) {
    throw InvalidInput("build_barrier: dimension mismatch");
  }
  Condenser c{inner, Region::ball(z, 1.0), p, opt.metric};
  CapacityOptions co;
  co.anchor = x0;
  co.tol = opt.tol;
  const double snap = 0.5 * h;
  co.snap = snap;
  const auto est = capacity_potential(c, h, co);

  Barrier b{x0, epsilon, ScalarField(est.potential.mesh_ptr()), nullptr, {}, snap,
            est.report.converged};
  const auto& mesh = est.potential.mesh();
  b.mask.assign(mesh.node_count(), 0);
  ScalarField data(est.potential.mesh_ptr());
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External) continue;
    b.field[v] = std::clamp(1.0 - est.potential[v], 0.0, 1.0);
    data[v] = mesh.node_class(v) == NodeClass::Obstacle ? 0.0 : 1.0;
    b.mask[v] = !opt.domain || contains(*opt.domain, mesh.node_point(v));
  }
  b.problem =
      std::make_shared<const DirichletProblem>(est.potential.mesh_ptr(), condenser_flux(c, mesh), data);
  return b;
}

BarrierCertificate certify(const DirichletProblem& problem, const ScalarField& field,
                           const std::vector<char>& mask, const Point& x0, double epsilon,
                           const std::vector<double>& probes, double positivity_radius,
                           double tol) {
  const GridMesh& mesh = *problem.mesh;
  BarrierCertificate c;
  c.x0 = x0;
  c.epsilon = epsilon;
  c.probes = probes;

  const auto ss = supersolution_margin(problem, field, tol);
  c.supersolution_margin = ss.margin;
  c.supersolution_scale = ss.scale;
  c.supersolution_ok = ss.certified;

  double range = 0.0;
  c.vanish_at_x0.assign(probes.size(), 0.0);
  c.positivity_margin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External || !mask[v]) continue;
    range = std::max(range, std::abs(field[v]));
    const double d = (mesh.node_point(v) - x0).norm();
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (d <= probes[i] * (1.0 + 1e-12)) {
        c.vanish_at_x0[i] = std::max(c.vanish_at_x0[i], field[v]);
      }
    }
    if (d > positivity_radius * (1.0 + 1e-12)) {
      c.positivity_margin = std::min(c.positivity_margin, field[v]);
    }
  }
  if (!std::isfinite(c.positivity_margin)) c.positivity_margin = 0.0;

  const double floor = 1e-12 * std::max(range, 1.0);
  c.positive = c.positivity_margin > floor;
  c.vanishes = !probes.empty();
  for (std::size_t i = 1; i < probes.size(); ++i) {
    c.vanishes = c.vanishes && c.vanish_at_x0[i - 1] <= c.vanish_at_x0[i] + floor;
  }
  if (!probes.empty()) {
    c.vanishes = c.vanishes && c.vanish_at_x0.front() <= 0.5 * c.vanish_at_x0.back() + floor;
  }
  c.pass = c.supersolution_ok && c.vanishes && c.positive;
  return c;
}

BarrierCertificate certify(const Barrier& b, const std::vector<double>& probes, double tol) {
  return certify(*b.problem, b.field, b.mask, b.x0, b.epsilon, probes, b.epsilon + b.snap, tol);
}

BarrierCertificate certify(const Barrier& b, double tol) {
  const double h = b.problem->mesh->spacing();
  return certify(b, {4.0 * h, 8.0 * h, 16.0 * h}, tol);
}

ScalarField globalize(const ScalarField& local, const std::vector<char>& mask, const Point& x0,
                      double ru, double rv) {
  if (!(ru > 0.0) || !(rv > ru)) throw InvalidInput("globalize: need 0 < ru < rv");
  const GridMesh& mesh = local.mesh();
  double m = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External || !mask[v]) continue;
    const double d = (mesh.node_point(v) - x0).norm();
    if (d > ru && d <= rv) m = std::min(m, local[v]);
  }
  if (!std::isfinite(m)) throw InvalidInput("globalize: no nodes in V \\ U");
  if (!(m > 0.0)) throw InvalidInput("globalize: local barrier is not positive on V \\ U");
  ScalarField out(local.mesh_ptr());
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External) continue;
    const double d = (mesh.node_point(v) - x0).norm();
    out[v] = d <= rv ? std::min(local[v], m) : m;
  }
  return out;
}

std::string certificate_json(const BarrierCertificate& c) {
  nlohmann::json j;
  j["x0"] = std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size());
  j["epsilon"] = c.epsilon;
  j["supersolution_margin"] = c.supersolution_margin;
  j["supersolution_scale"] = c.supersolution_scale;
  j["probes"] = c.probes;
  j["vanish_at_x0"] = c.vanish_at_x0;
  j["positivity_margin"] = c.positivity_margin;
  j["supersolution_ok"] = c.supersolution_ok;
  j["vanishes"] = c.vanishes;
  j["positive"] = c.positive;
  j["pass"] = c.pass;
  return j.dump(2);
}

}  // namespace plab
