#include "plab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace plab {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Regular: return "Regular";
    case VerdictKind::Irregular: return "Irregular";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (!(p > 1.0)) throw InvalidInput("config: p must exceed 1");
  if (n < 1 || n > 6) throw InvalidInput("config: n must lie in [1, 6]");
  if (domain.dim() != n || obstacle.dim() != n) throw InvalidInput("config: region dimension != n");
  if (x0.size() != n) throw InvalidInput("config: x0 dimension != n");
  if (obstacle.codim() < 0 || obstacle.codim() > n) throw InvalidInput("config: codim out of range");
  for (std::size_t i = 1; i < spacings.size(); ++i) {
    if (!(spacings[i] < spacings[i - 1])) throw InvalidInput("config: spacings must decrease");
  }
  for (double h : spacings) {
    if (!(h > 0.0)) throw InvalidInput("config: spacings must be positive");
  }
}

namespace {

// Runs fn(i) for i < count, on worker threads when requested; results are
// collected by index either way.
template <class T, class F>
std::vector<T> map_indices(std::size_t count, bool parallel, F fn) {
  std::vector<T> out;
  out.reserve(count);
  if (!parallel) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<T>> jobs;
  for (std::size_t i = 0; i < count; ++i) jobs.push_back(std::async(std::launch::async, fn, i));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

double squared_distance_data(const Point& x, const Point& x0) { return (x - x0).squaredNorm(); }

std::shared_ptr<const GridMesh> experiment_mesh(const ExperimentConfig& cfg, const Region& obstacle,
                                                double h) {
  return domain_mesh(cfg.domain, obstacle, h, cfg.x0, std::nullopt);
}

FluxField experiment_flux(const ExperimentConfig& cfg, const GridMesh& mesh) {
  return condenser_flux(Condenser{cfg.obstacle, cfg.domain, cfg.p, cfg.metric}, mesh);
}

double attainment_gap(const ScalarField& u, const Point& x0) {
  const GridMesh& mesh = u.mesh();
  const double radius = 4.0 * mesh.spacing() * (1.0 + 1e-12);
  double gap = 0.0;
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::External) continue;
    const Point x = mesh.node_point(v);
    if ((x - x0).norm() <= radius) gap = std::max(gap, std::abs(u[v]));  // f(x0) = 0
  }
  return gap;
}

double probe_sup(const ScalarField& a, const ScalarField& b, const Region& obstacle,
                 double distance) {
  const GridMesh& mesh = a.mesh();
  double sup = 0.0;
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) != NodeClass::Free) continue;
    if (distance_to(obstacle, mesh.node_point(v)) < distance) continue;
    sup = std::max(sup, std::abs(a[v] - b[v]));
  }
  return sup;
}

ScalarField solve_with(const std::shared_ptr<const GridMesh>& mesh, const FluxField& flux,
                       const ScalarField& data, double tol, bool& converged) {
  DirichletProblem problem(mesh, flux, data);
  auto report = solve(problem, tol);
  converged = converged && report.converged;
  return report.solution;
}

bool unresolved_error(const InvalidInput& e) {
  return std::string(e.what()).find("has no nodes") != std::string::npos;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return v.size() >= 2;
}

}  // namespace

Verdict run_dichotomy(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.spacings.size() < 3) throw InvalidInput("run_dichotomy: need at least three spacings");
  Verdict v;
  v.rows = map_indices<DichotomyRow>(cfg.spacings.size(), cfg.parallel, [&](std::size_t i) {
    DichotomyRow row;
    row.h = cfg.spacings[i];
    CapacityOptions co;
    co.anchor = cfg.x0;
    co.tol = cfg.tol;
    try {
      const auto est =
          capacity_potential(Condenser{cfg.obstacle, cfg.domain, cfg.p, cfg.metric}, row.h, co);
      row.capacity = est.value;
      row.converged = est.report.converged;
    } catch (const InvalidInput& e) {
      if (!unresolved_error(e)) throw;
      row.resolved = false;
      return row;
    }
    auto mesh = experiment_mesh(cfg, cfg.obstacle, row.h);
    const FluxField flux = experiment_flux(cfg, *mesh);
    ScalarField f = ScalarField::sample(mesh, [&](const Point& x) {
      return squared_distance_data(x, cfg.x0);
    });
    ScalarField bumped = f;
    for (int k = 0; k < mesh->node_count(); ++k) {
      if (mesh->node_class(k) == NodeClass::Obstacle) bumped[k] += 1.0;
    }
    const ScalarField uf = solve_with(mesh, flux, f, cfg.tol, row.converged);
    const ScalarField ug = solve_with(mesh, flux, bumped, cfg.tol, row.converged);
    row.influence = probe_sup(ug, uf, cfg.obstacle, cfg.probe_distance);
    row.attainment_gap = attainment_gap(uf, cfg.x0);
    return row;
  });

  std::vector<double> hs, caps, infl, gaps;
  for (const auto& r : v.rows) {
    if (!r.resolved) continue;
    hs.push_back(r.h);
    caps.push_back(r.capacity);
    infl.push_back(r.influence);
    gaps.push_back(r.attainment_gap);
  }
  v.capacity_trend = classify_trend(hs, caps);
  v.influence_trend = classify_trend(hs, infl);
  v.gap_trend = classify_trend(hs, gaps);
  v.capacity_bounded = v.capacity_trend.verdict == TrendModel::BoundedBelow;
  v.capacity_vanishing = vanishing(v.capacity_trend.verdict);
  v.influence_bounded = v.influence_trend.verdict == TrendModel::BoundedBelow;
  // Three spacings rarely separate the models, so strict monotone decay
  // without a winning bounded fit also counts for the influence and the gap.
  v.influence_vanishing = vanishing(v.influence_trend.verdict) ||
                          (strictly_decreasing(infl) && !v.influence_bounded);
  v.gap_vanishes = v.gap_trend.verdict == TrendModel::VanishingPower ||
                   (v.gap_trend.verdict == TrendModel::Inconclusive && strictly_decreasing(gaps));

  if (v.capacity_bounded && v.influence_bounded && v.gap_vanishes) {
    v.kind = VerdictKind::Regular;
  } else if (v.capacity_vanishing && v.influence_vanishing) {
    v.kind = VerdictKind::Irregular;
  } else {
    v.note = "tests disagree or are inconclusive";
  }
  if (hs.size() < cfg.spacings.size()) v.note += (v.note.empty() ? "" : "; ") + std::string("unresolved spacings dropped");
  return v;
}

RemovabilityRecord run_removability(const ExperimentConfig& cfg, const DataSpec& f,
                                    const DataSpec& g) {
  cfg.validate();
  if (cfg.obstacle.codim() < cfg.p) {
    throw InvalidInput("run_removability: the obstacle codimension must be >= p");
  }
  RemovabilityRecord rec;
  struct Row {
    double h;
    double sup;
    bool resolved;
  };
  const auto rows = map_indices<Row>(cfg.spacings.size(), cfg.parallel, [&](std::size_t i) {
    const double h = cfg.spacings[i];
    auto mesh = experiment_mesh(cfg, cfg.obstacle, h);
    if (mesh->count(NodeClass::Obstacle) == 0) return Row{h, 0.0, false};
    ScalarField df(mesh), dg(mesh);
    for (int k = 0; k < mesh->node_count(); ++k) {
      const auto c = mesh->node_class(k);
      if (c == NodeClass::External || c == NodeClass::Free) continue;
      const Point x = mesh->node_point(k);
      if (c == NodeClass::OuterBoundary) {
        df[k] = f.boundary(x);
        dg[k] = g.boundary(x);
        if (std::abs(df[k] - dg[k]) > 1e-12 * (1.0 + std::abs(df[k]))) {
          throw InvalidInput("run_removability: f and g differ on the outer boundary");
        }
      } else {
        df[k] = f.on_obstacle(x);
        dg[k] = g.on_obstacle(x);
      }
    }
    const FluxField flux = experiment_flux(cfg, *mesh);
    bool converged = true;
    const ScalarField uf = solve_with(mesh, flux, df, cfg.tol, converged);
    const ScalarField ug = solve_with(mesh, flux, dg, cfg.tol, converged);
    return Row{h, probe_sup(uf, ug, cfg.obstacle, cfg.probe_distance), true};
  });
  for (const auto& r : rows) {
    if (!r.resolved) continue;
    rec.h.push_back(r.h);
    rec.sup_difference.push_back(r.sup);
  }
  const bool all_zero = std::all_of(rec.sup_difference.begin(), rec.sup_difference.end(),
                                    [](double x) { return x == 0.0; });
  if (all_zero) {
    rec.trend.h = rec.h;
    rec.trend.values = rec.sup_difference;
    rec.trend.note = "identically zero";
  } else {
    rec.trend = classify_trend(rec.h, rec.sup_difference);
  }
  return rec;
}

InvarianceRecord run_operator_invariance(const ExperimentConfig& cfg,
                                         std::shared_ptr<const MetricField> g) {
  cfg.validate();
  if (!g || g->dim() != cfg.n) throw InvalidInput("run_operator_invariance: metric dimension");
  const BoundingBox box = bounding_box(cfg.domain);
  const GridMesh probe = build_aligned_mesh(box, cfg.spacings.front(), cfg.x0);
  for (int v = 0; v < probe.node_count(); ++v) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g->tensor(probe.node_point(v)));
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 100.0) {
      throw InvalidInput("run_operator_invariance: metric not SPD with condition number <= 100");
    }
  }
  InvarianceRecord rec;
  ExperimentConfig euclid = cfg;
  euclid.metric = nullptr;
  ExperimentConfig metric = cfg;
  metric.metric = std::move(g);
  rec.euclidean = run_dichotomy(euclid);
  rec.metric = run_dichotomy(metric);
  rec.comparable = rec.euclidean.kind != VerdictKind::Inconclusive &&
                   rec.metric.kind != VerdictKind::Inconclusive;
  rec.agree = rec.euclidean.kind == rec.metric.kind;
  return rec;
}

Verdict run_cone(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto* cone = std::get_if<TruncatedCone>(&cfg.obstacle.variant());
  if (!cone) throw InvalidInput("run_cone: obstacle must be a truncated cone");
  if (cone->codim >= cfg.p) throw InvalidInput("run_cone: requires codim < p");
  if (cfg.spacings.size() < 3) throw InvalidInput("run_cone: need at least three spacings");
  ExperimentConfig at_vertex = cfg;
  at_vertex.x0 = cone->vertex;
  const Region truncated =
      Region::cone(cone->vertex, cone->axis, cone->half_angle, cfg.barrier_epsilon, cone->codim);

  struct Row {
    DichotomyRow row;
    BarrierCertificate cert;
  };
  const auto rows = map_indices<Row>(cfg.spacings.size(), cfg.parallel, [&](std::size_t i) {
    Row r;
    r.row.h = cfg.spacings[i];
    auto mesh = experiment_mesh(at_vertex, cfg.obstacle, r.row.h);
    const FluxField flux = experiment_flux(at_vertex, *mesh);
    ScalarField f = ScalarField::sample(mesh, [&](const Point& x) {
      return squared_distance_data(x, cone->vertex);
    });
    const ScalarField u = solve_with(mesh, flux, f, cfg.tol, r.row.converged);
    r.row.attainment_gap = attainment_gap(u, cone->vertex);

    BarrierOptions bo;
    bo.metric = cfg.metric;
    bo.domain = cfg.domain;
    bo.tol = cfg.tol;
    const Barrier b =
        build_barrier_from(truncated, cone->vertex, cone->vertex, cfg.barrier_epsilon, cfg.p, r.row.h, bo);
    r.row.converged = r.row.converged && b.converged;
    r.cert = certify(b);
    return r;
  });

  Verdict v;
  std::vector<double> hs, gaps;
  bool all_pass = true, all_fail = true;
  for (const auto& r : rows) {
    v.rows.push_back(r.row);
    v.barriers.push_back(r.cert);
    hs.push_back(r.row.h);
    gaps.push_back(r.row.attainment_gap);
    all_pass = all_pass && r.cert.pass;
    all_fail = all_fail && !r.cert.pass;
  }
  v.gap_trend = classify_trend(hs, gaps);
  v.gap_vanishes = v.gap_trend.verdict == TrendModel::VanishingPower;
  const bool gap_stalls = v.gap_trend.verdict == TrendModel::BoundedBelow ||
                          v.gap_trend.verdict == TrendModel::VanishingLog;
  if (v.gap_vanishes && all_pass) {
    v.kind = VerdictKind::Regular;
  } else if (gap_stalls && all_fail) {
    v.kind = VerdictKind::Irregular;
  } else {
    v.note = "attainment and barrier tests disagree or are inconclusive";
  }
  return v;
}

double point_eta_p_greater_n(int n, double p) {
  if (!(p > n)) throw InvalidInput("point_eta_p_greater_n: requires p > n");
  return 1.0 - std::pow(2.0, (n - p) / (p - 1.0));
}

PGreaterNRecord run_p_greater_n(int n, double p, const PGreaterNOptions& opt) {
  PGreaterNRecord rec;
  rec.target = point_eta_p_greater_n(n, p);
  const Point origin = Point::Zero(n);
  const Region point = Region::point(origin);
  WienerOptions wo;
  wo.cells = opt.cells;
  wo.tol = opt.tol;
  rec.profile = wiener_profile(point, origin, p, opt.t0, opt.K, wo);

  std::vector<double> values;
  const double gamma = (p - n) / (p - 1.0);
  const double r = std::pow(2.0, gamma);
  for (const auto& s : rec.profile.scales) {
    if (s.unresolved || s.clipped) continue;
    if (!opt.extrapolate) {
      values.push_back(s.eta);
      continue;
    }
    // 1/eta(h) = A - B h^gamma: the point is fattened to radius ~h and the
    // capacity of (B_r, B_R) depends on r through r^gamma
    const auto coarse = wiener_integrand(point, origin, s.t, p, 2.0 * s.h, wo);
    const double a = (r / s.eta - 1.0 / coarse.eta) / (r - 1.0);
    rec.extrapolated.push_back(1.0 / a);
    values.push_back(1.0 / a);
  }
  if (values.empty()) return rec;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double mean = 0.0;
  for (double x : values) mean += x / values.size();
  rec.spread = (*hi - *lo) / mean;
  for (double x : values) {
    rec.max_relative_error = std::max(rec.max_relative_error, std::abs(x / rec.target - 1.0));
  }
  rec.pass = rec.spread <= 0.1 && rec.max_relative_error <= 0.1;
  return rec;
}

namespace {

nlohmann::json trend_json(const TrendRecord& t) {
  nlohmann::json j;
  j["h"] = t.h;
  j["values"] = t.values;
  j["verdict"] = to_string(t.verdict);
  j["note"] = t.note;
  j["fits"] = nlohmann::json::array();
  for (const auto& f : t.fits) {
    j["fits"].push_back({{"model", to_string(f.model)},
                         {"residual", std::isfinite(f.residual) ? nlohmann::json(f.residual)
                                                                : nlohmann::json(nullptr)},
                         {"params", f.params}});
  }
  return j;
}

}  // namespace

std::string verdict_json(const ExperimentConfig& cfg, const Verdict& v) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["obstacle"] = describe(cfg.obstacle);
  j["codim"] = cfg.obstacle.codim();
  j["metric"] = cfg.metric ? cfg.metric->description() : "euclidean";
  j["verdict"] = to_string(v.kind);
  j["note"] = v.note;
  j["capacity_bounded"] = v.capacity_bounded;
  j["capacity_vanishing"] = v.capacity_vanishing;
  j["influence_bounded"] = v.influence_bounded;
  j["influence_vanishing"] = v.influence_vanishing;
  j["gap_vanishes"] = v.gap_vanishes;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : v.rows) {
    j["rows"].push_back({{"h", r.h},
                         {"resolved", r.resolved},
                         {"capacity", r.capacity},
                         {"influence", r.influence},
                         {"attainment_gap", r.attainment_gap},
                         {"converged", r.converged}});
  }
  j["capacity_trend"] = trend_json(v.capacity_trend);
  j["influence_trend"] = trend_json(v.influence_trend);
  j["gap_trend"] = trend_json(v.gap_trend);
  j["barriers"] = nlohmann::json::array();
  for (const auto& c : v.barriers) j["barriers"].push_back(nlohmann::json::parse(certificate_json(c)));
  return j.dump(2);
}

void write_dichotomy_csv(std::ostream& os, const ExperimentConfig& cfg, const Verdict& v) {
  os << "name,h,resolved,capacity,influence,attainment_gap,converged,verdict\n";
  char buf[256];
  for (const auto& r : v.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%.17g,%.17g,%.17g,%d,%s\n", cfg.name.c_str(), r.h,
                  r.resolved ? 1 : 0, r.capacity, r.influence, r.attainment_gap, r.converged ? 1 : 0,
                  to_string(v.kind));
    os << buf;
  }
}

}  // namespace plab
