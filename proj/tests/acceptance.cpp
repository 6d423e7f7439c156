// Acceptance runner: one PASS/FAIL line per criterion AC-1..AC-9.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "plab/config.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace plab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Worst relative maximum-principle excursion over every solve of the run.
struct MaxPrincipleLog {
  std::mutex m;
  int solves = 0;
  double worst = 0.0;
} mp_log;

void observe(const DirichletProblem& problem, const SolveReport& report) {
  const auto& data = problem.boundary_data;
  double lo = 1e300, hi = -1e300;
  for (int v = 0; v < problem.mesh->node_count(); ++v) {
    if (!problem.constrained(v)) continue;
    lo = std::min(lo, data[v]);
    hi = std::max(hi, data[v]);
  }
  const double range = hi > lo ? hi - lo : 1.0;
  const double excess = max_principle_violation(problem, report.solution) / range;
  std::lock_guard lock(mp_log.m);
  ++mp_log.solves;
  mp_log.worst = std::max(mp_log.worst, excess);
}

Point origin(int n) { return Point::Zero(n); }

ExperimentConfig dichotomy_config(int n, Region obstacle, std::vector<double> hs) {
  ExperimentConfig c;
  c.n = n;
  c.p = 2.0;
  c.domain = Region::ball(origin(n), 1.0);
  c.obstacle = std::move(obstacle);
  c.x0 = origin(n);
  c.spacings = std::move(hs);
  return c;
}

double relative_change(const Verdict& v) {
  const auto& r = v.rows;
  const double a = r[r.size() - 2].capacity, b = r.back().capacity;
  return std::abs(a - b) / b;
}

bool strictly_decreasing(const Verdict& v) {
  for (std::size_t i = 1; i < v.rows.size(); ++i) {
    if (!(v.rows[i].influence < v.rows[i - 1].influence)) return false;
  }
  return true;
}

std::string list(const std::vector<double>& xs, const char* f = "%.4g") {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : ",") + fmt(f, x);
  return "[" + s + "]";
}

// f(x) = |x|^2 on the closed unit ball ranges over [0, 1].
constexpr double kDataRange = 1.0;

// --- AC-1 --------------------------------------------------------------------
Outcome ac1() {
  const double exact = oracle::condenser_capacity(0.25, 1.0, 2, 2.0);
  const double closed = condenser_oracle(0.25, 1.0, 2, 2.0);
  const Condenser c{Region::ball(origin(2), 0.25), Region::ball(origin(2), 1.0), 2.0, nullptr};
  const std::vector<double> hs{1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<double> err;
  for (double h : hs) err.push_back(std::abs(capacity_potential(c, h).value - exact) / exact);
  // least-squares slope of log err against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(err[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double k = hs.size();
  const double order = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const bool oracle_ok = std::abs(closed - exact) <= 1e-10 * exact;
  return {oracle_ok && err.back() <= 0.03 && order >= 0.8,
          fmt("oracle %.6f (closed form agrees: %s), rel err %s, order %.3f", exact,
              oracle_ok ? "yes" : "no", list(err).c_str(), order)};
}

// --- AC-2 --------------------------------------------------------------------
Outcome ac2() {
  const double exact = oracle::condenser_capacity(0.25, 1.0, 3, 2.0);
  const Condenser c{Region::ball(origin(3), 0.25), Region::ball(origin(3), 1.0), 2.0, nullptr};
  const auto est = capacity_potential(c, 1.0 / 32);
  const double err = std::abs(est.value - exact) / exact;
  return {std::abs(exact - 4.0 * std::numbers::pi / 3.0) < 1e-10 && err <= 0.05 &&
              est.report.converged,
          fmt("numeric %.5f vs 4pi/3 = %.5f, rel err %.4f", est.value, exact, err)};
}

// --- AC-3 --------------------------------------------------------------------
Outcome ac3() {
  const double target = 1.0 - std::pow(2.0, -0.5);
  const double displayed = oracle::displayed_point_eta(2, 3.0, 0.25);
  const auto rec = run_p_greater_n(2, 3.0);
  std::vector<double> etas;
  bool within = true;
  for (const auto& s : rec.profile.scales) {
    etas.push_back(s.eta);
    within = within && std::abs(s.eta - target) <= 0.1 * target;
  }
  return {within && etas.size() == 5 && rec.spread <= 0.1 &&
              std::abs(displayed - target) < 1e-12,
          fmt("eta_k %s, target %.5f, spread %.4f", list(etas, "%.5f").c_str(), target,
              rec.spread)};
}

// --- AC-4 --------------------------------------------------------------------
Outcome ac4() {
  const auto seg = run_dichotomy(dichotomy_config(
      2, Region::codim_disk(origin(2), 0.5, 1), {1.0 / 32, 1.0 / 64, 1.0 / 128}));
  const auto pt = run_dichotomy(dichotomy_config(
      2, Region::point(origin(2)), {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}));
  const double change = relative_change(seg);
  const double gap = seg.rows.back().attainment_gap;
  const bool seg_ok = seg.kind == VerdictKind::Regular && change < 0.1 && gap < 0.05 * kDataRange;
  const bool pt_ok = pt.kind == VerdictKind::Irregular &&
                     pt.capacity_trend.verdict == TrendModel::VanishingLog && strictly_decreasing(pt);
  std::vector<double> infl;
  for (const auto& r : pt.rows) infl.push_back(r.influence);
  return {seg_ok && pt_ok,
          fmt("segment %s (capacity change %.4f, gap(4h) at h=1/128 %.4f vs %.4f); "
              "point %s (capacity %s, influence %s)",
              to_string(seg.kind), change, gap, 0.05 * kDataRange, to_string(pt.kind),
              to_string(pt.capacity_trend.verdict), list(infl).c_str())};
}

// --- AC-5 --------------------------------------------------------------------
Outcome ac5() {
  const std::vector<double> hs{1.0 / 8, 1.0 / 16, 1.0 / 32};
  const auto disk = run_dichotomy(dichotomy_config(3, Region::codim_disk(origin(3), 0.5, 1), hs));
  const auto seg = run_dichotomy(dichotomy_config(3, Region::codim_disk(origin(3), 0.5, 2), hs));
  const double change = relative_change(disk);
  const bool disk_ok = disk.kind == VerdictKind::Regular && change < 0.1;
  const bool seg_ok = seg.kind == VerdictKind::Irregular && vanishing(seg.capacity_trend.verdict) &&
                      strictly_decreasing(seg);
  std::vector<double> gaps;
  for (const auto& r : disk.rows) gaps.push_back(r.attainment_gap);
  return {disk_ok && seg_ok,
          fmt("2-disk %s (capacity change %.4f, gap trend %s %s, gap vanishes %s); segment %s (capacity %s)",
              to_string(disk.kind), change, to_string(disk.gap_trend.verdict), list(gaps).c_str(),
              disk.gap_vanishes ? "yes" : "no", to_string(seg.kind),
              to_string(seg.capacity_trend.verdict))};
}

// --- AC-6 --------------------------------------------------------------------
Outcome ac6() {
  auto g = std::make_shared<const MetricField>(MetricField::diagonal(
      {Expression::parse("1+x1^2/2"), Expression::parse("1+x2^2/2")}));
  const auto seg = run_operator_invariance(
      dichotomy_config(2, Region::codim_disk(origin(2), 0.5, 1), {1.0 / 32, 1.0 / 64, 1.0 / 128}),
      g);
  const auto pt = run_operator_invariance(
      dichotomy_config(2, Region::point(origin(2)),
                       {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}),
      g);
  const bool ok = seg.comparable && seg.agree && seg.metric.kind == VerdictKind::Regular &&
                  pt.comparable && pt.agree && pt.metric.kind == VerdictKind::Irregular;
  return {ok, fmt("segment %s/%s, point %s/%s (euclidean/metric)", to_string(seg.euclidean.kind),
                  to_string(seg.metric.kind), to_string(pt.euclidean.kind),
                  to_string(pt.metric.kind))};
}

// --- AC-7 --------------------------------------------------------------------
Outcome ac7() {
  ExperimentConfig c = dichotomy_config(
      2, Region::cone(origin(2), Point{{0.0, -1.0}}, std::numbers::pi / 6, 0.5, 0),
      {1.0 / 64, 1.0 / 128, 1.0 / 256});
  c.barrier_epsilon = 0.25;
  const auto v = run_cone(c);
  bool certs = !v.barriers.empty();
  std::string ladder;
  for (const auto& b : v.barriers) {
    const bool ok = b.supersolution_margin >= -1e-6 * b.supersolution_scale &&
                    b.positivity_margin > 0.0 && b.vanish_at_x0.front() <= 0.5 * b.vanish_at_x0.back();
    certs = certs && ok;
    ladder += fmt(" %.3f/%.3f", b.vanish_at_x0.front(), b.vanish_at_x0.back());
  }
  return {v.kind == VerdictKind::Regular && certs,
          fmt("verdict %s, gap trend %s, ladder 4h/16h:%s", to_string(v.kind),
              to_string(v.gap_trend.verdict), ladder.c_str())};
}

// --- AC-8 --------------------------------------------------------------------
Outcome ac8() {
  int failed = 0, total = 0;
  std::string first;
  for (const auto& c : props::acceptance_suite()) {
    ++total;
    if (!c.pass) {
      ++failed;
      if (first.empty()) first = fmt(" first failure: %s %.3g > %.3g", c.name.c_str(), c.value, c.bound);
    }
  }
  std::lock_guard lock(mp_log.m);
  const bool mp_ok = mp_log.worst <= 1e-8;
  return {failed == 0 && mp_ok,
          fmt("%d/%d property checks pass; max principle over %d solves, worst %.2e of range%s",
              total - failed, total, mp_log.solves, mp_log.worst, first.c_str())};
}

// --- AC-9 --------------------------------------------------------------------
Outcome ac9() {
  const Point o = origin(2);
  bool c1 = true;
  std::string c1s;
  for (double eps : {1.0 / 8, 1.0 / 16}) {
    for (double h : {1.0 / 128, 1.0 / 256}) {
      const auto cert = certify(build_barrier(o, o, eps, 1, 2.0, h));
      c1 = c1 && cert.pass;
      c1s += cert.pass ? "P" : "F";
    }
  }
  // c = 2: the potential of a point is numerically null, so beta_eps tends
  // to 1 at every fixed distance from x0 as h shrinks.
  const std::vector<double> hs{1.0 / 64, 1.0 / 128, 1.0 / 256};
  const double rho = 4.0 * hs.front();
  std::vector<double> fixed, moving;
  bool c2_fail = true;
  for (double h : hs) {
    const Barrier b = build_barrier(o, o, 1.0 / 8, 2, 2.0, h);
    const auto cert = certify(b);
    c2_fail = c2_fail && !cert.pass;
    moving.push_back(cert.vanish_at_x0.front());
    fixed.push_back(certify(b, std::vector<double>{rho}).vanish_at_x0.front());
  }
  bool increasing = true;
  for (std::size_t i = 1; i < fixed.size(); ++i) increasing = increasing && fixed[i] > fixed[i - 1];
  return {c1 && c2_fail && increasing,
          fmt("c=1 certificates %s; c=2 fails %s, vanishAtX0(rho=%.4g) %s, at rho=4h %s", c1s.c_str(),
              c2_fail ? "at every h" : "NOT at every h", rho, list(fixed).c_str(),
              list(moving).c_str())};
}

}  // namespace

int main() {
  set_solve_observer(observe);
  struct Criterion {
    const char* id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC-1", 120, ac1}, {"AC-2", 300, ac2}, {"AC-3", 120, ac3},
      {"AC-4", 300, ac4}, {"AC-5", 600, ac5}, {"AC-6", 600, ac6},
      {"AC-7", 1e9, ac7}, {"AC-9", 1e9, ac9}, {"AC-8", 1e9, ac8},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = s <= c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("%s %s %s (%.1fs%s)\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), s,
                in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
