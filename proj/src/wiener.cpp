#include "plab/wiener.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace plab {

const char* to_string(WienerVerdict v) {
  switch (v) {
    case WienerVerdict::RegularEvidence: return "RegularEvidence";
    case WienerVerdict::IrregularEvidence: return "IrregularEvidence";
    case WienerVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

WienerSample wiener_integrand(const Region& complement, const Point& x0, double t, double p,
                              double h, const WienerOptions& opt) {
  const int n = complement.dim();
  if (x0.size() != n) throw InvalidInput("wiener_integrand: dimension mismatch");
  if (!(t > 0.0)) throw InvalidInput("wiener_integrand: scale must be positive");
  if (!(2.0 * t / h >= 8.0 - 1e-9)) {
    throw InvalidInput("wiener_integrand: spacing must resolve B(x0, t) with 8 cells");
  }
  WienerSample s;
  s.t = t;
  s.h = h;
  s.denominator = condenser_oracle(t, 2.0 * t, n, p);

  Condenser c{Region::intersect({complement, Region::ball(x0, t)}), Region::ball(x0, 2.0 * t), p,
              opt.metric};
  CapacityOptions co;
  co.anchor = x0;
  co.tol = opt.tol;
  try {
    const auto est = capacity_potential(c, h, co);
    s.numerator = est.value;
    s.converged = est.report.converged;
  } catch (const InvalidInput& e) {
    if (std::string(e.what()).find("has no nodes") == std::string::npos) throw;
    s.unresolved = true;
    return s;
  }
  s.eta = std::pow(s.numerator / s.denominator, 1.0 / (p - 1.0));
  return s;
}

namespace {

double distance_to_box_boundary(const BoundingBox& box, const Point& x) {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i) d = std::min({d, x[i] - box.lo[i], box.hi[i] - x[i]});
  return d;
}

}  // namespace

WienerProfile wiener_profile(const Region& complement, const Point& x0, double p, double t0, int K,
                             const WienerOptions& opt) {
  if (K < 3) throw InvalidInput("wiener_profile: need at least four scales");
  if (t0 <= 0.0) {
    if (!opt.chart) throw InvalidInput("wiener_profile: default t0 needs a chart box");
    t0 = 0.25 * distance_to_box_boundary(*opt.chart, x0);
    if (!(t0 > 0.0)) throw InvalidInput("wiener_profile: x0 is not inside the chart box");
  }
  WienerProfile prof;
  prof.x0 = x0;
  prof.p = p;
  double sum = 0.0;
  std::vector<double> ks, logs;
  double min_eta = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= K; ++k) {
    const double t = t0 * std::ldexp(1.0, -k);
    double h = t / opt.cells;
    if (opt.rule == HRule::Refining) h = std::ldexp(h, -k);
    WienerSample s;
    if (opt.chart && distance_to_box_boundary(*opt.chart, x0) < 2.0 * t) {
      s.t = t;
      s.h = h;
      s.clipped = true;
    } else {
      s = wiener_integrand(complement, x0, t, p, h, opt);
    }
    s.k = k;
    if (!s.clipped && !s.unresolved) {
      sum += std::log(2.0) * s.eta;
      ks.push_back(k);
      logs.push_back(std::log(s.eta));
      min_eta = std::min(min_eta, s.eta);
    }
    prof.partial_sums.push_back(sum);
    prof.scales.push_back(s);
  }

  const std::size_t m = ks.size();
  if (m < 4) {
    prof.note = "fewer than four valid scales";
    return prof;
  }
  // log eta_k = log C + k log q against the constant model
  double mk = 0, ml = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mk += ks[i] / m;
    ml += logs[i] / m;
  }
  double skk = 0, skl = 0, const_res = 0;
  for (std::size_t i = 0; i < m; ++i) {
    skk += (ks[i] - mk) * (ks[i] - mk);
    skl += (ks[i] - mk) * (logs[i] - ml);
    const_res += (logs[i] - ml) * (logs[i] - ml);
  }
  const double slope = skl / skk;
  double geo_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = logs[i] - ml - slope * (ks[i] - mk);
    geo_res += r * r;
  }
  prof.decay_ratio = std::exp(slope);
  // Decay is tested first: a decaying profile may still sit above delta at
  // the finitely many scales available.
  if (prof.decay_ratio < opt.decay_bound && std::sqrt(geo_res) <= 0.5 * std::sqrt(const_res)) {
    prof.verdict = WienerVerdict::IrregularEvidence;
  } else if (min_eta >= opt.delta) {
    prof.verdict = WienerVerdict::RegularEvidence;
  } else {
    prof.note = "eta below delta without geometric decay";
  }
  return prof;
}

void write_wiener_csv_header(std::ostream& os) {
  os << "x0,p,k,t_k,eta_k,partial_sum,verdict\n";
}

void write_wiener_csv(std::ostream& os, const WienerProfile& profile) {
  std::string x0;
  char buf[64];
  for (int i = 0; i < profile.x0.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? ";" : "", profile.x0[i]);
    x0 += buf;
  }
  for (std::size_t i = 0; i < profile.scales.size(); ++i) {
    const auto& s = profile.scales[i];
    char eta[32], line[256];
    if (s.clipped || s.unresolved) {
      std::snprintf(eta, sizeof eta, "%s", s.clipped ? "clipped" : "unresolved");
    } else {
      std::snprintf(eta, sizeof eta, "%.17g", s.eta);
    }
    std::snprintf(line, sizeof line, "%s,%.17g,%d,%.17g,%s,%.17g,%s\n", x0.c_str(), profile.p, s.k,
                  s.t, eta, profile.partial_sums[i], to_string(profile.verdict));
    os << line;
  }
}

}  // namespace plab
