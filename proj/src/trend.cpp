#include "plab/trend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace plab {

const char* to_string(TrendModel m) {
  switch (m) {
    case TrendModel::BoundedBelow: return "BoundedBelow";
    case TrendModel::VanishingLog: return "VanishingLog";
    case TrendModel::VanishingPower: return "VanishingPower";
    case TrendModel::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rms_log(const std::vector<double>& model, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(model[i] > 0.0)) return kInf;
    const double d = std::log(model[i]) - std::log(v[i]);
    acc += d * d;
  }
  return std::sqrt(acc / v.size());
}

TrendFit fit_bounded(const std::vector<double>& h, const std::vector<double>& v) {
  TrendFit best{TrendModel::BoundedBelow, kInf, {}};
  const std::size_t m = h.size();
  for (double s : {0.5, 1.0, 2.0}) {
    // ordinary least squares for v = a + b x, x = h^s
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = std::pow(h[i], s);
      sx += x;
      sy += v[i];
      sxx += x * x;
      sxy += x * v[i];
    }
    const double det = m * sxx - sx * sx;
    if (det == 0.0) continue;
    const double b = (m * sxy - sx * sy) / det;
    const double a = (sy - b * sx) / m;
    if (!(a > 0.0)) continue;
    std::vector<double> model(m);
    for (std::size_t i = 0; i < m; ++i) model[i] = a + b * std::pow(h[i], s);
    const double r = rms_log(model, v);
    if (r < best.residual) best = TrendFit{TrendModel::BoundedBelow, r, {a, b, s}};
  }
  return best;
}

TrendFit fit_log(const std::vector<double>& h, const std::vector<double>& v) {
  TrendFit best{TrendModel::VanishingLog, kInf, {}};
  const std::size_t m = h.size();
  double min_l = kInf;
  for (double x : h) min_l = std::min(min_l, std::abs(std::log(x)));
  const double c_lo = std::max(-1.0, 0.5 - min_l);
  for (double c = c_lo; c <= 6.0 + 1e-12; c += 0.005) {
    // log v = log b - log(L + c); log b by averaging
    double logb = 0.0;
    for (std::size_t i = 0; i < m; ++i) logb += std::log(v[i]) + std::log(std::abs(std::log(h[i])) + c);
    logb /= m;
    std::vector<double> model(m);
    for (std::size_t i = 0; i < m; ++i) model[i] = std::exp(logb) / (std::abs(std::log(h[i])) + c);
    const double r = rms_log(model, v);
    if (r < best.residual) best = TrendFit{TrendModel::VanishingLog, r, {std::exp(logb), c}};
  }
  return best;
}

TrendFit fit_power(const std::vector<double>& h, const std::vector<double>& v) {
  constexpr double min_rate = 0.25;
  const std::size_t m = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(h[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = m * sxx - sx * sx;
  double s = det != 0.0 ? (m * sxy - sx * sy) / det : 0.0;
  s = std::max(s, min_rate);
  const double logb = (sy - s * sx) / m;
  std::vector<double> model(m);
  for (std::size_t i = 0; i < m; ++i) model[i] = std::exp(logb + s * std::log(h[i]));
  return TrendFit{TrendModel::VanishingPower, rms_log(model, v), {std::exp(logb), s}};
}

}  // namespace

TrendRecord classify_trend(std::vector<double> h, std::vector<double> values) {
  TrendRecord rec;
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  for (auto i : order) {
    rec.h.push_back(h[i]);
    rec.values.push_back(values[i]);
  }
  if (rec.h.size() < 3 || rec.h.size() != values.size()) {
    rec.note = "fewer than three spacings";
    return rec;
  }
  for (std::size_t i = 0; i < rec.h.size(); ++i) {
    if (!(rec.values[i] > 0.0) || !std::isfinite(rec.values[i]) || !(rec.h[i] > 0.0) ||
        !(rec.h[i] < 1.0)) {
      rec.note = "values must be positive and spacings in (0, 1)";
      return rec;
    }
  }

  const double vmax = *std::max_element(rec.values.begin(), rec.values.end());
  const double dir = rec.values.back() - rec.values.front();
  for (std::size_t i = 0; i + 1 < rec.values.size(); ++i) {
    const double step = rec.values[i + 1] - rec.values[i];
    if (step * dir < 0.0 && std::abs(step) > 0.2 * vmax) {
      rec.note = "non-monotone beyond 20%";
      return rec;
    }
  }

  rec.fits = {fit_bounded(rec.h, rec.values), fit_log(rec.h, rec.values),
              fit_power(rec.h, rec.values)};
  std::vector<TrendFit> ranked = rec.fits;
  std::sort(ranked.begin(), ranked.end(),
            [](const TrendFit& a, const TrendFit& b) { return a.residual < b.residual; });
  if (ranked[1].residual > 1e-14 && ranked[0].residual <= 0.5 * ranked[1].residual) {
    rec.verdict = ranked[0].model;
  } else {
    rec.note = "no model wins by the residual-halving rule";
  }
  return rec;
}

}  // namespace plab
