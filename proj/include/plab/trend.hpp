#pragma once

#include <string>
#include <vector>

namespace plab {

enum class TrendModel { BoundedBelow, VanishingLog, VanishingPower, Inconclusive };

const char* to_string(TrendModel m);

struct TrendFit {
  TrendModel model = TrendModel::Inconclusive;
  /// RMS residual of log(value); infinite when the model is inadmissible.
  double residual = 0.0;
  /// BoundedBelow: a, b, s of a + b h^s. VanishingLog: b, c of b / (|log h| + c).
  /// VanishingPower: b, s of b h^s.
  std::vector<double> params;
};

struct TrendRecord {
  std::vector<double> h;
  std::vector<double> values;
  std::vector<TrendFit> fits;  // one per candidate model, in enum order
  TrendModel verdict = TrendModel::Inconclusive;
  std::string note;
};

/// Selects among the three refinement models by least squares on log(value).
/// The best fit wins only when its residual is at most half the runner-up's;
/// values that move against the overall trend by more than 20% between
/// consecutive spacings make the record Inconclusive. h need not be sorted.
TrendRecord classify_trend(std::vector<double> h, std::vector<double> values);

inline bool vanishing(TrendModel m) {
  return m == TrendModel::VanishingLog || m == TrendModel::VanishingPower;
}

}  // namespace plab
