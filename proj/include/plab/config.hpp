#pragma once

#include <string>

#include <json.hpp>

#include "plab/experiments.hpp"

namespace plab {

/// Tagged region record, e.g.
///   {"type": "codim_disk", "center": [0, 0], "radius": 0.5, "codim": 1}
/// Tags: ball, codim_disk, point, cone, box, complement, union, intersection,
/// placed, empty.
Region parse_region(const nlohmann::json& j, int n);

/// {"type": "identity"} | {"type": "diagonal", "entries": ["1+x1^2/2", ...]}
/// | {"type": "conformal", "factor": "..."}; null means Euclidean.
std::shared_ptr<const MetricField> parse_metric(const nlohmann::json& j, int n);

Point parse_point(const nlohmann::json& j, int n);

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace plab
