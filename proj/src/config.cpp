#include "plab/config.hpp"

#include <fstream>

namespace plab {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string("config: missing key '") + key + "'");
  }
  return j.at(key);
}

double number(const nlohmann::json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw InvalidInput(std::string("config: '") + key + "' must be a number");
  return v.get<double>();
}

Expression expression(const nlohmann::json& j) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (j.is_string()) return Expression::parse(j.get<std::string>());
  throw InvalidInput("config: expressions are strings or numbers");
}

}  // namespace

Point parse_point(const nlohmann::json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw InvalidInput("config: point must be an array of " + std::to_string(n) + " numbers");
  }
  Point x(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) throw InvalidInput("config: point coordinates must be numbers");
    x[i] = j[i].get<double>();
  }
  return x;
}

Region parse_region(const nlohmann::json& j, int n) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "ball") return Region::ball(parse_point(field(j, "center"), n), number(j, "radius"));
  if (type == "codim_disk") {
    return Region::codim_disk(parse_point(field(j, "center"), n), number(j, "radius"),
                              field(j, "codim").get<int>());
  }
  if (type == "point") return Region::point(parse_point(field(j, "at"), n));
  if (type == "cone") {
    return Region::cone(parse_point(field(j, "vertex"), n), parse_point(field(j, "axis"), n),
                        number(j, "half_angle"), number(j, "height"), j.value("codim", 0));
  }
  if (type == "box") return Region::box(parse_point(field(j, "lo"), n), parse_point(field(j, "hi"), n));
  if (type == "complement") return Region::complement(parse_region(field(j, "of"), n));
  if (type == "union" || type == "intersection") {
    std::vector<Region> parts;
    for (const auto& part : field(j, "parts")) parts.push_back(parse_region(part, n));
    return type == "union" ? Region::unite(std::move(parts), n) : Region::intersect(std::move(parts));
  }
  if (type == "placed") {
    const auto& rows = field(j, "rotation");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
      throw InvalidInput("config: rotation must be an n x n array");
    }
    Matrix r(n, n);
    for (int i = 0; i < n; ++i) r.row(i) = parse_point(rows[i], n).transpose();
    return Region::placed(parse_region(field(j, "region"), n), r, parse_point(field(j, "offset"), n));
  }
  if (type == "empty") return Region::empty(n);
  throw InvalidInput("config: unknown region type '" + type + "'");
}

std::shared_ptr<const MetricField> parse_metric(const nlohmann::json& j, int n) {
  if (j.is_null()) return nullptr;
  const std::string type = field(j, "type").get<std::string>();
  if (type == "identity" || type == "euclidean") return nullptr;
  if (type == "diagonal") {
    std::vector<Expression> entries;
    for (const auto& e : field(j, "entries")) entries.push_back(expression(e));
    if (static_cast<int>(entries.size()) != n) {
      throw InvalidInput("config: diagonal metric needs n entries");
    }
    return std::make_shared<const MetricField>(MetricField::diagonal(std::move(entries)));
  }
  if (type == "conformal") {
    return std::make_shared<const MetricField>(MetricField::conformal(n, expression(field(j, "factor"))));
  }
  throw InvalidInput("config: unknown metric type '" + type + "'");
}

namespace {

ExperimentConfig parse_fields(const nlohmann::json& j) {
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  c.n = field(j, "n").get<int>();
  c.p = number(j, "p");
  c.domain = j.contains("domain") ? parse_region(j.at("domain"), c.n)
                                  : Region::ball(Point::Zero(c.n), 1.0);
  c.obstacle = j.contains("obstacle") ? parse_region(j.at("obstacle"), c.n) : Region::empty(c.n);
  c.x0 = j.contains("x0") ? parse_point(j.at("x0"), c.n) : Point(Point::Zero(c.n));
  c.metric = parse_metric(j.value("metric", nlohmann::json()), c.n);
  if (j.contains("spacings")) c.spacings = j.at("spacings").get<std::vector<double>>();
  c.probe_distance = j.value("probe_distance", c.probe_distance);
  c.barrier_epsilon = j.value("barrier_epsilon", c.barrier_epsilon);
  c.tol = j.value("tol", c.tol);
  c.seed = j.value("seed", c.seed);
  c.parallel = j.value("parallel", c.parallel);
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("expect")) c.expect = j.at("expect").get<std::string>();
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    return parse_fields(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace plab
