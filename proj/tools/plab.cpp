// Command-line driver for the experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plab/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plab;

namespace {

enum class Level { Error, Warn, Info, Debug };
Level g_level = Level::Info;

void log(Level lv, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (lv <= g_level) std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lv)], msg.c_str());
}

struct Globals {
  std::string config;
  std::string out = "out";
  bool deterministic = false;
  std::string h_list;
  std::string log_level = "info";
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

std::vector<double> parse_h_list(const std::string& s) {
  std::vector<double> hs;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto slash = item.find('/');
    hs.push_back(slash == std::string::npos
                     ? std::stod(item)
                     : std::stod(item.substr(0, slash)) / std::stod(item.substr(slash + 1)));
  }
  return hs;
}

struct Job {
  json raw;
  ExperimentConfig cfg;
  fs::path out;
};

Job load(const Globals& g) {
  static const std::map<std::string, Level> levels = {
      {"error", Level::Error}, {"warn", Level::Warn}, {"info", Level::Info}, {"debug", Level::Debug}};
  g_level = levels.at(g.log_level);
  if (g.config.empty()) throw InvalidInput("--config is required");
  Job job;
  job.raw = read_json(g.config);
  if (!g.h_list.empty()) job.raw["spacings"] = parse_h_list(g.h_list);
  job.cfg = parse_config(job.raw);
  job.cfg.parallel = !g.deterministic && job.cfg.parallel;
  job.out = g.out;
  fs::create_directories(job.out);
  return job;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  log(Level::Info, "wrote " + path.string());
}

// Exit status 0 iff the observed verdict matches the declared expectation.
int check(const Job& job, const std::string& observed) {
  if (!job.cfg.expect) {
    log(Level::Info, "verdict " + observed);
    return 0;
  }
  const bool ok = *job.cfg.expect == observed;
  log(ok ? Level::Info : Level::Error,
      "verdict " + observed + (ok ? " matches" : " differs from") + " expected " + *job.cfg.expect);
  return ok ? 0 : 1;
}

ScalarField data_field(const std::shared_ptr<const GridMesh>& mesh, const DataSpec& d) {
  ScalarField f(mesh);
  for (int v = 0; v < mesh->node_count(); ++v) {
    const auto c = mesh->node_class(v);
    if (c == NodeClass::External) continue;
    f[v] = c == NodeClass::Obstacle ? d.on_obstacle(mesh->node_point(v))
                                    : d.boundary(mesh->node_point(v));
  }
  return f;
}

DataSpec data_spec(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("config: missing '") + key + "'");
  const auto& d = j.at(key);
  auto expr = [](const json& e) {
    return e.is_number() ? Expression::constant(e.get<double>()) : Expression::parse(e.get<std::string>());
  };
  const Expression b = expr(d.at("boundary"));
  return DataSpec{b, d.contains("obstacle") ? expr(d.at("obstacle")) : b};
}

int cmd_solve(const Globals& g) {
  Job job = load(g);
  const auto& c = job.cfg;
  if (c.spacings.empty()) throw InvalidInput("solve: need a spacing");
  const double h = c.spacings.back();
  auto mesh = domain_mesh(c.domain, c.obstacle, h, c.x0, std::nullopt);
  const DataSpec data = data_spec(job.raw, "data");
  DirichletProblem problem(mesh, condenser_flux(Condenser{c.obstacle, c.domain, c.p, c.metric}, *mesh),
                           data_field(mesh, data));
  const auto report = solve(problem, c.tol);
  std::ofstream dump(job.out / (c.name + "_solution.txt"));
  write_field_dump(dump, report.solution);
  json j = {{"name", c.name},
            {"h", h},
            {"iterations", report.iterations},
            {"energy", report.energy},
            {"final_projected_gradient_norm", report.final_projected_gradient_norm},
            {"epsilon_schedule", report.epsilon_schedule},
            {"converged", report.converged},
            {"max_principle_violation", max_principle_violation(problem, report.solution)}};
  write_file(job.out / (c.name + "_solve.json"), j.dump(2));
  return check(job, report.converged ? "converged" : "not_converged");
}

int cmd_capacity(const Globals& g) {
  Job job = load(g);
  const auto& c = job.cfg;
  CapacityOptions co;
  co.anchor = c.x0;
  co.tol = c.tol;
  const auto study = refinement_study(Condenser{c.obstacle, c.domain, c.p, c.metric}, c.spacings, co);
  std::ofstream csv(job.out / (c.name + "_capacity.csv"));
  write_capacity_csv_header(csv);
  write_capacity_csv(csv, c.name, c.n, c.p, study);
  log(Level::Info, "wrote " + (job.out / (c.name + "_capacity.csv")).string());
  return check(job, to_string(study.trend.verdict));
}

int cmd_wiener(const Globals& g) {
  Job job = load(g);
  const auto& c = job.cfg;
  WienerOptions wo;
  wo.cells = job.raw.value("cells", wo.cells);
  wo.delta = job.raw.value("delta", wo.delta);
  wo.rule = job.raw.value("h_rule", std::string("relative")) == "refining" ? HRule::Refining
                                                                          : HRule::Relative;
  wo.metric = c.metric;
  wo.tol = c.tol;
  if (job.raw.contains("chart")) {
    wo.chart = BoundingBox{parse_point(job.raw["chart"].at("lo"), c.n),
                           parse_point(job.raw["chart"].at("hi"), c.n)};
  }
  if (!job.raw.contains("complement")) throw InvalidInput("wiener: missing 'complement'");
  const Region complement = parse_region(job.raw["complement"], c.n);
  const auto prof = wiener_profile(complement, c.x0, c.p, job.raw.value("t0", 0.0),
                                   job.raw.value("K", 4), wo);
  std::ofstream csv(job.out / (c.name + "_wiener.csv"));
  write_wiener_csv_header(csv);
  write_wiener_csv(csv, prof);
  return check(job, to_string(prof.verdict));
}

int cmd_barrier(const Globals& g) {
  Job job = load(g);
  const auto& c = job.cfg;
  if (c.spacings.empty()) throw InvalidInput("barrier: need a spacing");
  const Point z = job.raw.contains("z") ? parse_point(job.raw["z"], c.n) : c.x0;
  BarrierOptions bo;
  bo.metric = c.metric;
  bo.tol = c.tol;
  const int codim = job.raw.value("codim", c.obstacle.codim());
  const Barrier b = build_barrier(c.x0, z, c.barrier_epsilon, codim, c.p, c.spacings.back(), bo);
  const auto cert = certify(b);
  write_file(job.out / (c.name + "_barrier.json"), certificate_json(cert));
  std::ofstream dump(job.out / (c.name + "_barrier_field.txt"));
  write_field_dump(dump, b.field);
  return check(job, cert.pass ? "pass" : "fail");
}

int cmd_dichotomy(const Globals& g) {
  Job job = load(g);
  const auto v = run_dichotomy(job.cfg);
  write_file(job.out / (job.cfg.name + "_verdict.json"), verdict_json(job.cfg, v));
  std::ofstream csv(job.out / (job.cfg.name + "_dichotomy.csv"));
  write_dichotomy_csv(csv, job.cfg, v);
  return check(job, to_string(v.kind));
}

int cmd_removability(const Globals& g) {
  Job job = load(g);
  const auto rec = run_removability(job.cfg, data_spec(job.raw, "f"), data_spec(job.raw, "g"));
  std::ofstream csv(job.out / (job.cfg.name + "_removability.csv"));
  csv << "name,h,sup_difference,verdict\n";
  for (std::size_t i = 0; i < rec.h.size(); ++i) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%s\n", job.cfg.name.c_str(), rec.h[i],
                  rec.sup_difference[i], to_string(rec.trend.verdict));
    csv << buf;
  }
  return check(job, to_string(rec.trend.verdict));
}

int cmd_invariance(const Globals& g) {
  Job job = load(g);
  auto metric = job.cfg.metric;
  if (!metric) throw InvalidInput("invariance: config needs a metric");
  const auto rec = run_operator_invariance(job.cfg, metric);
  json j = {{"euclidean", json::parse(verdict_json(job.cfg, rec.euclidean))},
            {"metric", json::parse(verdict_json(job.cfg, rec.metric))},
            {"comparable", rec.comparable},
            {"agree", rec.agree}};
  write_file(job.out / (job.cfg.name + "_invariance.json"), j.dump(2));
  if (job.cfg.expect) return check(job, to_string(rec.metric.kind)) | (rec.agree ? 0 : 1);
  return rec.agree ? 0 : 1;
}

int cmd_cone(const Globals& g) {
  Job job = load(g);
  const auto v = run_cone(job.cfg);
  write_file(job.out / (job.cfg.name + "_verdict.json"), verdict_json(job.cfg, v));
  return check(job, to_string(v.kind));
}

int cmd_pgtn(const Globals& g) {
  Job job = load(g);
  PGreaterNOptions o;
  o.K = job.raw.value("K", o.K);
  o.t0 = job.raw.value("t0", o.t0);
  o.cells = job.raw.value("cells", o.cells);
  o.extrapolate = job.raw.value("extrapolate", o.extrapolate);
  o.tol = job.cfg.tol;
  const auto rec = run_p_greater_n(job.cfg.n, job.cfg.p, o);
  std::ofstream csv(job.out / (job.cfg.name + "_wiener.csv"));
  write_wiener_csv_header(csv);
  write_wiener_csv(csv, rec.profile);
  json j = {{"target", rec.target},
            {"spread", rec.spread},
            {"max_relative_error", rec.max_relative_error},
            {"extrapolated", rec.extrapolated},
            {"pass", rec.pass}};
  write_file(job.out / (job.cfg.name + "_pgtn.json"), j.dump(2));
  return check(job, rec.pass ? "pass" : "fail");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-Laplacian boundary regularity experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--deterministic", g.deterministic, "run every solve on the calling thread");
  app.add_option("--h-list", g.h_list, "comma separated spacings, e.g. 1/32,1/64,1/128");
  app.add_option("--log-level", g.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  int status = 0;
  auto bind = [&](const char* name, const char* help, int (*fn)(const Globals&)) {
    app.add_subcommand(name, help)->callback([&g, &status, fn] { status = fn(g); });
  };
  bind("solve", "solve one Dirichlet problem and dump the field", cmd_solve);
  bind("capacity", "capacity refinement study", cmd_capacity);
  bind("wiener", "Wiener integrand profile", cmd_wiener);
  bind("barrier", "build and certify a barrier", cmd_barrier);
  bind("dichotomy", "regularity dichotomy for a codimension-c obstacle", cmd_dichotomy);
  bind("removability", "influence of obstacle data at a distance", cmd_removability);
  bind("invariance", "dichotomy under Euclidean and metric operators", cmd_invariance);
  bind("cone", "exterior cone condition at a cone vertex", cmd_cone);
  bind("pgt-n", "point Wiener profile for p > n", cmd_pgtn);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const InvalidInput& e) {
    log(Level::Error, e.what());
    return 2;
  }
  return status;
}
