#include <cmath>
#include <numbers>
#include <sstream>

#include "plab/config.hpp"
#include "plab/experiments.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace plab;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "name": "t", "n": 2, "p": 2,
    "domain": {"type": "ball", "center": [0, 0], "radius": 1},
    "obstacle": {"type": "point", "at": [0, 0]},
    "spacings": [0.0625, 0.03125, 0.015625]
  })");
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("region tags") {
    const auto ball = parse_region(json::parse(R"({"type": "ball", "center": [0, 0], "radius": 0.5})"), 2);
    CHECK(contains(ball, pt({0.4, 0})));
    CHECK_FALSE(contains(ball, pt({0.6, 0})));

    const auto seg = parse_region(
        json::parse(R"({"type": "codim_disk", "center": [0, 0], "radius": 0.5, "codim": 1})"), 2);
    CHECK(seg.codim() == 1);
    CHECK(distance_to(seg, pt({0.2, 0.3})) == doctest::Approx(0.3));

    const auto p = parse_region(json::parse(R"({"type": "point", "at": [0.25, 0.5]})"), 2);
    CHECK(p.codim() == 2);
    CHECK(distance_to(p, pt({0.25, 0})) == doctest::Approx(0.5));

    const auto cone = parse_region(json::parse(R"({"type": "cone", "vertex": [0, 0], "axis": [0, -1],
                                                   "half_angle": 0.5235987755982988, "height": 0.5})"), 2);
    CHECK(contains(cone, pt({0, -0.25})));
    CHECK_FALSE(contains(cone, pt({0, 0.25})));

    const auto box = parse_region(json::parse(R"({"type": "box", "lo": [-1, -1], "hi": [1, 0]})"), 2);
    const auto comp = parse_region(json::parse(R"({"type": "complement", "of": {"type": "box", "lo": [-1, -1], "hi": [1, 0]}})"), 2);
    CHECK(contains(box, pt({0, -0.5})));
    CHECK_FALSE(contains(comp, pt({0, -0.5})));
    CHECK(contains(comp, pt({0, 0.5})));

    const auto uni = parse_region(json::parse(R"({"type": "union", "parts": [
        {"type": "point", "at": [0, 0]}, {"type": "ball", "center": [2, 0], "radius": 0.1}]})"), 2);
    CHECK(contains(uni, pt({2, 0.05})));
    const auto inter = parse_region(json::parse(R"({"type": "intersection", "parts": [
        {"type": "ball", "center": [0, 0], "radius": 1}, {"type": "box", "lo": [0, 0], "hi": [2, 2]}]})"), 2);
    CHECK(contains(inter, pt({0.5, 0.5})));
    CHECK_FALSE(contains(inter, pt({-0.5, 0.5})));

    const auto placed = parse_region(json::parse(R"({"type": "placed", "rotation": [[0, -1], [1, 0]],
        "offset": [1, 0], "region": {"type": "codim_disk", "center": [0, 0], "radius": 0.5, "codim": 1}})"), 2);
    CHECK(distance_to(placed, pt({1, 0.4})) == doctest::Approx(0.0).epsilon(1e-12));

    const auto empty = parse_region(json::parse(R"({"type": "empty"})"), 2);
    CHECK_FALSE(contains(empty, pt({0, 0})));

    CHECK_THROWS_AS(parse_region(json::parse(R"({"type": "torus"})"), 2), InvalidInput);
    CHECK_THROWS_AS(parse_region(json::parse(R"({"type": "ball", "center": [0, 0, 0], "radius": 1})"), 2),
                    InvalidInput);
  }

  TEST_CASE("metrics") {
    CHECK(parse_metric(json(), 2) == nullptr);
    CHECK(parse_metric(json::parse(R"({"type": "identity"})"), 2) == nullptr);
    const auto g = parse_metric(json::parse(R"({"type": "diagonal", "entries": ["1+x1^2/2", "1+x2^2/2"]})"), 2);
    REQUIRE(g);
    CHECK(g->tensor(pt({1, 0}))(0, 0) == doctest::Approx(1.5));
    CHECK(g->tensor(pt({1, 0}))(1, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(parse_metric(json::parse(R"({"type": "diagonal", "entries": ["1"]})"), 2), InvalidInput);
    CHECK_THROWS_AS(parse_metric(json::parse(R"({"type": "hyperbolic"})"), 2), InvalidInput);
  }

  TEST_CASE("config validation") {
    const auto ok = parse_config(base_config());
    CHECK(ok.n == 2);
    CHECK(ok.spacings.size() == 3);
    CHECK(ok.obstacle.codim() == 2);
    CHECK_FALSE(ok.expect.has_value());

    auto bad_p = base_config();
    bad_p["p"] = 1.0;
    CHECK_THROWS_AS(parse_config(bad_p), InvalidInput);
    auto bad_h = base_config();
    bad_h["spacings"] = {0.03125, 0.0625};
    CHECK_THROWS_AS(parse_config(bad_h), InvalidInput);
    auto neg_h = base_config();
    neg_h["spacings"] = {0.0625, -0.1};
    CHECK_THROWS_AS(parse_config(neg_h), InvalidInput);
    auto no_n = base_config();
    no_n.erase("n");
    CHECK_THROWS_AS(parse_config(no_n), InvalidInput);
    auto bad_x0 = base_config();
    bad_x0["x0"] = {0, 0, 0};
    CHECK_THROWS_AS(parse_config(bad_x0), InvalidInput);
    auto wrong_type = base_config();
    wrong_type["p"] = "two";
    CHECK_THROWS_AS(parse_config(wrong_type), InvalidInput);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), InvalidInput);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("point eta for p > n") {
    CHECK(point_eta_p_greater_n(2, 3) == doctest::Approx(0.29289321881345254).epsilon(1e-15));
    for (auto [n, p] : {std::pair{2, 4.0}, std::pair{3, 4.0}, std::pair{3, 6.0}}) {
      CHECK(point_eta_p_greater_n(n, p) == doctest::Approx(oracle::displayed_point_eta(n, p, 0.3)).epsilon(1e-12));
    }
  }

  TEST_CASE("p > n study at small size") {
    PGreaterNOptions opt;
    opt.K = 3;
    const auto r = run_p_greater_n(2, 3.0, opt);
    CHECK(r.target == doctest::Approx(point_eta_p_greater_n(2, 3)));
    CHECK(r.profile.scales.size() == 4);
    CHECK(r.spread <= 0.1);
    CHECK(r.max_relative_error <= 0.1);
    CHECK(r.pass);
  }

  TEST_CASE("removability") {
    const auto cfg = parse_config(base_config());
    const DataSpec zero{Expression::parse("0"), Expression::parse("0")};
    const auto same = run_removability(cfg, zero, zero);
    REQUIRE(same.h.size() == 3);
    for (double s : same.sup_difference) CHECK(s == 0.0);

    const DataSpec bump{Expression::parse("0"), Expression::parse("1")};
    const auto decay = run_removability(cfg, bump, zero);
    for (std::size_t i = 1; i < decay.sup_difference.size(); ++i) {
      CHECK(decay.sup_difference[i] < decay.sup_difference[i - 1]);
    }
    // u_f - u_g is the capacity potential of the fattened point; at distance
    // 0.3 the radial oracle gives log(1/0.3) / log(1/r) with r ~ h/2
    for (std::size_t i = 0; i < decay.h.size(); ++i) {
      const double radial = std::log(1.0 / 0.3) / std::log(2.0 / decay.h[i]);
      CHECK(decay.sup_difference[i] == doctest::Approx(radial).epsilon(0.35));
    }

    const DataSpec other{Expression::parse("x1"), Expression::parse("0")};
    CHECK_THROWS_AS(run_removability(cfg, other, zero), InvalidInput);

    auto seg = base_config();
    seg["obstacle"] = json::parse(R"({"type": "codim_disk", "center": [0, 0], "radius": 0.5, "codim": 1})");
    CHECK_THROWS_AS(run_removability(parse_config(seg), zero, zero), InvalidInput);
  }

  TEST_CASE("cone requires codim < p") {
    json j = json::parse(R"({
      "n": 3, "p": 1.5,
      "obstacle": {"type": "cone", "vertex": [0, 0, 0], "axis": [1, 0, 0], "half_angle": 0.5,
                   "height": 0.5, "codim": 2},
      "spacings": [0.25, 0.125, 0.0625]
    })");
    CHECK_THROWS_AS(run_cone(parse_config(j)), InvalidInput);
    auto notcone = base_config();
    CHECK_THROWS_AS(run_cone(parse_config(notcone)), InvalidInput);
  }

  TEST_CASE("dichotomy needs three spacings") {
    auto j = base_config();
    j["spacings"] = {0.0625, 0.03125};
    CHECK_THROWS_AS(run_dichotomy(parse_config(j)), InvalidInput);
  }

  TEST_CASE("point obstacle is irregular, segment regular") {
    auto pj = base_config();
    pj["spacings"] = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    const auto point = run_dichotomy(parse_config(pj));
    CHECK(point.kind == VerdictKind::Irregular);
    CHECK(point.capacity_vanishing);

    auto sj = base_config();
    sj["obstacle"] = json::parse(R"({"type": "codim_disk", "center": [0, 0], "radius": 0.5, "codim": 1})");
    sj["spacings"] = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    const auto seg = run_dichotomy(parse_config(sj));
    CHECK(seg.kind == VerdictKind::Regular);
    CHECK(seg.rows.size() == 3);

    std::ostringstream os;
    write_dichotomy_csv(os, parse_config(sj), seg);
    CHECK(os.str().find('\n') != std::string::npos);
    const auto v = json::parse(verdict_json(parse_config(sj), seg));
    CHECK(v["verdict"] == "Regular");
  }

  TEST_CASE("parallel rows match the serial ones") {
    auto j = base_config();
    auto serial = parse_config(j);
    auto threaded = serial;
    threaded.parallel = true;
    const auto a = run_dichotomy(serial), b = run_dichotomy(threaded);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].capacity == b.rows[i].capacity);
      CHECK(a.rows[i].influence == b.rows[i].influence);
      CHECK(a.rows[i].attainment_gap == b.rows[i].attainment_gap);
    }
    CHECK(a.kind == b.kind);
  }

  TEST_CASE("operator invariance with g = I") {
    auto j = base_config();
    const auto rec = run_operator_invariance(
        parse_config(j), std::make_shared<const MetricField>(MetricField::identity(2)));
    CHECK(rec.agree);
    CHECK(rec.euclidean.kind == rec.metric.kind);

    const auto bad = std::make_shared<const MetricField>(
        MetricField::diagonal({Expression::parse("1"), Expression::parse("1000")}));
    CHECK_THROWS_AS(run_operator_invariance(parse_config(j), bad), InvalidInput);
  }
}
