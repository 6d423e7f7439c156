#include <cmath>
#include <sstream>

#include "plab/experiments.hpp"
#include "plab/wiener.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace plab;

TEST_SUITE("wiener") {
  TEST_CASE("full ball complement gives eta close to 1") {
    const Point x0 = pt({0, 0});
    for (double p : {2.0, 3.0}) {
      const auto s = wiener_integrand(Region::ball(x0, 2.0), x0, 0.25, p, 0.25 / 32);
      CHECK_FALSE(s.unresolved);
      CHECK(s.denominator == doctest::Approx(condenser_oracle(0.25, 0.5, 2, p)));
      CHECK(s.eta == doctest::Approx(1.0).epsilon(0.05));
    }
  }

  TEST_CASE("point complement for p > n matches the displayed ratio") {
    const double target = 1.0 - std::pow(2.0, -0.5);
    CHECK(point_eta_p_greater_n(2, 3) == doctest::Approx(target).epsilon(1e-15));
    CHECK(oracle::displayed_point_eta(2, 3.0, 0.1) == doctest::Approx(target).epsilon(1e-12));
    CHECK(oracle::displayed_point_eta(2, 3.0, 0.7) == doctest::Approx(target).epsilon(1e-12));
    CHECK(oracle::displayed_point_eta(3, 5.0, 0.3) == doctest::Approx(point_eta_p_greater_n(3, 5)).epsilon(1e-12));

    const Point x0 = pt({0, 0});
    const auto s = wiener_integrand(Region::point(x0), x0, 0.25, 3.0, 0.25 / 16);
    CHECK(s.eta == doctest::Approx(target).epsilon(0.10));
  }

  TEST_CASE("relative rule keeps eta constant in t, refining rule decays for p = n") {
    const Point x0 = pt({0, 0});
    WienerOptions rel;
    rel.cells = 8;
    const auto a = wiener_profile(Region::point(x0), x0, 2.0, 0.25, 4, rel);
    for (const auto& s : a.scales) CHECK(s.eta == doctest::Approx(a.scales[0].eta).epsilon(1e-8));

    WienerOptions ref = rel;
    ref.rule = HRule::Refining;
    const auto b = wiener_profile(Region::point(x0), x0, 2.0, 0.25, 4, ref);
    for (std::size_t k = 1; k < b.scales.size(); ++k) {
      CHECK(b.scales[k].h == doctest::Approx(0.5 * b.scales[k - 1].h / 2.0));
      CHECK(b.scales[k].eta < b.scales[k - 1].eta);
      // fattened-point oracle: (log 2 / log(2t / (h/2)))
      const double fat = std::log(2.0) / std::log(2.0 * b.scales[k].t / (0.5 * b.scales[k].h));
      CHECK(b.scales[k].eta == doctest::Approx(fat).epsilon(0.35));
    }
    CHECK(b.verdict == WienerVerdict::IrregularEvidence);
    CHECK(b.decay_ratio < 0.9);
  }

  TEST_CASE("exterior of a smooth ball is regular evidence") {
    const Point x0 = pt({0, 0});
    const Region outside = Region::ball(pt({-1, 0}), 1.0);  // x0 on its boundary
    const auto prof = wiener_profile(outside, x0, 2.0, 0.25, 5);
    CHECK(prof.verdict == WienerVerdict::RegularEvidence);
    for (const auto& s : prof.scales) {
      CHECK(s.eta >= 0.05);
      CHECK(s.eta <= 1.0 + 1e-6);
    }
  }

  TEST_CASE("p > n point is regular evidence with constant eta") {
    const Point x0 = pt({0, 0});
    const auto prof = wiener_profile(Region::point(x0), x0, 3.0, 0.25, 4);
    CHECK(prof.verdict == WienerVerdict::RegularEvidence);
    for (const auto& s : prof.scales) CHECK(s.eta == doctest::Approx(prof.scales[0].eta).epsilon(1e-6));
  }

  TEST_CASE("partial sums are nondecreasing") {
    const Point x0 = pt({0, 0});
    const auto prof = wiener_profile(Region::ball(pt({-1, 0}), 1.0), x0, 2.0, 0.25, 4);
    REQUIRE(prof.partial_sums.size() == prof.scales.size());
    for (std::size_t k = 1; k < prof.partial_sums.size(); ++k) {
      CHECK(prof.partial_sums[k] >= prof.partial_sums[k - 1]);
    }
    CHECK(prof.partial_sums[0] == doctest::Approx(std::log(2.0) * prof.scales[0].eta));
  }

  TEST_CASE("monotone in the complement") {
    const Point x0 = pt({0, 0});
    const Region small = Region::ball(pt({-1, 0}), 1.0);
    const Region large = Region::unite({small, Region::box(pt({-2, -2}), pt({0, 0}))}, 2);
    for (double t : {0.25, 0.125}) {
      const double a = wiener_integrand(small, x0, t, 2.0, t / 16).eta;
      const double b = wiener_integrand(large, x0, t, 2.0, t / 16).eta;
      CHECK(b >= a - 1e-8);
    }
  }

  TEST_CASE("verdicts do not flip under doubled resolution") {
    const Point x0 = pt({0, 0});
    WienerOptions fine;
    fine.cells = 32;
    CHECK(wiener_profile(Region::ball(pt({-1, 0}), 1.0), x0, 2.0, 0.25, 4, fine).verdict ==
          WienerVerdict::RegularEvidence);
    CHECK(wiener_profile(Region::point(x0), x0, 3.0, 0.25, 4, fine).verdict ==
          WienerVerdict::RegularEvidence);
  }

  TEST_CASE("unresolved and clipped scales") {
    const Point x0 = pt({0, 0});
    const auto s = wiener_integrand(Region::point(pt({0.01, 0.013})), x0, 0.25, 2.0, 0.25 / 8);
    CHECK(s.unresolved);
    CHECK(s.eta == 0.0);

    WienerOptions opt;
    opt.chart = BoundingBox{pt({-0.5, -0.5}), pt({0.5, 0.5})};
    const auto prof = wiener_profile(Region::point(x0), x0, 3.0, 0.5, 4, opt);
    CHECK(prof.scales[0].clipped);
    CHECK(prof.partial_sums[0] == 0.0);
    CHECK_FALSE(prof.scales[1].clipped);
  }

  TEST_CASE("input validation") {
    const Point x0 = pt({0, 0});
    CHECK_THROWS_AS(wiener_integrand(Region::point(x0), x0, 0.25, 2.0, 0.25), InvalidInput);
    CHECK_THROWS_AS(wiener_integrand(Region::point(x0), x0, -1.0, 2.0, 0.01), InvalidInput);
    CHECK_THROWS_AS(wiener_profile(Region::point(x0), x0, 2.0, 0.25, 2), InvalidInput);
    CHECK_THROWS_AS(wiener_profile(Region::point(x0), x0, 2.0, 0.0, 4), InvalidInput);
  }

  TEST_CASE("csv columns") {
    const Point x0 = pt({0, 0});
    const auto prof = wiener_profile(Region::point(x0), x0, 3.0, 0.25, 3);
    std::ostringstream os;
    write_wiener_csv_header(os);
    write_wiener_csv(os, prof);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x0,p,k,t_k,eta_k,partial_sum,verdict");
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(line.rfind("0;0,3,", 0) == 0);
      ++rows;
    }
    CHECK(rows == 4);
  }
}
