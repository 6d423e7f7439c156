#include <cmath>

#include "plab/capacity.hpp"
#include "plab/solver.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"
#include "support/testing.hpp"

using namespace plab;

namespace {

std::shared_ptr<const GridMesh> box_mesh(double h) {
  const Point lo = pt({-1, -1}), hi = pt({1, 1});
  return std::make_shared<const GridMesh>(
      classify_nodes(build_mesh({lo, hi}, h), Region::box(lo, hi), Region::empty(2)));
}

// Annulus r = 0.25 < |x| < 1 with data 1 inside and 0 outside.
DirichletProblem annulus(double p, double h, double outer_value = 0.0) {
  auto mesh = domain_mesh(Region::ball(pt({0, 0}), 1.0), Region::ball(pt({0, 0}), 0.25), h, pt({0, 0}),
                          std::nullopt);
  ScalarField f(mesh);
  for (int v = 0; v < mesh->node_count(); ++v) {
    f[v] = mesh->node_class(v) == NodeClass::Obstacle ? 1.0 : outer_value;
  }
  return DirichletProblem(mesh, FluxField::euclidean(p, 2), f);
}

double value_at(const ScalarField& u, const Point& x) {
  const GridMesh& m = u.mesh();
  for (int v = 0; v < m.node_count(); ++v) {
    if ((m.node_point(v) - x).norm() < 1e-12) return u[v];
  }
  FAIL("no node at the requested point");
  return 0.0;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("affine data is reproduced for every p") {
    auto mesh = box_mesh(1.0 / 8);
    const auto f = ScalarField::sample(mesh, [](const Point& x) { return x[0]; });
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const auto r = solve(DirichletProblem(mesh, FluxField::euclidean(p, 2), f), 1e-11);
      CHECK(r.converged);
      CHECK((r.solution.values() - f.values()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("constant data gives the constant with zero energy") {
    auto mesh = box_mesh(1.0 / 8);
    const auto r = solve(DirichletProblem(mesh, FluxField::euclidean(3, 2), ScalarField(mesh, 0.7)));
    CHECK(r.converged);
    CHECK(r.energy == 0.0);
    for (int v = 0; v < mesh->node_count(); ++v) {
      if (mesh->node_class(v) != NodeClass::External) CHECK(r.solution[v] == 0.7);
    }
  }

  TEST_CASE("annulus mid-radius values against the radial oracle") {
    // p = 2 within 3%, p = 4 within 5% at h = 1/64
    for (auto [p, tol] : {std::pair{2.0, 0.03}, std::pair{4.0, 0.05}}) {
      const auto problem = annulus(p, 1.0 / 64);
      const auto r = solve(problem);
      REQUIRE(r.converged);
      const double exact = oracle::condenser_profile(0.5, 0.25, 1.0, 2, p);
      if (p == 2.0) CHECK(exact == doctest::Approx(0.5).epsilon(1e-12));
      for (const Point& x : {pt({0.5, 0}), pt({0, -0.5})}) {
        CHECK(std::abs(value_at(r.solution, x) - exact) <= tol * exact);
      }
    }
  }

  TEST_CASE("radial oracle profile has the closed-form exponent") {
    // (s^e - R^e) / (r^e - R^e), e = (p - n)/(p - 1)
    const double p = 4.0, e = (p - 2.0) / (p - 1.0);
    for (double s : {0.3, 0.5, 0.8}) {
      const double closed = (std::pow(s, e) - 1.0) / (std::pow(0.25, e) - 1.0);
      CHECK(oracle::condenser_profile(s, 0.25, 1.0, 2, p) == doctest::Approx(closed).epsilon(1e-12));
    }
  }

  TEST_CASE("input validation") {
    auto mesh = box_mesh(0.5);
    const DirichletProblem pr(mesh, FluxField::euclidean(2, 2), ScalarField(mesh));
    CHECK_THROWS_AS(solve(pr, 1e-13), InvalidInput);
    CHECK_THROWS_AS(FluxField::euclidean(1.0, 2), InvalidInput);
  }

  TEST_CASE("iteration budget exhaustion is reported") {
    SolveOptions opt;
    opt.max_newton = 0;
    const auto r = solve(annulus(4.0, 1.0 / 16), opt);
    CHECK_FALSE(r.converged);
  }

  TEST_CASE("constraints are exact and the maximum principle holds") {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const auto problem = annulus(p, 1.0 / 32);
      const auto r = solve(problem);
      CHECK(r.converged);
      CHECK(r.final_projected_gradient_norm <= 1e-10 * (1.0 + std::abs(r.energy)));
      for (int v = 0; v < problem.mesh->node_count(); ++v) {
        if (problem.constrained(v)) CHECK(r.solution[v] == problem.boundary_data[v]);
      }
      CHECK(max_principle_violation(problem, r.solution) <= 1e-8);
    }
  }

  TEST_CASE("weak residual") {
    const auto problem = annulus(3.0, 1.0 / 32);
    const auto r = solve(problem);
    const GridMesh& m = *problem.mesh;
    ScalarField zero(problem.mesh);
    CHECK(weak_residual(problem, r.solution, zero) == 0.0);

    const double scale = problem.flux.beta_ell() *
                         std::pow(max_gradient_norm(m, r.solution), problem.flux.p() - 1.0) * m.spacing();
    int checked = 0;
    for (int v = 0; v < m.node_count() && checked < 50; v += 7) {
      if (m.node_class(v) != NodeClass::Free) continue;
      ScalarField hat(problem.mesh);
      hat[v] = 1.0;
      CHECK(std::abs(weak_residual(problem, r.solution, hat)) <= 1e-8 * scale);
      ++checked;
    }
    CHECK(checked > 0);

    ScalarField bad(problem.mesh);
    for (int v = 0; v < m.node_count(); ++v) {
      if (problem.constrained(v)) {
        bad[v] = 1.0;
        break;
      }
    }
    CHECK_THROWS_AS(weak_residual(problem, r.solution, bad), InvalidInput);
  }

  TEST_CASE("affine fields have zero weak residual away from the boundary") {
    auto mesh = box_mesh(1.0 / 8);
    const auto u = ScalarField::sample(mesh, [](const Point& x) { return 2 * x[0] - x[1]; });
    const DirichletProblem pr(mesh, FluxField::euclidean(3, 2), u);
    std::mt19937_64 rng(4);
    ScalarField phi(mesh);
    for (int v = 0; v < mesh->node_count(); ++v) {
      if (!pr.constrained(v)) phi[v] = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    CHECK(std::abs(weak_residual(pr, u, phi)) <= 1e-13);
  }

  TEST_CASE("supersolution sign of -|x - x0|^2 and |x|^2") {
    auto mesh = box_mesh(1.0 / 16);
    const Point x0 = pt({0.03, -0.02});
    const auto down = ScalarField::sample(mesh, [&](const Point& x) { return -(x - x0).squaredNorm(); });
    const auto up = ScalarField::sample(mesh, [](const Point& x) { return x.squaredNorm(); });
    const DirichletProblem pd(mesh, FluxField::euclidean(2, 2), down);
    const DirichletProblem pu(mesh, FluxField::euclidean(2, 2), up);
    const auto sd = supersolution_margin(pd, down);
    const auto su = supersolution_margin(pu, up);
    CHECK(sd.margin > 0.0);
    CHECK(sd.certified);
    CHECK(su.margin < 0.0);
    CHECK_FALSE(su.certified);
  }

  TEST_CASE("exact solutions are discrete supersolutions up to tolerance") {
    const auto problem = annulus(2.0, 1.0 / 32);
    const auto r = solve(problem);
    const auto s = supersolution_margin(problem, r.solution);
    CHECK(s.certified);
    CHECK(std::abs(s.margin) <= 1e-6 * s.scale);
  }

  TEST_CASE("comparison") {
    const auto problem = annulus(2.0, 1.0 / 32);
    const auto u = solve(problem).solution;
    CHECK(comparison_check(problem, u, u) == 0.0);
    ScalarField bigger = u;
    bigger.values().array() += 1.0;
    CHECK(comparison_check(problem, u, bigger) == 0.0);
    CHECK_THROWS_AS(comparison_check(problem, bigger, u), InvalidInput);
    for (double p : {2.0, 3.0}) {
      const auto c = props::comparison(p);
      INFO(c.name, " ", c.value);
      CHECK(c.pass);
    }
  }

  TEST_CASE("property: homogeneity of the solution map") {
    for (double p : {1.5, 3.0}) {
      for (double lambda : {-2.0, 0.5, 3.0}) {
        const auto c = props::solve_homogeneity(p, lambda);
        INFO(c.name, " ", c.value);
        CHECK(c.pass);
      }
    }
  }

  TEST_CASE("property: homothety covariance") {
    for (double p : {1.5, 2.0, 3.0}) {
      const auto c = props::homothety_covariance(p);
      INFO(c.name, " ", c.value);
      CHECK(c.pass);
    }
  }

  TEST_CASE("metric solves are consistent with the Euclidean one under g = I") {
    const auto e = annulus(3.0, 1.0 / 16);
    auto id = std::make_shared<const MetricField>(MetricField::identity(2));
    const DirichletProblem g(e.mesh, FluxField::metric(3.0, id, *e.mesh), e.boundary_data);
    const auto ue = solve(e).solution, ug = solve(g).solution;
    CHECK((ue.values() - ug.values()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}
