#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "plab/flux.hpp"
#include "plab/mesh.hpp"

namespace plab {

/// Discrete Sobolev-Dirichlet problem: find u minimising the p-energy over P1
/// fields equal to boundary_data on every OuterBoundary and Obstacle node.
struct DirichletProblem {
  std::shared_ptr<const GridMesh> mesh;
  FluxField flux;
  ScalarField boundary_data;

  DirichletProblem(std::shared_ptr<const GridMesh> mesh, FluxField flux, ScalarField data);

  bool constrained(int node) const {
    const auto c = mesh->node_class(node);
    return c == NodeClass::OuterBoundary || c == NodeClass::Obstacle;
  }
};

struct SolveOptions {
  double tol = 1e-10;
  int max_newton = 200;        // per continuation stage
  int max_halvings = 60;
  double eps_initial = 1.0;    // in units of the gradient scale
  double eps_final = 1e-8;     // in units of the gradient scale
  double eps_factor = 10.0;
  bool p_continuation = true;
  /// Free-node values to start from instead of the p = 2 solve.
  std::optional<ScalarField> initial_guess;
};

struct SolveReport {
  ScalarField solution;
  int iterations = 0;
  double final_projected_gradient_norm = 0.0;
  /// Unregularised discrete energy sum_T vol_T <A(grad u), grad u> / p.
  double energy = 0.0;
  std::vector<double> epsilon_schedule;
  bool converged = false;
};

SolveReport solve(const DirichletProblem& problem, double tol = 1e-10);
/// Called after every solve, serialised under a lock. Returns the previous
/// observer; pass an empty function to clear.
using SolveObserver = std::function<void(const DirichletProblem&, const SolveReport&)>;
SolveObserver set_solve_observer(SolveObserver obs);
SolveReport solve(const DirichletProblem& problem, const SolveOptions& options);

/// Unregularised discrete energy of a field.
double discrete_energy(const DirichletProblem& problem, const ScalarField& u);

/// sum_T vol_T <A(x_T, grad u), grad phi>, x_T the barycentre. phi must vanish
/// on constrained nodes.
double weak_residual(const DirichletProblem& problem, const ScalarField& u,
                     const ScalarField& phi);

/// Weak residuals of u against every free-node hat function, indexed by node
/// (zero on non-free nodes).
Eigen::VectorXd hat_residuals(const DirichletProblem& problem, const ScalarField& u);

struct SupersolutionCheck {
  double margin = 0.0;  // min over free-node hats of the weak residual
  double scale = 0.0;   // betaEll (max |grad u|)^{p-1} h^{n-1}
  bool certified = false;
};

SupersolutionCheck supersolution_margin(const DirichletProblem& problem, const ScalarField& u,
                                        double tol = 1e-6);

/// max over free nodes of (u - v)_+; requires u <= v on constrained nodes.
double comparison_check(const DirichletProblem& problem, const ScalarField& u,
                        const ScalarField& v);

/// Largest excursion of u outside [min data, max data] over free nodes.
double max_principle_violation(const DirichletProblem& problem, const ScalarField& u);

/// max |grad u| over active simplices.
double max_gradient_norm(const GridMesh& mesh, const ScalarField& u);

}  // namespace plab
