#include "plab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace plab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
constexpr int kMaxDim = 6;

// Regularised density rho = sg (q + eps^2)^{p/2} / p with q = v.Mv, its
// v-gradient s1 Mv and v-Hessian s1 M + s2 (Mv)(Mv)^T.
struct DensityTerms {
  double rho = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

DensityTerms density_terms(double q, double sg, double p, double eps) {
  DensityTerms t;
  const double base = q + eps * eps;
  if (p == 2.0) {
    t.rho = 0.5 * sg * base;
    t.s1 = sg;
    return t;
  }
  if (base <= 0.0) return t;  // exact flux vanishes at v = 0
  const double pw = std::pow(base, 0.5 * (p - 2.0));
  t.s1 = sg * pw;
  t.rho = t.s1 * base / p;
  t.s2 = (p - 2.0) * t.s1 / base;
  return t;
}

class Assembler {
 public:
  explicit Assembler(const DirichletProblem& pb)
      : mesh_(*pb.mesh), flux_(pb.flux), n_(mesh_.dim()), h_(mesh_.spacing()) {
    const int nn = mesh_.node_count();
    dof_.assign(nn, -1);
    for (int v = 0; v < nn; ++v) {
      if (mesh_.node_class(v) == NodeClass::Free) {
        dof_[v] = static_cast<int>(nodes_.size());
        nodes_.push_back(v);
      }
    }
    for (std::int64_t s = 0; s < mesh_.simplex_count(); ++s) {
      if (mesh_.simplex_active(s)) active_.push_back(s);
    }
    if (flux_.kind() == FluxKind::MetricPLaplace) {
      const int stride = n_ * n_ + 1;
      metric_.resize(active_.size() * stride);
      for (std::size_t k = 0; k < active_.size(); ++k) {
        const auto m = flux_.metric_field()->sample(mesh_.simplex_barycenter(active_[k]));
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) metric_[k * stride + i * n_ + j] = m.inverse(i, j);
        metric_[k * stride + n_ * n_] = m.sqrt_det;
      }
    }
  }

  int free_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& free_nodes() const { return nodes_; }
  int dof(int node) const { return dof_[node]; }
  const std::vector<std::int64_t>& active() const { return active_; }

  // Gradient of u on active simplex k, plus the metric terms.
  void local_gradient(std::size_t k, const Eigen::VectorXd& u, int* verts, const int*& path,
                      double* v) const {
    const std::int64_t sid = active_[k];
    mesh_.simplex_vertices(sid, verts);
    path = mesh_.simplex_path(sid).data();
    for (int j = 0; j < n_; ++j) v[path[j]] = (u[verts[j + 1]] - u[verts[j]]) / h_;
  }

  // q = v.Mv, Mv, sqrt(det g) for simplex k.
  double quadratic(std::size_t k, const double* v, double* mv, double& sg) const {
    if (metric_.empty()) {
      sg = 1.0;
      double q = 0.0;
      for (int i = 0; i < n_; ++i) {
        mv[i] = v[i];
        q += v[i] * v[i];
      }
      return q;
    }
    const double* m = &metric_[k * (n_ * n_ + 1)];
    sg = m[n_ * n_];
    double q = 0.0;
    for (int i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n_; ++j) acc += m[i * n_ + j] * v[j];
      mv[i] = acc;
      q += v[i] * acc;
    }
    return q;
  }

  double energy(const Eigen::VectorXd& u, double p, double eps) const {
    const double vol = mesh_.simplex_volume();
    double e = 0.0;
    int verts[kMaxDim + 1];
    double v[kMaxDim], mv[kMaxDim];
    const int* path = nullptr;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      local_gradient(k, u, verts, path, v);
      double sg;
      const double q = quadratic(k, v, mv, sg);
      e += vol * density_terms(q, sg, p, eps).rho;
    }
    return e;
  }

  // Nodal gradient over all nodes (caller projects onto free dofs).
  double nodal_gradient(const Eigen::VectorXd& u, double p, double eps,
                        Eigen::VectorXd& g) const {
    const double vol = mesh_.simplex_volume();
    g.setZero(u.size());
    double e = 0.0;
    int verts[kMaxDim + 1];
    double v[kMaxDim], mv[kMaxDim];
    const int* path = nullptr;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      local_gradient(k, u, verts, path, v);
      double sg;
      const double q = quadratic(k, v, mv, sg);
      const auto t = density_terms(q, sg, p, eps);
      e += vol * t.rho;
      for (int j = 0; j < n_; ++j) {
        const double c = vol * t.s1 * mv[path[j]] / h_;
        g[verts[j + 1]] += c;
        g[verts[j]] -= c;
      }
    }
    return e;
  }

  double free_gradient(const Eigen::VectorXd& u, double p, double eps,
                       Eigen::VectorXd& gfree) const {
    Eigen::VectorXd g;
    const double e = nodal_gradient(u, p, eps, g);
    gfree.resize(free_count());
    for (int d = 0; d < free_count(); ++d) gfree[d] = g[nodes_[d]];
    return e;
  }

  void build_pattern() {
    if (pattern_built_) return;
    const int nf = free_count();
    const auto& stencil = mesh_.stencil();
    slots_ = static_cast<int>(stencil.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nf) * slots_);
    for (int j = 0; j < nf; ++j) {
      for (int s = 0; s < slots_; ++s) {
        const int a = mesh_.neighbour(nodes_[j], s);
        if (a >= 0 && dof_[a] >= 0) trip.emplace_back(dof_[a], j, 0.0);
      }
    }
    hess_.resize(nf, nf);
    hess_.setFromTriplets(trip.begin(), trip.end());
    hess_.makeCompressed();
    positions_.assign(static_cast<std::size_t>(nf) * slots_, -1);
    const int* outer = hess_.outerIndexPtr();
    const int* inner = hess_.innerIndexPtr();
    for (int j = 0; j < nf; ++j) {
      for (int s = 0; s < slots_; ++s) {
        const int a = mesh_.neighbour(nodes_[j], s);
        if (a < 0 || dof_[a] < 0) continue;
        const int* it = std::lower_bound(inner + outer[j], inner + outer[j + 1], dof_[a]);
        positions_[static_cast<std::size_t>(j) * slots_ + s] = static_cast<int>(it - inner);
      }
    }
    pattern_built_ = true;
  }

  const SpMat& hessian(const Eigen::VectorXd& u, double p, double eps) {
    build_pattern();
    const double vol = mesh_.simplex_volume();
    double* values = hess_.valuePtr();
    std::fill(values, values + hess_.nonZeros(), 0.0);
    int verts[kMaxDim + 1];
    double v[kMaxDim], mv[kMaxDim];
    double hv[kMaxDim * kMaxDim];
    double w[kMaxDim * (kMaxDim + 1)];
    double loc[(kMaxDim + 1) * (kMaxDim + 1)];
    const int* path = nullptr;
    const int nv = n_ + 1;
    const double inv_h = 1.0 / h_;
    for (std::size_t k = 0; k < active_.size(); ++k) {
      local_gradient(k, u, verts, path, v);
      bool any_free = false;
      for (int a = 0; a < nv; ++a) any_free |= dof_[verts[a]] >= 0;
      if (!any_free) continue;
      double sg;
      const double q = quadratic(k, v, mv, sg);
      const auto t = density_terms(q, sg, p, eps);
      const double* m = metric_.empty() ? nullptr : &metric_[k * (n_ * n_ + 1)];
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          hv[i * n_ + j] = t.s1 * (m ? m[i * n_ + j] : (i == j ? 1.0 : 0.0)) + t.s2 * mv[i] * mv[j];
      // W = Hv D, D[path[j], j+1] = 1/h, D[path[j], j] = -1/h
      for (int i = 0; i < n_; ++i) {
        for (int a = 0; a < nv; ++a) {
          double acc = 0.0;
          if (a >= 1) acc += hv[i * n_ + path[a - 1]] * inv_h;
          if (a < n_) acc -= hv[i * n_ + path[a]] * inv_h;
          w[i * nv + a] = acc;
        }
      }
      for (int a = 0; a < nv; ++a) {
        for (int b = 0; b < nv; ++b) {
          double acc = 0.0;
          if (a >= 1) acc += w[path[a - 1] * nv + b] * inv_h;
          if (a < n_) acc -= w[path[a] * nv + b] * inv_h;
          loc[a * nv + b] = vol * acc;
        }
      }
      const int perm = static_cast<int>(active_[k] % mesh_.simplices_per_cell());
      for (int b = 0; b < nv; ++b) {
        const int col = dof_[verts[b]];
        if (col < 0) continue;
        for (int a = 0; a < nv; ++a) {
          if (dof_[verts[a]] < 0) continue;
          const int pos =
              positions_[static_cast<std::size_t>(col) * slots_ + mesh_.pair_slot(perm, a, b)];
          values[pos] += loc[a * nv + b];
        }
      }
    }
    return hess_;
  }

 private:
  const GridMesh& mesh_;
  const FluxField& flux_;
  int n_;
  double h_;
  std::vector<int> dof_;
  std::vector<int> nodes_;
  std::vector<std::int64_t> active_;
  std::vector<double> metric_;
  bool pattern_built_ = false;
  int slots_ = 0;
  SpMat hess_;
  std::vector<int> positions_;
};

class LinearSolver {
 public:
  LinearSolver(int dim, int unknowns)
      : direct_(unknowns <= 40000 || (dim <= 2 && unknowns <= 400000)) {}

  // Solves H x = rhs; false when H is not numerically positive definite or
  // the iteration fails outright.
  bool solve(const SpMat& h, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
    if (direct_) {
      if (!analyzed_) {
        ldlt_.analyzePattern(h);
        analyzed_ = true;
      }
      ldlt_.factorize(h);
      if (ldlt_.info() != Eigen::Success) return false;
      if (!(ldlt_.vectorD().minCoeff() > 0.0)) return false;
      x = ldlt_.solve(rhs);
      return x.allFinite();
    }
    cg_.setTolerance(1e-13);
    cg_.setMaxIterations(std::max(1000, static_cast<int>(std::sqrt(double(rhs.size()))) * 40));
    cg_.compute(h);
    if (cg_.info() != Eigen::Success) return false;
    x = cg_.solve(rhs);
    return x.allFinite();
  }

 private:
  bool direct_;
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>
      cg_;
};

struct StageOutcome {
  bool converged = false;
  double energy = 0.0;
  double gnorm = 0.0;
};

class NewtonDriver {
 public:
  NewtonDriver(Assembler& as, const SolveOptions& opt, int dim)
      : as_(as), opt_(opt), lin_(dim, as.free_count()) {}

  StageOutcome run(Eigen::VectorXd& u, double p, double eps, double stage_tol, int& iterations) {
    const auto& nodes = as_.free_nodes();
    const int nf = as_.free_count();
    Eigen::VectorXd g, d, trial;
    StageOutcome out;
    for (int it = 0; it <= opt_.max_newton; ++it) {
      out.energy = as_.free_gradient(u, p, eps, g);
      out.gnorm = g.norm();
      if (out.gnorm <= stage_tol * (1.0 + std::abs(out.energy))) {
        out.converged = true;
        return out;
      }
      if (it == opt_.max_newton) break;
      const SpMat& h = as_.hessian(u, p, eps);
      bool ok = lin_.solve(h, -g, d);
      if (!ok || !(g.dot(d) < 0.0)) {
        // gradient descent fallback, diagonally scaled
        d.resize(nf);
        for (int k = 0; k < nf; ++k) {
          const double diag = h.coeff(k, k);
          d[k] = -g[k] / (diag > 0.0 ? diag : 1.0);
        }
      }
      const double slope = g.dot(d);
      double t = 1.0;
      bool accepted = false;
      for (int k = 0; k <= opt_.max_halvings; ++k, t *= 0.5) {
        trial = u;
        for (int j = 0; j < nf; ++j) trial[nodes[j]] += t * d[j];
        const double et = as_.energy(trial, p, eps);
        // strict decrease: a step lost below round-off must not pass
        if (std::isfinite(et) && et < out.energy && et <= out.energy + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // Below energy round-off the decrease is invisible; fall back to
        // accepting the longest step that reduces the gradient.
        if (std::abs(slope) > 1e-12 * (1.0 + std::abs(out.energy))) return out;
        Eigen::VectorXd gt;
        t = 1.0;
        for (int k = 0; k < 8 && !accepted; ++k, t *= 0.5) {
          trial = u;
          for (int j = 0; j < nf; ++j) trial[nodes[j]] += t * d[j];
          as_.free_gradient(trial, p, eps, gt);
          accepted = gt.norm() < out.gnorm;
        }
        if (!accepted) return out;
      }
      u.swap(trial);
      ++iterations;
    }
    return out;
  }

 private:
  Assembler& as_;
  const SolveOptions& opt_;
  LinearSolver lin_;
};

}  // namespace

DirichletProblem::DirichletProblem(std::shared_ptr<const GridMesh> mesh_, FluxField flux_,
                                   ScalarField data)
    : mesh(std::move(mesh_)), flux(std::move(flux_)), boundary_data(std::move(data)) {
  if (!mesh) throw InvalidInput("DirichletProblem: missing mesh");
  if (boundary_data.mesh_ptr().get() != mesh.get() &&
      boundary_data.mesh().node_count() != mesh->node_count()) {
    throw InvalidInput("DirichletProblem: data lives on a different mesh");
  }
  if (flux.dim() != mesh->dim()) throw InvalidInput("DirichletProblem: flux dimension mismatch");
  int constrained_nodes = 0;
  for (int v = 0; v < mesh->node_count(); ++v) {
    if (!constrained(v)) continue;
    ++constrained_nodes;
    if (!std::isfinite(boundary_data[v])) {
      throw InvalidInput("DirichletProblem: non-finite data on a constrained node");
    }
  }
  if (constrained_nodes == 0) throw InvalidInput("DirichletProblem: no constrained nodes");
}

SolveReport solve(const DirichletProblem& problem, double tol) {
  SolveOptions opt;
  opt.tol = tol;
  return solve(problem, opt);
}

namespace {

std::mutex observer_mutex;
SolveObserver observer;

SolveReport solve_impl(const DirichletProblem& problem, const SolveOptions& opt) {
  if (!(opt.tol >= 1e-12)) throw InvalidInput("solve: tolerance must be >= 1e-12");
  const double p = problem.flux.p();
  if (!(p > 1.0)) throw InvalidInput("solve: exponent must exceed 1");
  const GridMesh& mesh = *problem.mesh;

  SolveReport report{ScalarField(problem.mesh), 0, 0.0, 0.0, {}, false};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.node_count());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (!problem.constrained(v)) continue;
    u[v] = problem.boundary_data[v];
    lo = std::min(lo, u[v]);
    hi = std::max(hi, u[v]);
  }

  Assembler as(problem);
  if (hi == lo || as.free_count() == 0) {
    // constant data: the comparison principle pins the solution
    for (int node : as.free_nodes()) u[node] = lo;
    report.solution.values() = u;
    report.energy = as.energy(u, p, 0.0);
    report.converged = true;
    return report;
  }

  const double diag = (mesh.hi() - mesh.lo()).norm();
  const double grad_scale = (hi - lo) / diag;
  NewtonDriver newton(as, opt, mesh.dim());
  constexpr double loose = 1e-6;

  bool have_start = false;
  if (opt.initial_guess) {
    for (int node : as.free_nodes()) u[node] = (*opt.initial_guess)[node];
    have_start = true;
  } else {
    for (int node : as.free_nodes()) u[node] = 0.5 * (lo + hi);
  }

  if (p == 2.0) {
    report.epsilon_schedule.push_back(0.0);
    const auto out = newton.run(u, 2.0, 0.0, opt.tol, report.iterations);
    report.converged = out.converged;
    report.final_projected_gradient_norm = out.gnorm;
  } else {
    if (!have_start) newton.run(u, 2.0, 0.0, loose, report.iterations);
    std::vector<double> levels;
    if (opt.p_continuation && std::abs(p - 2.0) > 1.0) {
      const double step = p > 2.0 ? 1.0 : -1.0;
      for (double q = 2.0 + step; (p - q) * step > 0.0; q += step) levels.push_back(q);
    }
    for (double q : levels) {
      for (int k = 0; k < 3; ++k) {
        const double eps = opt.eps_initial * grad_scale * std::pow(opt.eps_factor, -k);
        report.epsilon_schedule.push_back(eps);
        newton.run(u, q, eps, loose, report.iterations);
      }
    }
    const double eps_end = opt.eps_final * grad_scale;
    StageOutcome out;
    for (double eps = opt.eps_initial * grad_scale;; eps /= opt.eps_factor) {
      const bool last = eps <= eps_end * (1.0 + 1e-9);
      if (last) eps = eps_end;
      report.epsilon_schedule.push_back(eps);
      out = newton.run(u, p, eps, last ? opt.tol : loose, report.iterations);
      if (last) break;
    }
    report.converged = out.converged;
    report.final_projected_gradient_norm = out.gnorm;
  }
  report.solution.values() = u;
  report.energy = as.energy(u, p, 0.0);
  report.converged = report.converged &&
                     report.final_projected_gradient_norm <= opt.tol * (1.0 + std::abs(report.energy));
  return report;
}

}  // namespace

SolveObserver set_solve_observer(SolveObserver obs) {
  std::lock_guard lock(observer_mutex);
  std::swap(observer, obs);
  return obs;
}

SolveReport solve(const DirichletProblem& problem, const SolveOptions& opt) {
  SolveReport report = solve_impl(problem, opt);
  std::lock_guard lock(observer_mutex);
  if (observer) observer(problem, report);
  return report;
}

double discrete_energy(const DirichletProblem& problem, const ScalarField& u) {
  Assembler as(problem);
  return as.energy(u.values(), problem.flux.p(), 0.0);
}

Eigen::VectorXd hat_residuals(const DirichletProblem& problem, const ScalarField& u) {
  Assembler as(problem);
  Eigen::VectorXd g;
  as.nodal_gradient(u.values(), problem.flux.p(), 0.0, g);
  for (int v = 0; v < problem.mesh->node_count(); ++v) {
    if (problem.mesh->node_class(v) != NodeClass::Free) g[v] = 0.0;
  }
  return g;
}

double weak_residual(const DirichletProblem& problem, const ScalarField& u,
                     const ScalarField& phi) {
  const GridMesh& mesh = *problem.mesh;
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (problem.constrained(v) && phi[v] != 0.0) {
      throw InvalidInput("weak_residual: test function must vanish on constrained nodes");
    }
  }
  // The nodal gradient of the exact energy is the residual against each hat;
  // a general test function is a combination of free-node hats.
  const Eigen::VectorXd g = hat_residuals(problem, u);
  double r = 0.0;
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::Free) r += g[v] * phi[v];
  }
  return r;
}

double max_gradient_norm(const GridMesh& mesh, const ScalarField& u) {
  double best = 0.0;
  for (std::int64_t s = 0; s < mesh.simplex_count(); ++s) {
    if (!mesh.simplex_active(s)) continue;
    best = std::max(best, p1_gradient(mesh, u, s).norm());
  }
  return best;
}

SupersolutionCheck supersolution_margin(const DirichletProblem& problem, const ScalarField& u,
                                        double tol) {
  const GridMesh& mesh = *problem.mesh;
  const Eigen::VectorXd g = hat_residuals(problem, u);
  SupersolutionCheck c;
  c.margin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.node_count(); ++v) {
    if (mesh.node_class(v) == NodeClass::Free) c.margin = std::min(c.margin, g[v]);
  }
  if (!std::isfinite(c.margin)) c.margin = 0.0;
  const double p = problem.flux.p();
  c.scale = problem.flux.beta_ell() * std::pow(max_gradient_norm(mesh, u), p - 1.0) *
            std::pow(mesh.spacing(), mesh.dim() - 1);
  c.certified = c.margin >= -tol * c.scale;
  return c;
}

double comparison_check(const DirichletProblem& problem, const ScalarField& u,
                        const ScalarField& v) {
  const GridMesh& mesh = *problem.mesh;
  double worst = 0.0;
  for (int k = 0; k < mesh.node_count(); ++k) {
    if (problem.constrained(k)) {
      if (u[k] > v[k]) throw InvalidInput("comparison_check: u > v on a constrained node");
    } else if (mesh.node_class(k) == NodeClass::Free) {
      worst = std::max(worst, u[k] - v[k]);
    }
  }
  return worst;
}

double max_principle_violation(const DirichletProblem& problem, const ScalarField& u) {
  const GridMesh& mesh = *problem.mesh;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < mesh.node_count(); ++k) {
    if (!problem.constrained(k)) continue;
    lo = std::min(lo, problem.boundary_data[k]);
    hi = std::max(hi, problem.boundary_data[k]);
  }
  double worst = 0.0;
  for (int k = 0; k < mesh.node_count(); ++k) {
    if (mesh.node_class(k) != NodeClass::Free) continue;
    worst = std::max({worst, lo - u[k], u[k] - hi});
  }
  return worst;
}

}  // namespace plab
