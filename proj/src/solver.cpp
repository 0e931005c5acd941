#include "rstokes/solver.hpp"

#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace rstokes {

namespace {

double sq_norm(const std::vector<double>& v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Direct solver

struct DirectSolver::Impl {
  Eigen::UmfPackLU<ColMatrix> lu;
  ColMatrix matrix;
  bool analyzed = false;
  Eigen::Index nnz = -1;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const ColMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("linear_solve: matrix must be square");
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  if (!impl_->analyzed || impl_->nnz != impl_->matrix.nonZeros()) {
    impl_->lu.analyzePattern(impl_->matrix);
    impl_->analyzed = true;
    impl_->nnz = impl_->matrix.nonZeros();
  }
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    // Report the column with the smallest pivot in U.
    std::ostringstream msg;
    msg << "singular matrix in sparse LU factorization";
    const Eigen::SparseMatrix<double> U = impl_->lu.matrixU();
    double smallest = std::numeric_limits<double>::infinity();
    Eigen::Index where = -1;
    for (Eigen::Index k = 0; k < U.outerSize(); ++k) {
      double diag = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(U, k); it; ++it) {
        if (it.row() == it.col()) diag = std::abs(it.value());
      }
      if (diag < smallest) {
        smallest = diag;
        where = k;
      }
    }
    if (where >= 0) msg << " (pivot column " << impl_->lu.permutationQ()(where) << ")";
    impl_->analyzed = false;
    throw SolverError(SolverError::Kind::SingularMatrix, msg.str());
  }
}

Vector DirectSolver::solve(const Vector& rhs) const {
  Vector x = impl_->lu.solve(rhs);
  const double bnorm = std::max(rhs.norm(), std::numeric_limits<double>::min());
  Vector res = rhs - impl_->matrix * x;
  last_residual_ = res.norm() / bnorm;
  if (last_residual_ > 1e-10 && std::isfinite(last_residual_)) {
    x += impl_->lu.solve(res);
    res = rhs - impl_->matrix * x;
    last_residual_ = res.norm() / bnorm;
  }
  if (last_residual_ > 1e-10 && std::isfinite(last_residual_)) {
    x += impl_->lu.solve(res);
    res = rhs - impl_->matrix * x;
    last_residual_ = res.norm() / bnorm;
  }
  if (!x.allFinite() || (!(last_residual_ <= 1e-6) && rhs.norm() > 0.0)) {
    std::ostringstream msg;
    msg << "sparse LU solve is inaccurate (relative residual " << last_residual_
        << "); the system is numerically singular";
    throw SolverError(SolverError::Kind::SingularMatrix, msg.str());
  }
  return x;
}

Vector linear_solve(const SparseMatrix& matrix, const Vector& rhs) {
  DirectSolver solver;
  solver.factorize(DirectSolver::ColMatrix(matrix));
  return solver.solve(rhs);
}

// ---------------------------------------------------------------------------
// Nonlinear operator

NonlinearOperator make_power_law_operator(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology,
                                          AssemblyOptions opts) {
  return [&mesh, &spaces, rheology, opts](const Vector& u, Vector& value, SparseMatrix* jac) {
    if (jac) {
      assemble_A(mesh, spaces, rheology, u, value, *jac, opts);
    } else {
      value = assemble_A_residual(mesh, spaces, rheology, u, opts);
    }
  };
}

// ---------------------------------------------------------------------------
// Complementarity

std::vector<double> complementarity_residual(const Vector& lambda, const std::vector<double>& gamma_u,
                                             const Obstacles& obs, double c) {
  std::vector<double> out(gamma_u.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double dl = lambda[static_cast<Eigen::Index>(i)] - obs.rho_bar[i];
    if (!obs.enabled[i]) {
      out[i] = dl;
      continue;
    }
    out[i] = dl + std::max(0.0, -dl + c * (gamma_u[i] - obs.chi_bar[i]));
  }
  return out;
}

double ContactDiagnostics::worst() const {
  return std::max({feasibility, sign, complementarity, pinned, divergence});
}

ContactDiagnostics contact_diagnostics(const ContactProblem& problem, const MixedState& state) {
  ContactDiagnostics d;
  const auto gu = problem.trace.apply(state.u);
  const auto& obs = problem.obstacles;
  for (std::size_t i = 0; i < gu.size(); ++i) {
    const double gap = gu[i] - obs.chi_bar[i];
    const double dl = state.lambda[static_cast<Eigen::Index>(i)] - obs.rho_bar[i];
    if (!obs.enabled[i]) {
      d.pinned = std::max(d.pinned, std::abs(dl));
      continue;
    }
    d.feasibility = std::max(d.feasibility, gap);
    d.sign = std::max(d.sign, dl);
    d.complementarity = std::max(d.complementarity, std::abs(gap * dl));
  }
  if (problem.B.cols() > 0) d.divergence = (problem.B.transpose() * state.u).cwiseAbs().maxCoeff();
  return d;
}

// ---------------------------------------------------------------------------
// Semismooth Newton

namespace {

struct Layout {
  std::vector<int> free_index;  // velocity dof -> row, or -1 if fixed
  std::vector<int> free_dofs;
  int nq = 0;
  int nmu = 0;

  int size() const { return static_cast<int>(free_dofs.size()) + nq + nmu; }
  int p_row(int j) const { return static_cast<int>(free_dofs.size()) + j; }
  int mu_row(int i) const { return static_cast<int>(free_dofs.size()) + nq + i; }
};

Layout make_layout(const ContactProblem& problem) {
  Layout l;
  const int nv = problem.n_velocity();
  l.free_index.assign(nv, 0);
  for (int dof : problem.fixed_dofs) l.free_index[dof] = -1;
  for (int dof = 0; dof < nv; ++dof) {
    if (l.free_index[dof] == 0) {
      l.free_index[dof] = static_cast<int>(l.free_dofs.size());
      l.free_dofs.push_back(dof);
    }
  }
  l.nq = problem.n_pressure();
  l.nmu = problem.n_multiplier();
  return l;
}

// Saddle-point Jacobian with a pattern independent of the active set.
DirectSolver::ColMatrix newton_matrix(const ContactProblem& problem, const Layout& l, const SparseMatrix& jac,
                                      const std::vector<char>& active) {
  std::vector<Triplet> trip;
  trip.reserve(jac.nonZeros() + 2 * problem.B.nonZeros() + 12 * l.nmu);
  for (int row = 0; row < jac.outerSize(); ++row) {
    const int fr = l.free_index[row];
    if (fr < 0) continue;
    for (SparseMatrix::InnerIterator it(jac, row); it; ++it) {
      const int fc = l.free_index[it.col()];
      if (fc >= 0) trip.emplace_back(fr, fc, it.value());
    }
  }
  for (int row = 0; row < problem.B.outerSize(); ++row) {
    const int fr = l.free_index[row];
    if (fr < 0) continue;
    for (SparseMatrix::InnerIterator it(problem.B, row); it; ++it) {
      trip.emplace_back(fr, l.p_row(static_cast<int>(it.col())), -it.value());
      trip.emplace_back(l.p_row(static_cast<int>(it.col())), fr, -it.value());
    }
  }
  const SparseMatrix& D = problem.trace.D;
  for (int row = 0; row < D.outerSize(); ++row) {
    const int fr = l.free_index[row];
    if (fr < 0) continue;
    for (SparseMatrix::InnerIterator it(D, row); it; ++it) {
      const int i = static_cast<int>(it.col());
      const bool on = problem.obstacles.enabled[i] && active[i];
      trip.emplace_back(fr, l.mu_row(i), -it.value());
      trip.emplace_back(l.mu_row(i), fr, on ? -it.value() : 0.0);
    }
  }
  for (int i = 0; i < l.nmu; ++i) {
    const bool on = problem.obstacles.enabled[i] && active[i];
    trip.emplace_back(l.mu_row(i), l.mu_row(i), on ? 0.0 : 1.0);
  }
  DirectSolver::ColMatrix K(l.size(), l.size());
  K.setFromTriplets(trip.begin(), trip.end());
  K.makeCompressed();
  return K;
}

std::vector<char> activity(const std::vector<double>& gu, const Vector& lambda, const Obstacles& obs, double c,
                           bool ties_active, std::vector<double>* values = nullptr) {
  std::vector<char> act(gu.size(), 0);
  if (values) values->assign(gu.size(), 0.0);
  for (std::size_t i = 0; i < gu.size(); ++i) {
    if (!obs.enabled[i]) continue;
    const double v = -(lambda[static_cast<Eigen::Index>(i)] - obs.rho_bar[i]) + c * (gu[i] - obs.chi_bar[i]);
    if (values) (*values)[i] = v;
    act[i] = ties_active ? (v >= 0.0) : (v > 0.0);
  }
  return act;
}

}  // namespace

NewtonResult semismooth_newton(const ContactProblem& problem, const NewtonConfig& config, MixedState state) {
  if (!(config.tol_residual > 0.0)) throw std::invalid_argument("newton tolerance must be positive");
  if (!(config.c_comp > 0.0)) throw std::invalid_argument("complementarity constant c must be positive");
  const int nv = problem.n_velocity();
  const int nq = problem.n_pressure();
  const int nmu = problem.n_multiplier();
  if (problem.obstacles.size() != static_cast<std::size_t>(nmu)) {
    throw std::invalid_argument("obstacle vectors must have one entry per bed edge");
  }
  if (state.u.size() != nv) state.u = Vector::Zero(nv);
  if (state.p.size() != nq) state.p = Vector::Zero(nq);
  if (state.lambda.size() != nmu) state.lambda = Vector::Zero(nmu);
  for (std::size_t k = 0; k < problem.fixed_dofs.size(); ++k) state.u[problem.fixed_dofs[k]] = problem.fixed_values[k];
  for (int i = 0; i < nmu; ++i) {
    if (!problem.obstacles.enabled[i]) state.lambda[i] = problem.obstacles.rho_bar[i];
  }

  const Layout l = make_layout(problem);
  const double c = config.c_comp;
  const auto& obs = problem.obstacles;

  NewtonResult result;
  auto& stats = result.stats;
  DirectSolver solver;
  std::vector<std::vector<char>> history;
  int consecutive_freezes = 0;

  const auto residual_norm = [&](const MixedState& s, const Vector& Au, Vector* r1_out) {
    const Vector r1 = Au - problem.B * s.p - problem.trace.D * s.lambda - problem.f;
    const Vector r2 = -(problem.B.transpose() * s.u);
    const auto r3 = complementarity_residual(s.lambda, problem.trace.apply(s.u), obs, c);
    double norm2 = r2.squaredNorm() + sq_norm(r3);
    for (int dof : l.free_dofs) norm2 += r1[dof] * r1[dof];
    if (r1_out) *r1_out = r1;
    return std::sqrt(norm2);
  };

  Vector Au;
  SparseMatrix jac;
  for (int it = 0;; ++it) {
    problem.A(state.u, Au, &jac);
    Vector r1;
    const double residual = residual_norm(state, Au, &r1);
    const Vector r2 = -(problem.B.transpose() * state.u);
    const auto gu = problem.trace.apply(state.u);
    if (!std::isfinite(residual)) {
      throw SolverError(SolverError::Kind::SingularMatrix, "non-finite Newton residual (check eps_reg > 0)");
    }

    std::vector<double> values;
    std::vector<char> active;
    if (it == 0) {
      switch (config.active_set_seed) {
        case ActiveSetSeed::FromState: active = activity(gu, state.lambda, obs, c, true); break;
        case ActiveSetSeed::AllActive: active.assign(nmu, 1); break;
        case ActiveSetSeed::AllInactive: active.assign(nmu, 0); break;
      }
      for (int i = 0; i < nmu; ++i) active[i] = active[i] && obs.enabled[i];
    } else {
      active = activity(gu, state.lambda, obs, c, false, &values);
    }

    stats.residuals.push_back(residual);
    stats.active_counts.push_back(static_cast<int>(std::count(active.begin(), active.end(), 1)));
    // Converged once the residual is small on a settled active set. A set
    // that only flips on edges with vanishing activity (degenerate ties) is
    // accepted after two consecutive small residuals.
    const bool stable = history.empty() || active == history.back();
    const bool previous_small = stats.residuals.size() >= 2 &&
                                stats.residuals[stats.residuals.size() - 2] < config.tol_residual;
    if (residual < config.tol_residual && (stable || previous_small)) {
      stats.iterations = it;
      stats.active = active;
      result.state = std::move(state);
      return result;
    }
    if (it >= config.max_iters) {
      std::ostringstream msg;
      msg << "semismooth Newton did not converge in " << config.max_iters << " iterations (residual " << residual
          << ")";
      throw SolverError(SolverError::Kind::MaxIters, msg.str());
    }

    if (it > 0) {
      const auto& prev = history.back();
      // Limit the number of status changes per iteration.
      if (config.max_active_changes > 0) {
        std::vector<int> flips;
        for (int i = 0; i < nmu; ++i) {
          if (active[i] != prev[i]) flips.push_back(i);
        }
        if (static_cast<int>(flips.size()) > config.max_active_changes) {
          std::sort(flips.begin(), flips.end(),
                    [&values](int a, int b) { return std::abs(values[a]) > std::abs(values[b]); });
          for (std::size_t k = config.max_active_changes; k < flips.size(); ++k) active[flips[k]] = prev[flips[k]];
        }
      }
      // Returning to the set used two iterations ago means the iteration is
      // cycling; hold the current set for one step.
      if (history.size() >= 2 && active != prev && active == history[history.size() - 2]) {
        if (++consecutive_freezes > 5) {
          throw SolverError(SolverError::Kind::Cycling, "active set keeps oscillating between two states");
        }
        active = prev;
        ++stats.frozen_iterations;
      } else {
        consecutive_freezes = 0;
      }
    }
    history.push_back(active);

    Vector rhs(l.size());
    for (std::size_t k = 0; k < l.free_dofs.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = -r1[l.free_dofs[k]];
    for (int j = 0; j < nq; ++j) rhs[l.p_row(j)] = -r2[j];
    for (int i = 0; i < nmu; ++i) {
      if (obs.enabled[i] && active[i]) {
        rhs[l.mu_row(i)] = problem.trace.lengths[i] * (gu[i] - obs.chi_bar[i]);
      } else {
        rhs[l.mu_row(i)] = obs.rho_bar[i] - state.lambda[i];
      }
    }

    try {
      solver.factorize(newton_matrix(problem, l, jac, active));
    } catch (const SolverError& e) {
      if (e.kind() != SolverError::Kind::SingularMatrix) throw;
      std::ostringstream msg;
      msg << e.what() << " at Newton iteration " << it << " with " << stats.active_counts.back()
          << " active contact edges; the load may violate the compatibility condition (run compatibility_check)";
      throw SolverError(SolverError::Kind::SingularMatrix, msg.str());
    }
    const Vector dz = solver.solve(rhs);
    const auto stepped = [&](double t) {
      MixedState s = state;
      for (std::size_t k = 0; k < l.free_dofs.size(); ++k) s.u[l.free_dofs[k]] += t * dz[static_cast<Eigen::Index>(k)];
      for (int j = 0; j < nq; ++j) s.p[j] += t * dz[l.p_row(j)];
      for (int i = 0; i < nmu; ++i) s.lambda[i] += t * dz[l.mu_row(i)];
      return s;
    };
    // Backtracking on the residual norm; the full step is tried first.
    double t = 1.0;
    MixedState trial = stepped(t);
    if (config.line_search) {
      Vector A_trial;
      double best_t = t;
      double best = std::numeric_limits<double>::infinity();
      for (int k = 0; k < config.max_backtracks; ++k) {
        problem.A(trial.u, A_trial, nullptr);
        const double rt = residual_norm(trial, A_trial, nullptr);
        if (rt < best) {
          best = rt;
          best_t = t;
        }
        if (rt <= (1.0 - 1e-4 * t) * residual) break;
        t *= 0.5;
        trial = stepped(t);
      }
      if (best_t != t) trial = stepped(best_t);
      t = best_t;
    }
    stats.step_lengths.push_back(t);
    state = std::move(trial);
  }
}

}  // namespace rstokes
