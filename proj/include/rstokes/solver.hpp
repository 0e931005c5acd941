// Primal-dual active set (semismooth Newton) solver for the discrete mixed
// contact problem
//
//   A_eps(u) - B p - D lambda = f
//            -B^T u           = 0
//   (lambda - rho) + max{0, -(lambda - rho) + c (Gamma u - chi)} = 0
#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstokes/assembly.hpp"
#include "rstokes/spaces.hpp"
#include "rstokes/sparse.hpp"

namespace rstokes {

struct MixedState {
  Vector u;
  Vector p;
  Vector lambda;
};

/// Per-edge obstacle averages. Edges with enabled == 0 carry no contact
/// constraint: their multiplier is pinned to rho_bar.
struct Obstacles {
  std::vector<double> chi_bar;
  std::vector<double> rho_bar;
  std::vector<char> enabled;

  static Obstacles zeros(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<char>(n, 1)}; }
  std::size_t size() const { return chi_bar.size(); }
};

enum class ActiveSetSeed {
  FromState,   // activity test on the initial state, ties counted as active
  AllActive,
  AllInactive,
};

struct NewtonConfig {
  double tol_residual = 1e-11;
  int max_iters = 60;
  double c_comp = 1.0;
  ActiveSetSeed active_set_seed = ActiveSetSeed::FromState;
  /// Maximum number of edges allowed to change status per iteration; 0 means
  /// unlimited. The largest activity values change first.
  int max_active_changes = 0;
  /// Backtracking on the combined residual norm. Full steps are accepted
  /// whenever they reduce it, so the local convergence rate is unchanged.
  bool line_search = true;
  int max_backtracks = 30;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { MaxIters, SingularMatrix, Cycling };
  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Evaluates A_eps(u) and, if requested, its Jacobian.
using NonlinearOperator = std::function<void(const Vector& u, Vector& value, SparseMatrix* jacobian)>;

NonlinearOperator make_power_law_operator(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology,
                                          AssemblyOptions opts = {});

struct ContactProblem {
  NonlinearOperator A;
  SparseMatrix B;
  TraceOperator trace;
  Vector f;
  std::vector<int> fixed_dofs;  // essential velocity dofs
  std::vector<double> fixed_values;
  Obstacles obstacles;

  int n_velocity() const { return static_cast<int>(f.size()); }
  int n_pressure() const { return static_cast<int>(B.cols()); }
  int n_multiplier() const { return static_cast<int>(trace.lengths.size()); }
};

struct NewtonStats {
  int iterations = 0;
  std::vector<double> residuals;
  std::vector<int> active_counts;
  std::vector<char> active;  // final active set
  int frozen_iterations = 0;
  std::vector<double> step_lengths;
};

struct NewtonResult {
  MixedState state;
  NewtonStats stats;
};

/// Componentwise obstacle-shifted complementarity function. Disabled edges
/// return lambda - rho.
std::vector<double> complementarity_residual(const Vector& lambda, const std::vector<double>& gamma_u,
                                             const Obstacles& obstacles, double c_comp);

NewtonResult semismooth_newton(const ContactProblem& problem, const NewtonConfig& config, MixedState initial);

/// Sparse LU (UMFPACK, AMD ordering). Up to two steps of iterative refinement
/// are taken while the relative residual exceeds 1e-10; a residual above 1e-6
/// is reported as a singular system.
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  void factorize(const ColMatrix& matrix);
  Vector solve(const Vector& rhs) const;
  double last_relative_residual() const { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0.0;
};

Vector linear_solve(const SparseMatrix& matrix, const Vector& rhs);

/// Worst-case violations of the discrete contact conditions and divergence.
struct ContactDiagnostics {
  double feasibility = 0.0;      // max (Gamma u - chi)_+
  double sign = 0.0;             // max (lambda - rho)_+
  double complementarity = 0.0;  // max |(Gamma u - chi)(lambda - rho)|
  double pinned = 0.0;           // max |lambda - rho| on disabled edges
  double divergence = 0.0;       // ||B^T u||_inf

  double worst() const;
};

ContactDiagnostics contact_diagnostics(const ContactProblem& problem, const MixedState& state);

}  // namespace rstokes
