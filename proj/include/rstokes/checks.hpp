// Invariant suites run by the `check` subcommand and reused by the tests.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rstokes/assembly.hpp"
#include "rstokes/mesh.hpp"
#include "rstokes/rheology.hpp"
#include "rstokes/rigid.hpp"
#include "rstokes/solver.hpp"

namespace rstokes {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double tolerance = 0.0;  // bound it was held to
  std::string detail;
};

struct JacobianCheck {
  double max_rel_error = 0.0;  // ||FD - J v|| / ||J v|| over all states
  double max_asymmetry = 0.0;  // max |J - J^T|
  int states = 0;
};

/// Central differences of A_eps along a random direction at `states` random
/// velocity fields with coefficients uniform in [-1, 1].
JacobianCheck jacobian_fd_check(const Mesh& mesh, const Rheology& rheology, int states, double step,
                                std::mt19937_64& rng, const AssemblyOptions& opts = {});

double max_asymmetry(const SparseMatrix& m);

/// Largest ratio res_{k+1} / res_k over the last `tail` Newton steps whose
/// residual exceeds `floor`; superlinear convergence drives it toward 0.
double tail_contraction(const std::vector<double>& residuals, int tail = 2, double floor = 1e-13);

struct RigidOracleCheck {
  double idempotence = 0.0;    // |theta(theta* g) - theta*|, |theta(v - theta* g)|
  double clamp = 0.0;          // theta for a field moving against the cone
  double closed_form = 0.0;    // r = 2: |theta - max(0, mean v . d / |d|^2)|
};

/// Rigid projection oracles on sampled random P2 fields on `mesh`.
RigidOracleCheck rigid_projection_oracles(const Mesh& mesh, std::mt19937_64& rng, int fields = 5);

/// All suites at small size. `report` is called after each check.
std::vector<CheckResult> run_invariant_checks(std::uint64_t seed,
                                              const std::function<void(const CheckResult&)>& report = nullptr);

}  // namespace rstokes
