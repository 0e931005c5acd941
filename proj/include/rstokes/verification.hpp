// Manufactured-solution problem on the unit square, discretization errors and
// the mesh convergence study.
#pragma once

#include <memory>
#include <ostream>
#include <vector>

#include "rstokes/assembly.hpp"
#include "rstokes/manufactured.hpp"
#include "rstokes/mesh.hpp"
#include "rstokes/rheology.hpp"
#include "rstokes/rigid.hpp"
#include "rstokes/solver.hpp"
#include "rstokes/spaces.hpp"

namespace rstokes {

struct MmsSettings {
  double glen_A = 0.5;
  double eps_reg = 1e-4;
  NewtonConfig newton{};
  AssemblyOptions assembly{};
  LoadOptions load{};
  int error_degree = 10;
  /// Solve at r = 2 first and start r < 2 from that solution.
  bool continuation = true;
};

/// Owns the mesh and spaces referenced by the problem's operator; not movable.
struct MmsDiscretization {
  Mesh mesh;
  Spaces spaces;
  Rheology rheology;
  ExactFields exact;
  ContactProblem problem;
  RigidCone cone;

  MmsDiscretization() = default;
  MmsDiscretization(const MmsDiscretization&) = delete;
  MmsDiscretization& operator=(const MmsDiscretization&) = delete;
};

std::unique_ptr<MmsDiscretization> make_mms_discretization(Mesh mesh, double r, const MmsSettings& settings);

/// Average of the exact multiplier over [a, b] on the bed.
double exact_multiplier_average(const ExactFields& exact, double a, double b);

struct ErrorRecord {
  double h = 0.0;
  double err_D = 0.0;       // ||D(u - u_h)||_{L^r}
  double err_V = 0.0;       // ||u - u_h||_{W^{1,r}}
  double err_F = 0.0;       // ||F(Du) - F(Du_h)||_{L^2}, F(G) = |G|^{(r-2)/2} G
  double err_p = 0.0;       // ||p - p_h||_{L^{r'}}
  double err_lambda = 0.0;  // h^{1/r'} ||avg lambda - lambda_h||_{L^{r'}(bed)}
  double rigid_part = 0.0;     // ||theta* g||_{W^{1,r}} of the velocity error
  double nonrigid_part = 0.0;  // ||e - theta* g||_{W^{1,r}}
};

ErrorRecord error_norms(const MmsDiscretization& disc, const MixedState& state, int degree = 10);

struct MmsSolution {
  MixedState state;
  NewtonStats stats;
  ContactDiagnostics diagnostics;
  CompatibilityReport compatibility;
  ErrorRecord errors;
};

/// Single solve. A null initial guess starts from zero.
MmsSolution solve_mms(const MmsDiscretization& disc, const MmsSettings& settings,
                      const MixedState* initial = nullptr);

/// Solve with r = 2 continuation when settings.continuation is set.
MmsSolution solve_mms(const Mesh& mesh, double r, const MmsSettings& settings);

struct ConvergenceRow {
  double r = 2.0;
  int n = 0;  // cells per side
  ErrorRecord errors;
  double order_D, order_V, order_p, order_lambda;  // NaN on the coarsest level
  int newton_iters = 0;
  std::vector<double> residuals;  // Newton residual history
  ContactDiagnostics diagnostics;
  CompatibilityReport compatibility;
};

/// Meshes with n = base_n * 2^k cells per side, k = 0 .. levels - 1.
std::vector<ConvergenceRow> convergence_study(const std::vector<double>& rs, int base_n, int levels,
                                              const MmsSettings& settings);

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows);

}  // namespace rstokes
