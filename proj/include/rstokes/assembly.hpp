// Element-loop assembly of the regularized power-law operator, its Jacobian,
// the divergence and multiplier couplings, and the load vectors.
#pragma once

#include <span>
#include <vector>

#include "rstokes/manufactured.hpp"
#include "rstokes/mesh.hpp"
#include "rstokes/rheology.hpp"
#include "rstokes/spaces.hpp"
#include "rstokes/sparse.hpp"

namespace rstokes {

struct AssemblyOptions {
  int quad_degree = 6;
  /// Worker threads for element kernels. Accumulation is always sequential in
  /// traversal order, so results do not depend on this value.
  int threads = 1;
  /// Triangle traversal order; empty means 0..N-1.
  std::span<const int> order{};
};

/// [A_eps(u)]_i = int alpha (eps + |Du|)^{r-2} Du : Dv_i dx.
Vector assemble_A_residual(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology, const Vector& u,
                           const AssemblyOptions& opts = {});

/// Gateaux derivative of A_eps at u. The rank-one part is dropped where
/// |Du| < 1e-14.
SparseMatrix assemble_A_jacobian(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology,
                                 const Vector& u, const AssemblyOptions& opts = {});

/// Residual and Jacobian in one element pass.
void assemble_A(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology, const Vector& u,
                Vector& residual, SparseMatrix& jacobian, const AssemblyOptions& opts = {});

/// B_ij = int (div v_i) q_j, q_j the indicator of triangle j.
SparseMatrix assemble_B(const Mesh& mesh, const Spaces& spaces);

/// D_ij = int_{e_j} v_i . n ds.
SparseMatrix assemble_D(const Mesh& mesh, const Spaces& spaces, const TraceOperator& trace);

struct LoadOptions {
  int quad_degree = 14;
  int grading_levels = 14;
};

/// f_i = <A_eps u_hat - B p_hat - gamma_n' lambda_hat, v_i>, evaluated from
/// the exact fields, with gamma_n the given trace. Cells and bed edges
/// touching the origin use rules graded toward it.
Vector assemble_load_mms(const Mesh& mesh, const Spaces& spaces, const TraceOperator& trace, const Rheology& rheology,
                         const ExactFields& exact, const LoadOptions& opts = {});

/// Normal traction sigma_nn = -p_e on the Traction edges,
/// f_i = -p_e int v_i . n ds with n the outward normal.
Vector assemble_load_cavity(const Mesh& mesh, const Spaces& spaces, double p_e);

/// Symmetric part of the velocity gradient at reference point (xi, eta) of a
/// triangle, from the local coefficients.
std::array<std::array<double, 2>, 2> strain_rate(const Mesh& mesh, const Spaces& spaces, const Vector& u,
                                                 int triangle, double xi, double eta);

}  // namespace rstokes
