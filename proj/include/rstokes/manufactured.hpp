// Exact fields of the manufactured contact problem on the unit square.
//
//   u(x) = |x|^{a-1} (x2, -x1),   p(x) = |x|^g,
//   lambda(x1) = -x1^g on {y = 0},  (u . n)(x1) = -x1^a on {y = 0},
//
// where n = (0, 1) on the bed, i.e. the bed normal points into the domain.
// with a = 1.01 and g = -1 + 2/r + 0.01. The obstacles switch branch at
// x1 = 1/2 so that the kinematic condition is active on the left half of the
// bed and the stress condition on the right half.
#pragma once

#include <array>

namespace rstokes {

struct ExactFields {
  double r = 2.0;
  double alpha_exp = 1.01;
  double gamma_exp = 0.01;

  std::array<double, 2> velocity(double x, double y) const;
  /// grad[i][j] = d u_i / d x_j
  std::array<std::array<double, 2>, 2> velocity_gradient(double x, double y) const;
  double pressure(double x, double y) const;

  /// Bed quantities as functions of x1 >= 0.
  double multiplier(double x1) const;
  double normal_velocity(double x1) const;
  double chi(double x1) const;
  double rho(double x1) const;
};

ExactFields exact_fields(double r);

}  // namespace rstokes
