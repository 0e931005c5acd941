// Glen's flow law written as a power-law (r-Stokes) viscosity.
#pragma once

#include <stdexcept>

namespace rstokes {

class RheologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Rheology {
  double glen_A = 0.5;  // fluidity, constant in space
  double glen_n = 1.0;
  double r = 2.0;       // 1 + 1/n, in (1, 2]
  double alpha = 1.0;   // (1/2)^{r/2} A^{1-r}
  double eps_reg = 0.0;

  /// Conjugate exponent r' = r / (r - 1).
  double r_conjugate() const { return r / (r - 1.0); }
};

/// Throws RheologyError unless A > 0, n >= 1 and eps >= 0.
Rheology make_rheology(double glen_A, double glen_n, double eps_reg);

/// Rheology with exponent r given directly (n = 1 / (r - 1)).
Rheology make_rheology_from_r(double glen_A, double r, double eps_reg);

/// alpha (eps + |Du|)^{r-2}. Returns +inf for eps = 0, |Du| = 0 and r < 2.
double stress_coefficient(const Rheology& rheology, double strain_rate_norm);

/// Derivative of stress_coefficient with respect to |Du|.
double stress_coefficient_derivative(const Rheology& rheology, double strain_rate_norm);

}  // namespace rstokes
