#include "rstokes/rheology.hpp"

#include <cmath>
#include <limits>

namespace rstokes {

Rheology make_rheology(double glen_A, double glen_n, double eps_reg) {
  if (!(glen_A > 0.0)) throw RheologyError("glen_A must be positive");
  if (!(glen_n >= 1.0)) throw RheologyError("glen_n must be >= 1 (r = 1 + 1/n must lie in (1, 2])");
  if (!(eps_reg >= 0.0)) throw RheologyError("eps_reg must be non-negative");
  Rheology rh;
  rh.glen_A = glen_A;
  rh.glen_n = glen_n;
  rh.r = 1.0 + 1.0 / glen_n;
  rh.alpha = std::pow(0.5, 0.5 * rh.r) * std::pow(glen_A, 1.0 - rh.r);
  rh.eps_reg = eps_reg;
  return rh;
}

Rheology make_rheology_from_r(double glen_A, double r, double eps_reg) {
  if (!(r > 1.0 && r <= 2.0)) throw RheologyError("r must lie in (1, 2]");
  Rheology rh = make_rheology(glen_A, 1.0 / (r - 1.0), eps_reg);
  rh.r = r;  // keep the caller's value exactly
  rh.alpha = std::pow(0.5, 0.5 * r) * std::pow(glen_A, 1.0 - r);
  return rh;
}

double stress_coefficient(const Rheology& rh, double s) {
  if (rh.r == 2.0) return rh.alpha;
  const double base = rh.eps_reg + s;
  if (base == 0.0) return std::numeric_limits<double>::infinity();
  return rh.alpha * std::pow(base, rh.r - 2.0);
}

double stress_coefficient_derivative(const Rheology& rh, double s) {
  if (rh.r == 2.0) return 0.0;
  const double base = rh.eps_reg + s;
  if (base == 0.0) return -std::numeric_limits<double>::infinity();
  return rh.alpha * (rh.r - 2.0) * std::pow(base, rh.r - 3.0);
}

}  // namespace rstokes
