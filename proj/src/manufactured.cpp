#include "rstokes/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace rstokes {

ExactFields exact_fields(double r) {
  if (!(r > 1.0 && r <= 2.0)) throw std::invalid_argument("exact_fields: r must lie in (1, 2]");
  ExactFields f;
  f.r = r;
  f.alpha_exp = 1.01;
  f.gamma_exp = -1.0 + 2.0 / r + 0.01;
  return f;
}

std::array<double, 2> ExactFields::velocity(double x, double y) const {
  const double rad = std::hypot(x, y);
  if (rad == 0.0) return {0.0, 0.0};
  const double s = std::pow(rad, alpha_exp - 1.0);
  return {s * y, -s * x};
}

std::array<std::array<double, 2>, 2> ExactFields::velocity_gradient(double x, double y) const {
  const double rad2 = x * x + y * y;
  if (rad2 == 0.0) return {};
  const double s = std::pow(rad2, 0.5 * (alpha_exp - 1.0));  // |x|^{a-1}
  const double t = (alpha_exp - 1.0) * s / rad2;              // (a-1) |x|^{a-3}
  return {{{t * x * y, t * y * y + s}, {-t * x * x - s, -t * x * y}}};
}

double ExactFields::pressure(double x, double y) const {
  const double rad = std::hypot(x, y);
  return rad == 0.0 ? 0.0 : std::pow(rad, gamma_exp);
}

double ExactFields::multiplier(double x1) const { return x1 <= 0.0 ? 0.0 : -std::pow(x1, gamma_exp); }

double ExactFields::normal_velocity(double x1) const { return x1 <= 0.0 ? 0.0 : -std::pow(x1, alpha_exp); }

double ExactFields::chi(double x1) const {
  return x1 <= 0.5 ? normal_velocity(x1) : -std::pow(2.0, -alpha_exp);
}

double ExactFields::rho(double x1) const {
  return x1 <= 0.5 ? multiplier(x1) * (4.0 * x1 - 1.0) : multiplier(x1);
}

}  // namespace rstokes
