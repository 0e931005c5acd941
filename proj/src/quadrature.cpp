#include "rstokes/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace rstokes {

namespace {

template <unsigned N>
LineRule boost_gauss() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  LineRule rule;
  // Boost stores the non-negative half of the symmetric rule on [-1, 1].
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) {
      rule.points.push_back(0.5);
      rule.weights.push_back(0.5 * w[k]);
      continue;
    }
    rule.points.push_back(0.5 * (1.0 - x[k]));
    rule.weights.push_back(0.5 * w[k]);
    rule.points.push_back(0.5 * (1.0 + x[k]));
    rule.weights.push_back(0.5 * w[k]);
  }
  return rule;
}

template <unsigned... Ns>
LineRule dispatch(int n, std::integer_sequence<unsigned, Ns...>) {
  LineRule rule;
  bool found = false;
  ((static_cast<int>(Ns) == n ? (rule = boost_gauss<Ns>(), found = true) : false), ...);
  if (!found) throw std::invalid_argument("gauss_legendre: unsupported point count " + std::to_string(n));
  return rule;
}

// Collapsed product rule over (s, t) in [0,1]^2 with apex at reference vertex
// `vertex`: x = v + t * ((1 - s) (a - v) + s (b - v)), dA = t ds dt.
QuadratureRule collapsed(const LineRule& s_rule, const LineRule& t_rule, int vertex, int degree) {
  static constexpr std::array<std::array<double, 2>, 3> ref{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
  const auto& v = ref[vertex];
  const auto& a = ref[(vertex + 1) % 3];
  const auto& b = ref[(vertex + 2) % 3];
  QuadratureRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i < t_rule.points.size(); ++i) {
    const double t = t_rule.points[i];
    for (std::size_t j = 0; j < s_rule.points.size(); ++j) {
      const double s = s_rule.points[j];
      std::array<double, 2> p{};
      for (int c = 0; c < 2; ++c) p[c] = v[c] + t * ((1.0 - s) * (a[c] - v[c]) + s * (b[c] - v[c]));
      rule.points.push_back(p);
      rule.weights.push_back(t_rule.weights[i] * s_rule.weights[j] * t);
    }
  }
  return rule;
}

int points_for_degree(int degree) {
  if (degree < 0) throw std::invalid_argument("quadrature degree must be non-negative");
  // The radial factor t raises the degree in t by one: 2 n - 1 >= degree + 1.
  return (degree + 3) / 2;
}

}  // namespace

LineRule gauss_legendre(int n) {
  return dispatch(n, std::integer_sequence<unsigned, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17,
                                           18, 19, 20>{});
}

LineRule graded_line_rule(int n, int levels, double ratio) {
  const LineRule base = gauss_legendre(n);
  LineRule rule;
  double hi = 1.0;
  for (int level = 0; level <= levels; ++level) {
    const double lo = (level == levels) ? 0.0 : hi * ratio;
    for (std::size_t k = 0; k < base.points.size(); ++k) {
      rule.points.push_back(lo + (hi - lo) * base.points[k]);
      rule.weights.push_back((hi - lo) * base.weights[k]);
    }
    hi = lo;
  }
  return rule;
}

QuadratureRule triangle_rule(int degree) {
  const int n = points_for_degree(degree);
  const LineRule line = gauss_legendre(n);
  return collapsed(line, line, 0, degree);
}

QuadratureRule graded_triangle_rule(int degree, int vertex, int levels, double ratio) {
  if (vertex < 0 || vertex > 2) throw std::invalid_argument("graded_triangle_rule: vertex must be 0, 1 or 2");
  const int n = points_for_degree(degree);
  return collapsed(gauss_legendre(n), graded_line_rule(n, levels, ratio), vertex, degree);
}

double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate([&f](double x) { return f(x); }, a, b, tol);
}

}  // namespace rstokes
