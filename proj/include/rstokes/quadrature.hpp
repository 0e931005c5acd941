// Quadrature rules on the reference triangle {(0,0), (1,0), (0,1)} and on [0, 1].
#pragma once

#include <array>
#include <functional>
#include <vector>

namespace rstokes {

struct QuadratureRule {
  std::vector<std::array<double, 2>> points;  // reference coordinates (xi, eta)
  std::vector<double> weights;                // sum to the reference area 1/2
  int degree = 0;                             // polynomial exactness

  std::size_t size() const { return weights.size(); }
};

struct LineRule {
  std::vector<double> points;  // in [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; n in [1, 20].
LineRule gauss_legendre(int n);

/// Line rule with the same per-interval Gauss order on geometrically graded
/// intervals accumulating at s = 0. Used for integrands singular at an end.
LineRule graded_line_rule(int n, int levels, double ratio);

/// Collapsed (Duffy) Gauss product rule exact for polynomials of total degree
/// `degree`. No point coincides with a vertex.
QuadratureRule triangle_rule(int degree);

/// Collapsed rule with its apex at reference vertex `vertex` (0, 1 or 2) and
/// geometric grading in the radial direction. Intended for integrands with a
/// point singularity at that vertex; still exact to `degree` for polynomials.
QuadratureRule graded_triangle_rule(int degree, int vertex, int levels = 14, double ratio = 0.2);

/// Tanh-sinh integral of f over [a, b] to relative tolerance tol. Endpoint
/// singularities are allowed; f is never evaluated at a or b.
double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

}  // namespace rstokes
