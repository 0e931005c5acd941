// Affine P2 triangle: reference shape functions and the element map.
//
// Local node order: vertices 0, 1, 2 followed by the midpoints of the edges
// (0,1), (1,2) and (2,0). Barycentrics are L0 = 1 - xi - eta, L1 = xi, L2 = eta.
#pragma once

#include <array>

#include "rstokes/mesh.hpp"

namespace rstokes {

inline constexpr int kP2Nodes = 6;
inline constexpr int kCellVelocityDofs = 2 * kP2Nodes;

using ShapeValues = std::array<double, kP2Nodes>;
using ShapeGradients = std::array<std::array<double, 2>, kP2Nodes>;

inline ShapeValues p2_values(double xi, double eta) {
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
          4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
}

inline ShapeGradients p2_reference_gradients(double xi, double eta) {
  const double l0 = 1.0 - xi - eta;
  const double l1 = xi;
  const double l2 = eta;
  // d/dxi L = (-1, 1, 0), d/deta L = (-1, 0, 1)
  return {{{-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)},
           {4.0 * l1 - 1.0, 0.0},
           {0.0, 4.0 * l2 - 1.0},
           {4.0 * (l0 - l1), -4.0 * l1},
           {4.0 * l2, 4.0 * l1},
           {-4.0 * l2, 4.0 * (l0 - l2)}}};
}

/// x = x0 + J (xi, eta).
struct CellMap {
  Point origin;
  std::array<std::array<double, 2>, 2> jac{};      // jac[i][j] = dx_i / dxi_j
  std::array<std::array<double, 2>, 2> inv_jac{};  // inv_jac[j][i] = dxi_j / dx_i
  double det = 0.0;

  Point map(double xi, double eta) const {
    return {origin.x + jac[0][0] * xi + jac[0][1] * eta, origin.y + jac[1][0] * xi + jac[1][1] * eta};
  }

  /// Physical gradients of all six shape functions.
  ShapeGradients gradients(const ShapeGradients& ref) const {
    ShapeGradients g{};
    for (int k = 0; k < kP2Nodes; ++k) {
      for (int i = 0; i < 2; ++i) g[k][i] = ref[k][0] * inv_jac[0][i] + ref[k][1] * inv_jac[1][i];
    }
    return g;
  }
};

inline CellMap cell_map(const Mesh& mesh, int triangle) {
  const auto& t = mesh.triangles[triangle];
  const Point& a = mesh.vertices[t[0]];
  const Point& b = mesh.vertices[t[1]];
  const Point& c = mesh.vertices[t[2]];
  CellMap m;
  m.origin = a;
  m.jac = {{{b.x - a.x, c.x - a.x}, {b.y - a.y, c.y - a.y}}};
  m.det = m.jac[0][0] * m.jac[1][1] - m.jac[0][1] * m.jac[1][0];
  const double inv = 1.0 / m.det;
  m.inv_jac = {{{m.jac[1][1] * inv, -m.jac[0][1] * inv}, {-m.jac[1][0] * inv, m.jac[0][0] * inv}}};
  return m;
}

}  // namespace rstokes
