// Degree-of-freedom maps for the P2 vector velocity, P0 cell pressure and P0
// bed-edge multiplier spaces, and the discrete normal trace onto the bed.
#pragma once

#include <array>
#include <vector>

#include "rstokes/mesh.hpp"
#include "rstokes/sparse.hpp"

namespace rstokes {

/// A velocity dof pinned by a normal-velocity condition on an axis-aligned
/// boundary edge. u . n = g becomes u_component = g * normal_component.
struct ClampDof {
  int dof = -1;
  int node = -1;
  int component = 0;
  double normal_component = 0.0;  // +1 or -1
};

struct Spaces {
  int num_vertices = 0;
  int num_edges = 0;
  std::vector<std::array<int, 2>> edges;          // global edge -> vertex pair
  std::vector<std::array<int, 6>> cell_nodes;     // identified P2 node per local node
  std::vector<int> node_of_raw;                   // raw node (vertex, then edge) -> node
  std::vector<Point> node_points;                 // coordinates of each node's master
  std::vector<std::pair<int, int>> periodic_raw;  // (master raw node, slave raw node)
  int num_nodes = 0;

  std::vector<int> bed_edges;  // multiplier dof -> index into mesh.boundary_edges
  std::vector<ClampDof> clamp_dofs;
  std::vector<int> noslip_dofs;

  int n_velocity() const { return 2 * num_nodes; }
  int n_pressure() const { return static_cast<int>(cell_nodes.size()); }
  int n_multiplier() const { return static_cast<int>(bed_edges.size()); }

  static int velocity_dof(int node, int component) { return 2 * node + component; }

  /// Velocity dofs of a triangle: local node k, component c -> entry 2 k + c.
  std::array<int, 12> cell_velocity_dofs(int triangle) const {
    std::array<int, 12> dofs{};
    for (int k = 0; k < 6; ++k) {
      dofs[2 * k] = velocity_dof(cell_nodes[triangle][k], 0);
      dofs[2 * k + 1] = velocity_dof(cell_nodes[triangle][k], 1);
    }
    return dofs;
  }

  /// Global edge id joining two vertices, or -1.
  int find_edge(int a, int b) const;

 private:
  friend Spaces build_spaces(const Mesh& mesh);
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;  // vertex -> (other vertex, edge)
};

Spaces build_spaces(const Mesh& mesh);

/// Sorted, unique nodes lying on boundary edges with the given tag.
std::vector<int> boundary_nodes(const Mesh& mesh, const Spaces& spaces, BoundaryTag tag);

/// Per-edge geometry of the bed and the trace matrices.
struct TraceOperator {
  SparseMatrix gamma;  // N_mu x N_v, edge-average normal component
  SparseMatrix D;      // N_v x N_mu, D_ij = int_{e_j} v_i . n ds
  std::vector<double> lengths;
  std::vector<Point> normals;                  // outward unit normals
  std::vector<std::array<int, 3>> edge_nodes;  // start, midpoint, end nodes
  std::vector<std::array<Point, 2>> endpoints;

  /// (Gamma u)_i computed edge by edge.
  std::vector<double> apply(const Vector& u) const;
};

enum class BedNormal { Outward, Inward };

TraceOperator normal_trace(const Mesh& mesh, const Spaces& spaces, BedNormal orientation = BedNormal::Outward);

/// Outward unit normal of a boundary edge (stored in triangle orientation).
Point outward_normal(const Mesh& mesh, const BoundaryEdge& edge);

}  // namespace rstokes
