#include "rstokes/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rstokes {

int Spaces::find_edge(int a, int b) const {
  for (const auto& [other, edge] : vertex_edges_[a]) {
    if (other == b) return edge;
  }
  return -1;
}

Point outward_normal(const Mesh& mesh, const BoundaryEdge& edge) {
  const Point& a = mesh.vertices[edge.v[0]];
  const Point& b = mesh.vertices[edge.v[1]];
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  return {dy / len, -dx / len};
}

Spaces build_spaces(const Mesh& mesh) {
  Spaces s;
  s.num_vertices = static_cast<int>(mesh.vertices.size());
  s.vertex_edges_.resize(s.num_vertices);

  // Global edges numbered in order of first appearance.
  std::vector<std::array<int, 3>> cell_edges(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      int e = s.find_edge(a, b);
      if (e < 0) {
        e = static_cast<int>(s.edges.size());
        s.edges.push_back({std::min(a, b), std::max(a, b)});
        s.vertex_edges_[a].push_back({b, e});
        s.vertex_edges_[b].push_back({a, e});
      }
      cell_edges[t][k] = e;
    }
  }
  s.num_edges = static_cast<int>(s.edges.size());
  const int num_raw = s.num_vertices + s.num_edges;

  // Periodic identification: right vertices and right side edges become slaves.
  std::vector<int> master(num_raw);
  for (int i = 0; i < num_raw; ++i) master[i] = i;
  std::map<int, int> left_of;
  for (const auto& p : mesh.periodic_pairs) {
    left_of[p.right] = p.left;
    master[p.right] = p.left;
    s.periodic_raw.push_back({p.left, p.right});
  }
  for (int e = 0; e < s.num_edges; ++e) {
    const auto ia = left_of.find(s.edges[e][0]);
    const auto ib = left_of.find(s.edges[e][1]);
    if (ia == left_of.end() || ib == left_of.end()) continue;
    const int me = s.find_edge(ia->second, ib->second);
    if (me < 0) continue;
    master[s.num_vertices + e] = s.num_vertices + me;
    s.periodic_raw.push_back({s.num_vertices + me, s.num_vertices + e});
  }

  s.node_of_raw.assign(num_raw, -1);
  for (int raw = 0; raw < num_raw; ++raw) {
    if (master[raw] != raw) continue;
    s.node_of_raw[raw] = s.num_nodes++;
    if (raw < s.num_vertices) {
      s.node_points.push_back(mesh.vertices[raw]);
    } else {
      const auto& e = s.edges[raw - s.num_vertices];
      const Point& a = mesh.vertices[e[0]];
      const Point& b = mesh.vertices[e[1]];
      s.node_points.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
  }
  for (int raw = 0; raw < num_raw; ++raw) {
    if (master[raw] != raw) s.node_of_raw[raw] = s.node_of_raw[master[raw]];
  }

  s.cell_nodes.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      s.cell_nodes[t][k] = s.node_of_raw[tri[k]];
      s.cell_nodes[t][3 + k] = s.node_of_raw[s.num_vertices + cell_edges[t][k]];
    }
  }

  s.bed_edges = bed_edges_ordered(mesh);

  // Essential boundary dofs.
  std::set<int> noslip;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::NoSlip) continue;
    const int e = s.find_edge(be.v[0], be.v[1]);
    for (int raw : {be.v[0], be.v[1], s.num_vertices + e}) {
      for (int c = 0; c < 2; ++c) noslip.insert(Spaces::velocity_dof(s.node_of_raw[raw], c));
    }
  }
  std::map<int, ClampDof> clamp;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::NormalClamp) continue;
    const Point n = outward_normal(mesh, be);
    int component = -1;
    if (std::abs(std::abs(n.x) - 1.0) < 1e-12) component = 0;
    if (std::abs(std::abs(n.y) - 1.0) < 1e-12) component = 1;
    if (component < 0) throw MeshError("NormalClamp edges must be axis-aligned");
    const double nc = component == 0 ? std::round(n.x) : std::round(n.y);
    const int e = s.find_edge(be.v[0], be.v[1]);
    for (int raw : {be.v[0], be.v[1], s.num_vertices + e}) {
      const int node = s.node_of_raw[raw];
      const int dof = Spaces::velocity_dof(node, component);
      if (noslip.contains(dof)) continue;
      clamp.emplace(dof, ClampDof{dof, node, component, nc});
    }
  }
  for (const auto& [dof, c] : clamp) s.clamp_dofs.push_back(c);
  s.noslip_dofs.assign(noslip.begin(), noslip.end());
  return s;
}

std::vector<int> boundary_nodes(const Mesh& mesh, const Spaces& spaces, BoundaryTag tag) {
  std::set<int> nodes;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    const int e = spaces.find_edge(be.v[0], be.v[1]);
    for (int raw : {be.v[0], be.v[1], spaces.num_vertices + e}) nodes.insert(spaces.node_of_raw[raw]);
  }
  return {nodes.begin(), nodes.end()};
}

std::vector<double> TraceOperator::apply(const Vector& u) const {
  std::vector<double> out(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    double acc = 0.0;
    static constexpr std::array<double, 3> simpson{1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
    for (int k = 0; k < 3; ++k) {
      const int node = edge_nodes[i][k];
      acc += simpson[k] * (u[Spaces::velocity_dof(node, 0)] * normals[i].x +
                           u[Spaces::velocity_dof(node, 1)] * normals[i].y);
    }
    out[i] = acc;
  }
  return out;
}

TraceOperator normal_trace(const Mesh& mesh, const Spaces& spaces, BedNormal orientation) {
  TraceOperator tr;
  const int nmu = spaces.n_multiplier();
  std::vector<Triplet> g;
  std::vector<Triplet> d;
  g.reserve(6 * nmu);
  d.reserve(6 * nmu);
  for (int i = 0; i < nmu; ++i) {
    const auto& be = mesh.boundary_edges[spaces.bed_edges[i]];
    const Point& a = mesh.vertices[be.v[0]];
    const Point& b = mesh.vertices[be.v[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    Point n = outward_normal(mesh, be);
    if (orientation == BedNormal::Inward) n = {-n.x, -n.y};
    const int e = spaces.find_edge(be.v[0], be.v[1]);
    const std::array<int, 3> nodes{spaces.node_of_raw[be.v[0]], spaces.node_of_raw[spaces.num_vertices + e],
                                   spaces.node_of_raw[be.v[1]]};
    tr.lengths.push_back(len);
    tr.normals.push_back(n);
    tr.edge_nodes.push_back(nodes);
    tr.endpoints.push_back({a, b});

    // Simpson's rule is exact for the quadratic trace.
    static constexpr std::array<double, 3> simpson{1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 2; ++c) {
        const double nc = c == 0 ? n.x : n.y;
        const int dof = Spaces::velocity_dof(nodes[k], c);
        g.emplace_back(i, dof, simpson[k] * nc);
        d.emplace_back(dof, i, len * simpson[k] * nc);
      }
    }
  }
  tr.gamma = from_triplets(nmu, spaces.n_velocity(), g);
  tr.D = from_triplets(spaces.n_velocity(), nmu, d);
  return tr;
}

}  // namespace rstokes
