#include "rstokes/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "rstokes/fe.hpp"
#include "rstokes/quadrature.hpp"

namespace rstokes {

namespace {

using Mat2 = std::array<std::array<double, 2>, 2>;
using LocalVector = std::array<double, kCellVelocityDofs>;
using LocalMatrix = std::array<double, kCellVelocityDofs * kCellVelocityDofs>;

constexpr double kRankOneCutoff = 1e-14;

double frobenius(const Mat2& g) {
  return std::sqrt(g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]);
}

// Runs body(t) for every triangle index, split across worker threads.
template <class Body>
void parallel_cells(int ncells, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, ncells));
  if (threads == 1) {
    for (int t = 0; t < ncells; ++t) body(t);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (int t = w; t < ncells; t += threads) body(t);
    });
  }
}

std::vector<int> traversal(int ncells, std::span<const int> order) {
  std::vector<int> out(order.begin(), order.end());
  if (out.empty()) {
    out.resize(ncells);
    std::iota(out.begin(), out.end(), 0);
  }
  if (static_cast<int>(out.size()) != ncells) throw std::invalid_argument("traversal order has wrong length");
  return out;
}

// Reference gradients at every point of a rule.
std::vector<ShapeGradients> reference_gradients(const QuadratureRule& rule) {
  std::vector<ShapeGradients> g(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) g[q] = p2_reference_gradients(rule.points[q][0], rule.points[q][1]);
  return g;
}

Mat2 strain_from_local(const ShapeGradients& grad, const std::array<double, 12>& ul) {
  Mat2 gu{};  // gu[i][j] = d u_i / d x_j
  for (int k = 0; k < kP2Nodes; ++k) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) gu[i][j] += ul[2 * k + i] * grad[k][j];
    }
  }
  const double off = 0.5 * (gu[0][1] + gu[1][0]);
  return {{{gu[0][0], off}, {off, gu[1][1]}}};
}

std::array<double, 12> gather(const Spaces& spaces, const Vector& u, int t) {
  const auto dofs = spaces.cell_velocity_dofs(t);
  std::array<double, 12> ul{};
  for (int a = 0; a < 12; ++a) ul[a] = u[dofs[a]];
  return ul;
}

struct ElementKernel {
  const Mesh& mesh;
  const Spaces& spaces;
  const Rheology& rh;
  const Vector& u;
  QuadratureRule rule;
  std::vector<ShapeGradients> ref_grads;

  ElementKernel(const Mesh& m, const Spaces& s, const Rheology& r, const Vector& uu, int degree)
      : mesh(m), spaces(s), rh(r), u(uu), rule(triangle_rule(degree)), ref_grads(reference_gradients(rule)) {}

  void operator()(int t, LocalVector* res, LocalMatrix* jac) const {
    const CellMap cm = cell_map(mesh, t);
    const auto ul = gather(spaces, u, t);
    if (res) res->fill(0.0);
    if (jac) jac->fill(0.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(cm.det);
      const auto grad = cm.gradients(ref_grads[q]);
      const Mat2 g = strain_from_local(grad, ul);
      const double s = frobenius(g);
      const double mu = stress_coefficient(rh, s);

      // G : Dv_{k,c} = sum_b G_cb d_b phi_k
      std::array<double, 12> gdv{};
      for (int k = 0; k < kP2Nodes; ++k) {
        for (int c = 0; c < 2; ++c) gdv[2 * k + c] = g[c][0] * grad[k][0] + g[c][1] * grad[k][1];
      }
      if (res) {
        for (int a = 0; a < 12; ++a) (*res)[a] += w * mu * gdv[a];
      }
      if (jac) {
        const double rank_one = (s < kRankOneCutoff) ? 0.0 : stress_coefficient_derivative(rh, s) / s;
        for (int k = 0; k < kP2Nodes; ++k) {
          for (int l = 0; l < kP2Nodes; ++l) {
            const double dot = grad[k][0] * grad[l][0] + grad[k][1] * grad[l][1];
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) {
                // Dv_{l,d} : Dv_{k,c} = (delta_cd grad phi_k . grad phi_l + d_d phi_k d_c phi_l) / 2
                const double dd = 0.5 * ((c == d ? dot : 0.0) + grad[k][d] * grad[l][c]);
                const int a = 2 * k + c;
                const int b = 2 * l + d;
                (*jac)[a * 12 + b] += w * (mu * dd + rank_one * gdv[a] * gdv[b]);
              }
            }
          }
        }
      }
    }
  }
};

}  // namespace

Vector assemble_A_residual(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology, const Vector& u,
                           const AssemblyOptions& opts) {
  const int nc = static_cast<int>(mesh.triangles.size());
  const ElementKernel kernel(mesh, spaces, rheology, u, opts.quad_degree);
  std::vector<LocalVector> local(nc);
  parallel_cells(nc, opts.threads, [&](int t) { kernel(t, &local[t], nullptr); });

  Vector out = Vector::Zero(spaces.n_velocity());
  for (int t : traversal(nc, opts.order)) {
    const auto dofs = spaces.cell_velocity_dofs(t);
    for (int a = 0; a < 12; ++a) out[dofs[a]] += local[t][a];
  }
  return out;
}

void assemble_A(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology, const Vector& u,
                Vector& residual, SparseMatrix& jacobian, const AssemblyOptions& opts) {
  const int nc = static_cast<int>(mesh.triangles.size());
  const ElementKernel kernel(mesh, spaces, rheology, u, opts.quad_degree);
  std::vector<LocalVector> lres(nc);
  std::vector<LocalMatrix> ljac(nc);
  parallel_cells(nc, opts.threads, [&](int t) { kernel(t, &lres[t], &ljac[t]); });

  residual = Vector::Zero(spaces.n_velocity());
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(nc) * 144);
  for (int t : traversal(nc, opts.order)) {
    const auto dofs = spaces.cell_velocity_dofs(t);
    for (int a = 0; a < 12; ++a) {
      residual[dofs[a]] += lres[t][a];
      for (int b = 0; b < 12; ++b) trip.emplace_back(dofs[a], dofs[b], ljac[t][a * 12 + b]);
    }
  }
  jacobian = from_triplets(spaces.n_velocity(), spaces.n_velocity(), trip);
}

SparseMatrix assemble_A_jacobian(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology,
                                 const Vector& u, const AssemblyOptions& opts) {
  Vector residual;
  SparseMatrix jac;
  assemble_A(mesh, spaces, rheology, u, residual, jac, opts);
  return jac;
}

SparseMatrix assemble_B(const Mesh& mesh, const Spaces& spaces) {
  // div v is linear on each cell, so the centroid value times the area is exact.
  const auto ref = p2_reference_gradients(1.0 / 3.0, 1.0 / 3.0);
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 12);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const CellMap cm = cell_map(mesh, t);
    const auto grad = cm.gradients(ref);
    const double area = 0.5 * std::abs(cm.det);
    for (int k = 0; k < kP2Nodes; ++k) {
      for (int c = 0; c < 2; ++c) {
        trip.emplace_back(Spaces::velocity_dof(spaces.cell_nodes[t][k], c), t, area * grad[k][c]);
      }
    }
  }
  return from_triplets(spaces.n_velocity(), spaces.n_pressure(), trip);
}

SparseMatrix assemble_D(const Mesh&, const Spaces&, const TraceOperator& trace) { return trace.D; }

Vector assemble_load_mms(const Mesh& mesh, const Spaces& spaces, const TraceOperator& trace, const Rheology& rheology,
                         const ExactFields& exact, const LoadOptions& opts) {
  constexpr double kOriginTol = 1e-14;
  const auto at_origin = [](const Point& p) { return std::hypot(p.x, p.y) < kOriginTol; };

  const QuadratureRule regular = triangle_rule(opts.quad_degree);
  std::array<QuadratureRule, 3> graded;
  for (int v = 0; v < 3; ++v) graded[v] = graded_triangle_rule(opts.quad_degree, v, opts.grading_levels);

  Vector f = Vector::Zero(spaces.n_velocity());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    const QuadratureRule* rule = &regular;
    for (int v = 0; v < 3; ++v) {
      if (at_origin(mesh.vertices[tri[v]])) rule = &graded[v];
    }
    const CellMap cm = cell_map(mesh, t);
    const auto dofs = spaces.cell_velocity_dofs(t);
    for (std::size_t q = 0; q < rule->size(); ++q) {
      const double xi = rule->points[q][0];
      const double eta = rule->points[q][1];
      const double w = rule->weights[q] * std::abs(cm.det);
      const Point x = cm.map(xi, eta);
      const auto grad = cm.gradients(p2_reference_gradients(xi, eta));
      const auto gu = exact.velocity_gradient(x.x, x.y);
      const double off = 0.5 * (gu[0][1] + gu[1][0]);
      const Mat2 g{{{gu[0][0], off}, {off, gu[1][1]}}};
      const double mu = stress_coefficient(rheology, frobenius(g));
      const double p = exact.pressure(x.x, x.y);
      for (int k = 0; k < kP2Nodes; ++k) {
        for (int c = 0; c < 2; ++c) {
          const double sdv = mu * (g[c][0] * grad[k][0] + g[c][1] * grad[k][1]);
          f[dofs[2 * k + c]] += w * (sdv - p * grad[k][c]);
        }
      }
    }
  }

  // - int_bed lambda_hat (v_i . n) ds
  const int n_line = opts.quad_degree / 2 + 1;
  const LineRule line = gauss_legendre(n_line);
  const LineRule graded_line = graded_line_rule(n_line, opts.grading_levels, 0.2);
  for (int i = 0; i < spaces.n_multiplier(); ++i) {
    auto a = trace.endpoints[i][0];
    auto b = trace.endpoints[i][1];
    auto nodes = trace.edge_nodes[i];
    // Parametrize from the singular end if there is one.
    if (at_origin(b)) {
      std::swap(a, b);
      std::swap(nodes[0], nodes[2]);
    }
    const LineRule& lr = at_origin(a) ? graded_line : line;
    const double len = trace.lengths[i];
    const Point n = trace.normals[i];
    for (std::size_t q = 0; q < lr.points.size(); ++q) {
      const double s = lr.points[q];
      const double x1 = a.x + s * (b.x - a.x);
      const double lam = exact.multiplier(x1);
      const std::array<double, 3> psi{(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)};
      for (int k = 0; k < 3; ++k) {
        f[Spaces::velocity_dof(nodes[k], 0)] -= lr.weights[q] * len * lam * psi[k] * n.x;
        f[Spaces::velocity_dof(nodes[k], 1)] -= lr.weights[q] * len * lam * psi[k] * n.y;
      }
    }
  }
  return f;
}

Vector assemble_load_cavity(const Mesh& mesh, const Spaces& spaces, double p_e) {
  if (p_e < 0.0) throw std::invalid_argument("effective pressure must be non-negative");
  Vector f = Vector::Zero(spaces.n_velocity());
  // -p_e int v . n ds; v . n is quadratic on a straight edge, so Simpson is exact.
  static constexpr std::array<double, 3> simpson{1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::Traction) continue;
    const Point& a = mesh.vertices[be.v[0]];
    const Point& b = mesh.vertices[be.v[1]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const Point n = outward_normal(mesh, be);
    const int e = spaces.find_edge(be.v[0], be.v[1]);
    const std::array<int, 3> raw{be.v[0], spaces.num_vertices + e, be.v[1]};
    for (int k = 0; k < 3; ++k) {
      const int node = spaces.node_of_raw[raw[k]];
      f[Spaces::velocity_dof(node, 0)] -= p_e * len * simpson[k] * n.x;
      f[Spaces::velocity_dof(node, 1)] -= p_e * len * simpson[k] * n.y;
    }
  }
  return f;
}

std::array<std::array<double, 2>, 2> strain_rate(const Mesh& mesh, const Spaces& spaces, const Vector& u,
                                                 int triangle, double xi, double eta) {
  const CellMap cm = cell_map(mesh, triangle);
  return strain_from_local(cm.gradients(p2_reference_gradients(xi, eta)), gather(spaces, u, triangle));
}

}  // namespace rstokes
