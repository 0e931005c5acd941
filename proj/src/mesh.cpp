#include "rstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace rstokes {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Number of triangles sharing each undirected edge.
std::map<EdgeKey, int> edge_multiplicity(const Mesh& mesh) {
  std::map<EdgeKey, int> count;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++count[key(t[k], t[(k + 1) % 3])];
  }
  return count;
}

// Structured grid of (nx+1) x (ny+1) vertices, each cell split bottom-left to
// top-right. Vertex (i, j) has index j * (nx + 1) + i.
void structured_triangles(Mesh& mesh, int nx, int ny) {
  const auto v = [nx](int i, int j) { return j * (nx + 1) + i; };
  mesh.triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
      mesh.triangles.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
    }
  }
}

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::BedContact: return "BedContact";
    case BoundaryTag::Traction: return "Traction";
    case BoundaryTag::NormalClamp: return "NormalClamp";
    case BoundaryTag::NoSlip: return "NoSlip";
  }
  return "?";
}

BoundaryTag parse_boundary_tag(std::string_view name) {
  for (auto tag : {BoundaryTag::BedContact, BoundaryTag::Traction, BoundaryTag::NormalClamp,
                   BoundaryTag::NoSlip}) {
    if (to_string(tag) == name) return tag;
  }
  throw MeshError("unknown boundary tag '" + std::string(name) + "'");
}

double signed_area(const Mesh& mesh, int triangle) {
  const auto& t = mesh.triangles[triangle];
  const Point& a = mesh.vertices[t[0]];
  const Point& b = mesh.vertices[t[1]];
  const Point& c = mesh.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) area += signed_area(mesh, t);
  return area;
}

double diameter(const Mesh& mesh, int triangle) {
  const auto& t = mesh.triangles[triangle];
  double d = 0.0;
  for (int k = 0; k < 3; ++k) {
    d = std::max(d, distance(mesh.vertices[t[k]], mesh.vertices[t[(k + 1) % 3]]));
  }
  return d;
}

double max_diameter(const Mesh& mesh) {
  double h = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) h = std::max(h, diameter(mesh, t));
  return h;
}

void validate(const Mesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const auto in_range = [nv](int i) { return i >= 0 && i < nv; };

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    for (int i : mesh.triangles[t]) {
      if (!in_range(i)) throw MeshError("triangle " + std::to_string(t) + " has invalid vertex index");
    }
    if (!(signed_area(mesh, t) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    }
  }

  // Directed edges of all triangles, used to check boundary edge orientation.
  std::map<EdgeKey, int> directed;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
  }
  const auto multiplicity = edge_multiplicity(mesh);

  std::map<EdgeKey, int> seen;
  for (const auto& e : mesh.boundary_edges) {
    if (!in_range(e.v[0]) || !in_range(e.v[1])) throw MeshError("boundary edge has invalid vertex index");
    const auto k = key(e.v[0], e.v[1]);
    const auto it = multiplicity.find(k);
    if (it == multiplicity.end() || it->second != 1) {
      throw MeshError("boundary edge (" + std::to_string(e.v[0]) + "," + std::to_string(e.v[1]) +
                      ") does not belong to exactly one triangle");
    }
    if (!directed.contains({e.v[0], e.v[1]})) {
      throw MeshError("boundary edge is not oriented like its owning triangle");
    }
    if (++seen[k] > 1) throw MeshError("boundary edge listed twice");
  }

  for (const auto& p : mesh.periodic_pairs) {
    if (!in_range(p.left) || !in_range(p.right)) throw MeshError("periodic pair has invalid index");
    if (std::abs(mesh.vertices[p.left].y - mesh.vertices[p.right].y) > 1e-12) {
      throw MeshError("periodic pair y-coordinates differ");
    }
  }

  // Every edge with a single triangle must be tagged or lie on a periodic side.
  std::vector<char> periodic(nv, 0);
  for (const auto& p : mesh.periodic_pairs) periodic[p.left] = periodic[p.right] = 1;
  for (const auto& [k, count] : multiplicity) {
    if (count > 2) throw MeshError("edge shared by more than two triangles");
    if (count == 1 && !seen.contains(k) && !(periodic[k.first] && periodic[k.second])) {
      throw MeshError("untagged boundary edge (" + std::to_string(k.first) + "," +
                      std::to_string(k.second) + ")");
    }
  }

  if (std::any_of(mesh.boundary_edges.begin(), mesh.boundary_edges.end(),
                  [](const BoundaryEdge& e) { return e.tag == BoundaryTag::BedContact; })) {
    (void)bed_edges_ordered(mesh);
  }
}

std::vector<int> bed_edges_ordered(const Mesh& mesh) {
  std::vector<int> bed;
  for (int i = 0; i < static_cast<int>(mesh.boundary_edges.size()); ++i) {
    if (mesh.boundary_edges[i].tag == BoundaryTag::BedContact) bed.push_back(i);
  }
  if (bed.empty()) return bed;

  // Orient each edge left-to-right and chain by shared vertices.
  std::map<int, int> starting_at;
  std::map<int, int> ending_at;
  for (int idx : bed) {
    auto [a, b] = mesh.boundary_edges[idx].v;
    if (mesh.vertices[a].x > mesh.vertices[b].x) std::swap(a, b);
    if (!starting_at.emplace(a, idx).second || !ending_at.emplace(b, idx).second) {
      throw MeshError("bed edges do not form a single chain");
    }
  }
  int start = -1;
  for (const auto& [v, idx] : starting_at) {
    if (!ending_at.contains(v)) {
      if (start >= 0) throw MeshError("bed edges do not form a single connected chain");
      start = v;
    }
  }
  if (start < 0) throw MeshError("bed chain is closed");

  std::vector<int> ordered;
  ordered.reserve(bed.size());
  int v = start;
  while (starting_at.contains(v)) {
    const int idx = starting_at.at(v);
    ordered.push_back(idx);
    auto [a, b] = mesh.boundary_edges[idx].v;
    v = (mesh.vertices[a].x > mesh.vertices[b].x) ? a : b;
  }
  if (ordered.size() != bed.size()) throw MeshError("bed edges do not form a single connected chain");
  return ordered;
}

std::vector<int> bed_chain(const Mesh& mesh) {
  const auto edges = bed_edges_ordered(mesh);
  std::vector<int> chain;
  if (edges.empty()) return chain;
  chain.reserve(edges.size() + 1);
  for (int idx : edges) {
    auto [a, b] = mesh.boundary_edges[idx].v;
    if (mesh.vertices[a].x > mesh.vertices[b].x) std::swap(a, b);
    if (chain.empty()) chain.push_back(a);
    chain.push_back(b);
  }
  return chain;
}

double cosine_bed(double x, double amplitude) {
  return 0.5 * amplitude * std::cos(2.0 * std::numbers::pi * x);
}

Mesh generate_unit_square(int n) {
  if (n < 1) throw MeshError("generate_unit_square requires n >= 1");
  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  structured_triangles(mesh, n, n);

  const auto v = [n](int i, int j) { return j * (n + 1) + i; };
  for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({{v(i, 0), v(i + 1, 0)}, BoundaryTag::BedContact});
  for (int j = 0; j < n; ++j) mesh.boundary_edges.push_back({{v(n, j), v(n, j + 1)}, BoundaryTag::Traction});
  for (int i = 0; i < n; ++i) mesh.boundary_edges.push_back({{v(i + 1, n), v(i, n)}, BoundaryTag::Traction});
  for (int j = 0; j < n; ++j) {
    mesh.boundary_edges.push_back({{v(0, j + 1), v(0, j)}, BoundaryTag::NormalClamp});
  }
  return mesh;
}

Mesh generate_cavity_mesh(int nx, int ny, double amplitude) {
  if (nx < 2 || ny < 1) throw MeshError("generate_cavity_mesh requires nx >= 2 and ny >= 1");
  if (amplitude < 0.0) throw MeshError("bed amplitude must be non-negative");
  if (amplitude >= 1.0) throw MeshError("bed amplitude must be below 1 (degenerate column height)");

  Mesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = static_cast<double>(i) / nx;
      // x = 0 and x = 1 must give bitwise identical heights for periodic pairing.
      const double b = cosine_bed(i == nx ? 0.0 : x, amplitude);
      mesh.vertices.push_back({x, b + (1.0 - b) * static_cast<double>(j) / ny});
    }
  }
  structured_triangles(mesh, nx, ny);

  const auto v = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int i = 0; i < nx; ++i) mesh.boundary_edges.push_back({{v(i, 0), v(i + 1, 0)}, BoundaryTag::BedContact});
  for (int i = 0; i < nx; ++i) mesh.boundary_edges.push_back({{v(i + 1, ny), v(i, ny)}, BoundaryTag::Traction});
  for (int j = 0; j <= ny; ++j) mesh.periodic_pairs.push_back({v(0, j), v(nx, j)});
  return mesh;
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh fine;
  fine.vertices = mesh.vertices;
  std::map<EdgeKey, int> midpoint;
  const auto mid = [&](int a, int b) {
    const auto k = key(a, b);
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    const Point& pa = mesh.vertices[a];
    const Point& pb = mesh.vertices[b];
    const int id = static_cast<int>(fine.vertices.size());
    fine.vertices.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
    midpoint.emplace(k, id);
    return id;
  };

  fine.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    fine.triangles.push_back({t[0], m01, m20});
    fine.triangles.push_back({m01, t[1], m12});
    fine.triangles.push_back({m20, m12, t[2]});
    fine.triangles.push_back({m01, m12, m20});
  }

  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint.at(key(e.v[0], e.v[1]));
    fine.boundary_edges.push_back({{e.v[0], m}, e.tag});
    fine.boundary_edges.push_back({{m, e.v[1]}, e.tag});
  }

  // Existing pairs carry over; midpoints of paired side edges become new pairs.
  fine.periodic_pairs = mesh.periodic_pairs;
  std::map<int, int> partner;
  for (const auto& p : mesh.periodic_pairs) partner[p.left] = p.right;
  for (const auto& [k, m] : midpoint) {
    const auto ia = partner.find(k.first);
    const auto ib = partner.find(k.second);
    if (ia == partner.end() || ib == partner.end()) continue;
    const auto other = midpoint.find(key(ia->second, ib->second));
    if (other != midpoint.end()) fine.periodic_pairs.push_back({m, other->second});
  }
  return fine;
}

Mesh deform_to_profile(const Mesh& mesh, std::span<const double> roof) {
  const auto chain = bed_chain(mesh);
  if (roof.size() != chain.size()) {
    throw MeshError("deform_to_profile expects one height per bed vertex (" + std::to_string(chain.size()) +
                    "), got " + std::to_string(roof.size()));
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& p : mesh.vertices) top = std::max(top, p.y);

  std::vector<double> xs(chain.size());
  std::vector<double> old_bed(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    xs[k] = mesh.vertices[chain[k]].x;
    old_bed[k] = mesh.vertices[chain[k]].y;
    if (!(roof[k] < top)) throw MeshError("roof height reaches the top boundary");
  }

  // Piecewise linear interpolation along the chain.
  const auto interp = [&xs](std::span<const double> values, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = it == xs.begin() ? 1 : static_cast<std::size_t>(it - xs.begin());
    k = std::min(k, xs.size() - 1);
    if (x == xs[k]) return values[k];
    if (x == xs[k - 1]) return values[k - 1];
    const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - w) * values[k - 1] + w * values[k];
  };

  Mesh out = mesh;
  for (auto& p : out.vertices) {
    const double ob = interp(old_bed, p.x);
    const double nb = interp(roof, p.x);
    const double t = (p.y - ob) / (top - ob);
    p.y = (p.y == top) ? top : nb + t * (top - nb);
  }
  for (std::size_t k = 0; k < chain.size(); ++k) out.vertices[chain[k]].y = roof[k];

  for (int t = 0; t < static_cast<int>(out.triangles.size()); ++t) {
    if (!(signed_area(out, t) > 0.0)) {
      throw MeshError("deformation produced a non-positive triangle area (triangle " + std::to_string(t) + ")");
    }
  }
  for (const auto& pp : out.periodic_pairs) {
    if (std::abs(out.vertices[pp.left].y - out.vertices[pp.right].y) > 1e-12) {
      throw MeshError("deformation broke periodic pairing; roof must be periodic");
    }
  }
  return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "vertices " << mesh.vertices.size() << '\n';
  for (const auto& p : mesh.vertices) buf << p.x << ' ' << p.y << '\n';
  buf << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) buf << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  buf << "boundary_edges " << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) buf << e.v[0] << ' ' << e.v[1] << ' ' << to_string(e.tag) << '\n';
  buf << "periodic_pairs " << mesh.periodic_pairs.size() << '\n';
  for (const auto& p : mesh.periodic_pairs) buf << p.left << ' ' << p.right << '\n';
  os << buf.str();
}

Mesh read_mesh(std::istream& is) {
  const auto header = [&is](const char* expected) {
    std::string word;
    std::size_t count = 0;
    if (!(is >> word >> count) || word != expected) {
      throw MeshError(std::string("mesh file: expected section '") + expected + "'");
    }
    return count;
  };
  const auto check = [&is](const char* what) {
    if (!is) throw MeshError(std::string("mesh file: malformed ") + what + " line");
  };

  Mesh mesh;
  mesh.vertices.resize(header("vertices"));
  for (auto& p : mesh.vertices) {
    is >> p.x >> p.y;
    check("vertex");
  }
  mesh.triangles.resize(header("triangles"));
  for (auto& t : mesh.triangles) {
    is >> t[0] >> t[1] >> t[2];
    check("triangle");
  }
  mesh.boundary_edges.resize(header("boundary_edges"));
  for (auto& e : mesh.boundary_edges) {
    std::string tag;
    is >> e.v[0] >> e.v[1] >> tag;
    check("boundary edge");
    e.tag = parse_boundary_tag(tag);
  }
  // The periodic section is optional.
  std::string word;
  if (is >> word) {
    if (word != "periodic_pairs") throw MeshError("mesh file: unexpected section '" + word + "'");
    std::size_t count = 0;
    is >> count;
    check("periodic header");
    mesh.periodic_pairs.resize(count);
    for (auto& p : mesh.periodic_pairs) {
      is >> p.left >> p.right;
      check("periodic pair");
    }
  }
  validate(mesh);
  return mesh;
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_mesh(os, mesh);
  if (!os) throw std::runtime_error("error writing '" + path.string() + "'");
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open mesh file '" + path.string() + "'");
  return read_mesh(is);
}

}  // namespace rstokes
