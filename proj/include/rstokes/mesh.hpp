// Triangulations with tagged boundary edges and optional periodic identification.
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rstokes {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag { BedContact, Traction, NormalClamp, NoSlip };

std::string_view to_string(BoundaryTag tag);
BoundaryTag parse_boundary_tag(std::string_view name);

/// A boundary edge stored in the orientation of its owning triangle, so the
/// outward normal of the edge a->b is (dy, -dx) / |e|.
struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Traction;
};

struct PeriodicPair {
  int left = -1;
  int right = -1;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<PeriodicPair> periodic_pairs;
};

double signed_area(const Mesh& mesh, int triangle);
double total_area(const Mesh& mesh);
double diameter(const Mesh& mesh, int triangle);
/// Maximum cell diameter h.
double max_diameter(const Mesh& mesh);

/// Throws MeshError if any structural invariant is violated.
void validate(const Mesh& mesh);

/// Indices into mesh.boundary_edges of the BedContact edges, ordered along the
/// bed chain by increasing x. Throws if the bed is not a single chain.
std::vector<int> bed_edges_ordered(const Mesh& mesh);
/// Vertices of the bed chain in order (one more than the number of bed edges).
std::vector<int> bed_chain(const Mesh& mesh);

/// b(x) = (amplitude / 2) cos(2 pi x).
double cosine_bed(double x, double amplitude);

Mesh generate_unit_square(int n);
Mesh generate_cavity_mesh(int nx, int ny, double amplitude);
Mesh refine_uniform(const Mesh& mesh);

/// Moves the bed chain vertices to the given heights (one per bed_chain
/// vertex) and restretches every vertex linearly between the new bed and the
/// fixed top of the mesh.
Mesh deform_to_profile(const Mesh& mesh, std::span<const double> roof);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace rstokes
