#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rstokes/mesh.hpp"

using namespace rstokes;

namespace {

int count_tag(const Mesh& m, BoundaryTag tag) {
  int n = 0;
  for (const auto& e : m.boundary_edges) n += e.tag == tag;
  return n;
}

}  // namespace

TEST(UnitSquare, MinimalMesh) {
  const Mesh m = generate_unit_square(1);
  EXPECT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.boundary_edges.size(), 4u);
  EXPECT_NEAR(max_diameter(m), std::sqrt(2.0), 1e-15);
  EXPECT_NO_THROW(validate(m));
}

TEST(UnitSquare, TwoCellsPerSide) {
  const Mesh m = generate_unit_square(2);
  EXPECT_EQ(m.triangles.size(), 8u);
  EXPECT_NEAR(max_diameter(m), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(max_diameter(generate_unit_square(4)), 3.5355339e-1, 1e-8);
}

TEST(UnitSquare, BedCoversUnitInterval) {
  const Mesh m = generate_unit_square(4);
  EXPECT_EQ(count_tag(m, BoundaryTag::BedContact), 4);
  const auto chain = bed_chain(m);
  ASSERT_EQ(chain.size(), 5u);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    EXPECT_DOUBLE_EQ(m.vertices[chain[i]].x, 0.25 * static_cast<double>(i));
    EXPECT_DOUBLE_EQ(m.vertices[chain[i]].y, 0.0);
  }
  EXPECT_DOUBLE_EQ(total_area(m), 1.0);
}

TEST(UnitSquare, RejectsNonPositiveSize) { EXPECT_THROW(generate_unit_square(0), MeshError); }

TEST(CavityMesh, FlatBed) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.0);
  for (int v : bed_chain(m)) EXPECT_EQ(m.vertices[v].y, 0.0);
}

TEST(CavityMesh, CosineBed) {
  const Mesh m = generate_cavity_mesh(32, 32, 0.08);
  EXPECT_EQ(count_tag(m, BoundaryTag::BedContact), 32);
  double lo = 1.0;
  double hi = -1.0;
  for (int v : bed_chain(m)) {
    lo = std::min(lo, m.vertices[v].y);
    hi = std::max(hi, m.vertices[v].y);
  }
  EXPECT_NEAR(lo, -0.04, 1e-15);
  EXPECT_NEAR(hi, 0.04, 1e-15);
  EXPECT_NO_THROW(validate(m));
}

TEST(CavityMesh, PeriodicPairs) {
  const int ny = 3;
  const Mesh m = generate_cavity_mesh(4, ny, 0.08);
  ASSERT_EQ(m.periodic_pairs.size(), static_cast<std::size_t>(ny + 1));
  for (const auto& p : m.periodic_pairs) {
    EXPECT_EQ(m.vertices[p.left].x, 0.0);
    EXPECT_EQ(m.vertices[p.right].x, 1.0);
    EXPECT_NEAR(m.vertices[p.left].y, m.vertices[p.right].y, 1e-12);
  }
}

TEST(Validate, DetectsInvertedTriangle) {
  Mesh m = generate_unit_square(2);
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  EXPECT_THROW(validate(m), MeshError);
}

TEST(Validate, DetectsMissingBoundaryEdge) {
  Mesh m = generate_unit_square(2);
  m.boundary_edges.pop_back();
  EXPECT_THROW(validate(m), MeshError);
}

TEST(Validate, DetectsDuplicateTag) {
  Mesh m = generate_unit_square(2);
  m.boundary_edges.push_back(m.boundary_edges.front());
  EXPECT_THROW(validate(m), MeshError);
}

TEST(Validate, DetectsPeriodicMismatch) {
  Mesh m = generate_cavity_mesh(4, 2, 0.0);
  m.vertices[m.periodic_pairs[1].right].y += 1e-9;
  EXPECT_THROW(validate(m), MeshError);
}

TEST(Refine, QuadruplesTriangles) {
  const Mesh m = generate_unit_square(1);
  const Mesh r = refine_uniform(m);
  EXPECT_EQ(r.triangles.size(), 8u);
  EXPECT_NEAR(max_diameter(refine_uniform(generate_unit_square(2))), 0.35355339059327373, 1e-15);
  EXPECT_EQ(count_tag(r, BoundaryTag::BedContact), 2 * count_tag(m, BoundaryTag::BedContact));
  EXPECT_NO_THROW(validate(r));
}

TEST(Refine, KeepsPeriodicStructure) {
  const Mesh r = refine_uniform(generate_cavity_mesh(4, 2, 0.08));
  EXPECT_NO_THROW(validate(r));
  EXPECT_EQ(r.periodic_pairs.size(), 5u);
}

TEST(Deform, IdentityProfile) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  std::vector<double> roof;
  for (int v : bed_chain(m)) roof.push_back(m.vertices[v].y);
  const Mesh d = deform_to_profile(m, roof);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    EXPECT_NEAR(d.vertices[i].x, m.vertices[i].x, 1e-14);
    EXPECT_NEAR(d.vertices[i].y, m.vertices[i].y, 1e-14);
  }
}

TEST(Deform, UniformLift) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  const auto chain = bed_chain(m);
  std::vector<double> roof;
  for (int v : chain) roof.push_back(m.vertices[v].y + 0.01);
  const Mesh d = deform_to_profile(m, roof);
  for (int v : chain) EXPECT_NEAR(d.vertices[v].y, m.vertices[v].y + 0.01, 1e-15);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    if (m.vertices[i].y == 1.0) {
      EXPECT_EQ(d.vertices[i].y, 1.0);
    }
  }
}

TEST(Deform, RandomAdmissibleRoofKeepsOrientation) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  const auto chain = bed_chain(m);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lift(0.0, 0.05);
  std::vector<double> roof;
  for (int v : chain) roof.push_back(m.vertices[v].y + lift(rng));
  roof.back() = roof.front();
  const Mesh d = deform_to_profile(m, roof);
  EXPECT_EQ(d.triangles, m.triangles);
  for (int t = 0; t < static_cast<int>(d.triangles.size()); ++t) EXPECT_GT(signed_area(d, t), 0.0);
  EXPECT_NO_THROW(validate(d));
}

TEST(MeshIo, RoundTrip) {
  const Mesh m = generate_cavity_mesh(6, 3, 0.08);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    EXPECT_EQ(r.vertices[i].x, m.vertices[i].x);
    EXPECT_EQ(r.vertices[i].y, m.vertices[i].y);
  }
  EXPECT_EQ(r.triangles, m.triangles);
  ASSERT_EQ(r.boundary_edges.size(), m.boundary_edges.size());
  for (std::size_t i = 0; i < m.boundary_edges.size(); ++i) {
    EXPECT_EQ(r.boundary_edges[i].v, m.boundary_edges[i].v);
    EXPECT_EQ(r.boundary_edges[i].tag, m.boundary_edges[i].tag);
  }
  EXPECT_EQ(r.periodic_pairs.size(), m.periodic_pairs.size());
}

TEST(MeshIo, RejectsGarbage) {
  std::stringstream ss("not a mesh");
  EXPECT_THROW(read_mesh(ss), MeshError);
}

TEST(BoundaryTags, NamesRoundTrip) {
  for (BoundaryTag t : {BoundaryTag::BedContact, BoundaryTag::Traction, BoundaryTag::NormalClamp,
                        BoundaryTag::NoSlip}) {
    EXPECT_EQ(parse_boundary_tag(to_string(t)), t);
  }
}
