// Rigid motions admissible for the contact condition, the compatibility test
// on the load, and the projection of a velocity field onto the rigid cone.
#pragma once

#include <array>
#include <vector>

#include "rstokes/mesh.hpp"
#include "rstokes/spaces.hpp"
#include "rstokes/sparse.hpp"

namespace rstokes {

/// Cone generated by the uniform motion with direction `direction`. Members
/// theta * g with theta >= 0 satisfy Gamma (theta g) <= 0.
struct RigidCone {
  std::array<double, 2> direction{0.0, 1.0};
  Vector generator;       // velocity coefficients of g
  double generator_norm;  // ||g||_{W^{1,r}} = |Omega|^{1/r} |direction|
};

/// Uniform vertical motion with Gamma g <= 0 on every bed edge. Throws
/// std::runtime_error if no vertical direction qualifies or an essential
/// condition blocks vertical motion.
RigidCone vertical_cone(const Mesh& mesh, const Spaces& spaces, const TraceOperator& trace, double r,
                        const std::vector<int>& fixed_dofs);

struct CompatibilityReport {
  double pairing = 0.0;  // f^T g
  double margin = 0.0;   // -f^T g / ||g||
  bool pass = false;     // pairing < 0
};

CompatibilityReport compatibility_check(const Vector& load, const RigidCone& cone);

/// Velocity values and weights at quadrature points; the W^{1,r} distance to
/// a uniform field only involves values since gradients are unaffected.
struct FieldSamples {
  std::vector<std::array<double, 2>> values;
  std::vector<std::array<double, 4>> gradients;  // du1/dx, du1/dy, du2/dx, du2/dy
  std::vector<double> weights;
};

FieldSamples sample_velocity(const Mesh& mesh, const Spaces& spaces, const Vector& u, int degree = 6);

/// W^{1,r} norm of the sampled field.
double w1r_norm(const FieldSamples& samples, double r);

struct RigidProjection {
  double theta = 0.0;
  double rigid_norm = 0.0;     // ||theta g||_{W^{1,r}}
  double remainder_norm = 0.0; // ||v - theta g||_{W^{1,r}}
};

/// argmin over theta >= 0 of ||v - theta g||_{W^{1,r}}: root of the derivative
/// on the bracket spanned by the sampled values (TOMS 748).
RigidProjection rigid_projection(const FieldSamples& samples, const std::array<double, 2>& direction, double r);

}  // namespace rstokes
