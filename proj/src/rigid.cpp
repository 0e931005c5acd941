#include "rstokes/rigid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

#include "rstokes/fe.hpp"
#include "rstokes/quadrature.hpp"

namespace rstokes {

RigidCone vertical_cone(const Mesh& mesh, const Spaces& spaces, const TraceOperator& trace, double r,
                        const std::vector<int>& fixed_dofs) {
  RigidCone cone;
  cone.generator = Vector::Zero(spaces.n_velocity());
  for (int node = 0; node < spaces.num_nodes; ++node) cone.generator[Spaces::velocity_dof(node, 1)] = 1.0;
  for (int dof : fixed_dofs) {
    if (cone.generator[dof] != 0.0) throw std::runtime_error("vertical motion is blocked by an essential condition");
  }
  Vector g_n = trace.gamma * cone.generator;
  if (g_n.size() > 0 && g_n.maxCoeff() > 1e-12) {
    cone.generator = -cone.generator;
    cone.direction = {0.0, -1.0};
    g_n = -g_n;
  }
  if (g_n.size() > 0 && g_n.maxCoeff() > 1e-12) {
    throw std::runtime_error("neither vertical direction keeps contact on every bed edge");
  }
  cone.generator_norm = std::pow(total_area(mesh), 1.0 / r);
  return cone;
}

CompatibilityReport compatibility_check(const Vector& load, const RigidCone& cone) {
  CompatibilityReport report;
  report.pairing = load.dot(cone.generator);
  report.margin = -report.pairing / cone.generator_norm;
  report.pass = report.pairing < 0.0;
  return report;
}

FieldSamples sample_velocity(const Mesh& mesh, const Spaces& spaces, const Vector& u, int degree) {
  const QuadratureRule rule = triangle_rule(degree);
  FieldSamples s;
  const std::size_t n = mesh.triangles.size() * rule.size();
  s.values.reserve(n);
  s.gradients.reserve(n);
  s.weights.reserve(n);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const CellMap map = cell_map(mesh, t);
    const auto dofs = spaces.cell_velocity_dofs(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto [xi, eta] = rule.points[q];
      const ShapeValues phi = p2_values(xi, eta);
      const ShapeGradients grad = map.gradients(p2_reference_gradients(xi, eta));
      std::array<double, 2> v{};
      std::array<double, 4> g{};
      for (int k = 0; k < kP2Nodes; ++k) {
        for (int c = 0; c < 2; ++c) {
          const double coef = u[dofs[2 * k + c]];
          v[c] += coef * phi[k];
          g[2 * c] += coef * grad[k][0];
          g[2 * c + 1] += coef * grad[k][1];
        }
      }
      s.values.push_back(v);
      s.gradients.push_back(g);
      s.weights.push_back(rule.weights[q] * std::abs(map.det));
    }
  }
  return s;
}

namespace {

double lr_part(const FieldSamples& s, double r, const std::array<double, 2>& d, double theta) {
  double sum = 0.0;
  for (std::size_t q = 0; q < s.weights.size(); ++q) {
    const double a = s.values[q][0] - theta * d[0];
    const double b = s.values[q][1] - theta * d[1];
    sum += s.weights[q] * std::pow(std::hypot(a, b), r);
  }
  return sum;
}

double gradient_part(const FieldSamples& s, double r) {
  double sum = 0.0;
  for (std::size_t q = 0; q < s.weights.size(); ++q) {
    const auto& g = s.gradients[q];
    const double frob = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    sum += s.weights[q] * std::pow(frob, r);
  }
  return sum;
}

}  // namespace

double w1r_norm(const FieldSamples& samples, double r) {
  return std::pow(lr_part(samples, r, {0.0, 0.0}, 0.0) + gradient_part(samples, r), 1.0 / r);
}

RigidProjection rigid_projection(const FieldSamples& samples, const std::array<double, 2>& direction, double r) {
  const double dd = direction[0] * direction[0] + direction[1] * direction[1];
  if (!(dd > 0.0)) throw std::invalid_argument("rigid direction must be nonzero");
  // Each sample's distance is minimized at v.d/|d|^2, so the minimizer lies
  // between the extreme projections.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : samples.values) {
    const double s = (v[0] * direction[0] + v[1] * direction[1]) / dd;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  lo = std::max(lo, 0.0);
  hi = std::max(hi, 0.0);

  RigidProjection out;
  out.theta = lo;
  // The objective is convex and C^1 for r > 1; its minimizer is the root of
  // the derivative, which is increasing in theta.
  const auto slope = [&](double theta) {
    double sum = 0.0;
    for (std::size_t q = 0; q < samples.weights.size(); ++q) {
      const double a = samples.values[q][0] - theta * direction[0];
      const double b = samples.values[q][1] - theta * direction[1];
      const double dist = std::hypot(a, b);
      if (dist > 0.0) sum -= samples.weights[q] * std::pow(dist, r - 2.0) * (a * direction[0] + b * direction[1]);
    }
    return sum;
  };
  if (hi > lo) {
    const double s_lo = slope(lo);
    const double s_hi = slope(hi);
    if (s_lo < 0.0 && s_hi > 0.0) {
      std::uintmax_t max_iter = 200;
      const auto [a, b] = boost::math::tools::toms748_solve(slope, lo, hi, s_lo, s_hi,
                                                           boost::math::tools::eps_tolerance<double>(), max_iter);
      out.theta = 0.5 * (a + b);
    } else if (s_hi <= 0.0) {
      out.theta = hi;
    }
  }
  double area = 0.0;
  for (double w : samples.weights) area += w;
  out.rigid_norm = out.theta * std::sqrt(dd) * std::pow(area, 1.0 / r);
  out.remainder_norm = std::pow(lr_part(samples, r, direction, out.theta) + gradient_part(samples, r), 1.0 / r);
  return out;
}

}  // namespace rstokes
