#include "rstokes/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "rstokes/fe.hpp"
#include "rstokes/quadrature.hpp"

namespace rstokes {

namespace {

constexpr double kOriginTol = 1e-14;
// Cells touching the origin: the outer graded interval [0.2, 1] still sees
// the singular factor at close range, so these few cells get a richer rule.
constexpr int kGradedDegreeBoost = 14;

double edge_average(const std::function<double(double)>& f, double a, double b) {
  constexpr double kink = 0.5;
  double integral = 0.0;
  if (a < kink && kink < b) {
    integral = adaptive_integral(f, a, kink) + adaptive_integral(f, kink, b);
  } else {
    integral = adaptive_integral(f, a, b);
  }
  return integral / (b - a);
}

std::pair<double, double> bed_interval(const TraceOperator& trace, int e) {
  const double a = trace.endpoints[e][0].x;
  const double b = trace.endpoints[e][1].x;
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

double exact_multiplier_average(const ExactFields& exact, double a, double b) {
  const double g1 = exact.gamma_exp + 1.0;
  return -(std::pow(b, g1) - std::pow(a, g1)) / (g1 * (b - a));
}

std::unique_ptr<MmsDiscretization> make_mms_discretization(Mesh mesh, double r, const MmsSettings& settings) {
  auto disc = std::make_unique<MmsDiscretization>();
  disc->mesh = std::move(mesh);
  validate(disc->mesh);
  disc->spaces = build_spaces(disc->mesh);
  disc->rheology = make_rheology_from_r(settings.glen_A, r, settings.eps_reg);
  disc->exact = exact_fields(r);

  const Mesh& m = disc->mesh;
  const Spaces& s = disc->spaces;
  ContactProblem& prob = disc->problem;
  prob.A = make_power_law_operator(m, s, disc->rheology, settings.assembly);
  prob.B = assemble_B(m, s);
  // Bed normal points into the domain, so that u_hat . n = -x^alpha and the
  // obstacles make both contact conditions active.
  prob.trace = normal_trace(m, s, BedNormal::Inward);
  prob.f = assemble_load_mms(m, s, prob.trace, disc->rheology, disc->exact, settings.load);

  for (const ClampDof& c : s.clamp_dofs) {
    const Point& p = s.node_points[c.node];
    prob.fixed_dofs.push_back(c.dof);
    prob.fixed_values.push_back(disc->exact.velocity(p.x, p.y)[c.component]);
  }
  for (int dof : s.noslip_dofs) {
    prob.fixed_dofs.push_back(dof);
    prob.fixed_values.push_back(0.0);
  }

  const int nm = s.n_multiplier();
  prob.obstacles = Obstacles::zeros(nm);
  const ExactFields& ex = disc->exact;
  for (int e = 0; e < nm; ++e) {
    const auto [a, b] = bed_interval(prob.trace, e);
    prob.obstacles.chi_bar[e] = edge_average([&](double x) { return ex.chi(x); }, a, b);
    prob.obstacles.rho_bar[e] = edge_average([&](double x) { return ex.rho(x); }, a, b);
  }
  disc->cone = vertical_cone(m, s, prob.trace, r, prob.fixed_dofs);
  return disc;
}

ErrorRecord error_norms(const MmsDiscretization& disc, const MixedState& state, int degree) {
  const Mesh& mesh = disc.mesh;
  const Spaces& spaces = disc.spaces;
  const ExactFields& ex = disc.exact;
  const double r = disc.rheology.r;
  const double rc = disc.rheology.r_conjugate();

  const QuadratureRule plain = triangle_rule(degree);
  std::array<QuadratureRule, 3> graded;
  for (int v = 0; v < 3; ++v) graded[v] = graded_triangle_rule(degree + kGradedDegreeBoost, v);

  // Error samples for the rigid decomposition.
  FieldSamples err;
  double sum_D = 0.0, sum_V = 0.0, sum_F = 0.0, sum_p = 0.0;
  const auto F = [r](const std::array<std::array<double, 2>, 2>& g) {
    const double n = std::sqrt(g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]);
    const double s = n > 0.0 ? std::pow(n, 0.5 * (r - 2.0)) : 0.0;
    return std::array<std::array<double, 2>, 2>{{{s * g[0][0], s * g[0][1]}, {s * g[1][0], s * g[1][1]}}};
  };

  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const QuadratureRule* rule = &plain;
    for (int v = 0; v < 3; ++v) {
      const Point& p = mesh.vertices[mesh.triangles[t][v]];
      if (std::hypot(p.x, p.y) < kOriginTol) rule = &graded[v];
    }
    const CellMap map = cell_map(mesh, t);
    const auto dofs = spaces.cell_velocity_dofs(t);
    const double ph = state.p[t];
    for (std::size_t q = 0; q < rule->size(); ++q) {
      const auto [xi, eta] = rule->points[q];
      const double w = rule->weights[q] * std::abs(map.det);
      const Point x = map.map(xi, eta);
      const ShapeValues phi = p2_values(xi, eta);
      const ShapeGradients grad = map.gradients(p2_reference_gradients(xi, eta));
      std::array<double, 2> uh{};
      std::array<std::array<double, 2>, 2> gh{};
      for (int k = 0; k < kP2Nodes; ++k) {
        for (int c = 0; c < 2; ++c) {
          const double coef = state.u[dofs[2 * k + c]];
          uh[c] += coef * phi[k];
          gh[c][0] += coef * grad[k][0];
          gh[c][1] += coef * grad[k][1];
        }
      }
      const auto ue = ex.velocity(x.x, x.y);
      const auto ge = ex.velocity_gradient(x.x, x.y);
      std::array<double, 2> e{ue[0] - uh[0], ue[1] - uh[1]};
      std::array<std::array<double, 2>, 2> ge_err{};
      std::array<std::array<double, 2>, 2> de{}, dh{};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          ge_err[i][j] = ge[i][j] - gh[i][j];
          de[i][j] = 0.5 * (ge[i][j] + ge[j][i]);
          dh[i][j] = 0.5 * (gh[i][j] + gh[j][i]);
        }
      }
      double dd = 0.0, gg = 0.0, ff = 0.0;
      const auto fe = F(de);
      const auto fh = F(dh);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          dd += (de[i][j] - dh[i][j]) * (de[i][j] - dh[i][j]);
          gg += ge_err[i][j] * ge_err[i][j];
          ff += (fe[i][j] - fh[i][j]) * (fe[i][j] - fh[i][j]);
        }
      }
      sum_D += w * std::pow(std::sqrt(dd), r);
      sum_V += w * (std::pow(std::hypot(e[0], e[1]), r) + std::pow(std::sqrt(gg), r));
      sum_F += w * ff;
      sum_p += w * std::pow(std::abs(ex.pressure(x.x, x.y) - ph), rc);
      err.values.push_back(e);
      err.gradients.push_back({ge_err[0][0], ge_err[0][1], ge_err[1][0], ge_err[1][1]});
      err.weights.push_back(w);
    }
  }

  const TraceOperator& trace = disc.problem.trace;
  double sum_l = 0.0;
  for (int e = 0; e < static_cast<int>(trace.lengths.size()); ++e) {
    const auto [a, b] = bed_interval(trace, e);
    const double diff = exact_multiplier_average(ex, a, b) - state.lambda[e];
    sum_l += trace.lengths[e] * std::pow(std::abs(diff), rc);
  }

  ErrorRecord rec;
  rec.h = max_diameter(mesh);
  rec.err_D = std::pow(sum_D, 1.0 / r);
  rec.err_V = std::pow(sum_V, 1.0 / r);
  rec.err_F = std::sqrt(sum_F);
  rec.err_p = std::pow(sum_p, 1.0 / rc);
  rec.err_lambda = std::pow(rec.h, 1.0 / rc) * std::pow(sum_l, 1.0 / rc);
  const RigidProjection proj = rigid_projection(err, disc.cone.direction, r);
  rec.rigid_part = proj.rigid_norm;
  rec.nonrigid_part = proj.remainder_norm;
  return rec;
}

MmsSolution solve_mms(const MmsDiscretization& disc, const MmsSettings& settings, const MixedState* initial) {
  const ContactProblem& prob = disc.problem;
  MixedState start;
  if (initial) {
    start = *initial;
  } else {
    start.u = Vector::Zero(prob.n_velocity());
    start.p = Vector::Zero(prob.n_pressure());
    start.lambda = Vector::Zero(prob.n_multiplier());
  }
  MmsSolution sol;
  sol.compatibility = compatibility_check(prob.f, disc.cone);
  NewtonResult res = semismooth_newton(prob, settings.newton, std::move(start));
  sol.state = std::move(res.state);
  sol.stats = std::move(res.stats);
  sol.diagnostics = contact_diagnostics(prob, sol.state);
  sol.errors = error_norms(disc, sol.state, settings.error_degree);
  return sol;
}

MmsSolution solve_mms(const Mesh& mesh, double r, const MmsSettings& settings) {
  if (!settings.continuation || r >= 2.0) {
    auto disc = make_mms_discretization(mesh, r, settings);
    return solve_mms(*disc, settings);
  }
  MixedState guess;
  {
    auto linear = make_mms_discretization(mesh, 2.0, settings);
    guess = solve_mms(*linear, settings).state;
  }
  auto disc = make_mms_discretization(mesh, r, settings);
  return solve_mms(*disc, settings, &guess);
}

std::vector<ConvergenceRow> convergence_study(const std::vector<double>& rs, int base_n, int levels,
                                              const MmsSettings& settings) {
  std::vector<ConvergenceRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double r : rs) {
    for (int k = 0; k < levels; ++k) {
      const int n = base_n << k;
      const MmsSolution sol = solve_mms(generate_unit_square(n), r, settings);
      ConvergenceRow row{r, n, sol.errors, nan, nan, nan, nan, sol.stats.iterations,
                         sol.stats.residuals, sol.diagnostics, sol.compatibility};
      if (k > 0) {
        const ConvergenceRow* prev = &rows.back();
        const double hr = std::log(prev->errors.h / row.errors.h);
        row.order_D = std::log(prev->errors.err_D / row.errors.err_D) / hr;
        row.order_V = std::log(prev->errors.err_V / row.errors.err_V) / hr;
        row.order_p = std::log(prev->errors.err_p / row.errors.err_p) / hr;
        row.order_lambda = std::log(prev->errors.err_lambda / row.errors.err_lambda) / hr;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "r,h,err_D,order_D,err_V,order_V,err_p,order_p,err_lambda,order_lambda,newton_iters\n";
  os << std::setprecision(12);
  for (const auto& row : rows) {
    const auto& e = row.errors;
    os << row.r << ',' << e.h << ',' << e.err_D << ',' << row.order_D << ',' << e.err_V << ',' << row.order_V
       << ',' << e.err_p << ',' << row.order_p << ',' << e.err_lambda << ',' << row.order_lambda << ','
       << row.newton_iters << '\n';
  }
}

}  // namespace rstokes
