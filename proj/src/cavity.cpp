#include "rstokes/cavity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "rstokes/rheology.hpp"
#include "rstokes/spaces.hpp"

namespace rstokes {

void validate(const CavityConfig& c) {
  if (c.nx < 2 || c.ny < 1) throw std::invalid_argument("cavity mesh needs nx >= 2 and ny >= 1");
  if (!(c.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(c.t_end >= 0.0)) throw std::invalid_argument("t_end must be non-negative");
  if (!(c.steady_tol > 0.0)) throw std::invalid_argument("steady_tol must be positive");
  if (c.p_e < 0.0) throw std::invalid_argument("p_e must be non-negative");
  if (!(c.eps_reg > 0.0) && c.glen_n != 1.0) throw std::invalid_argument("eps_reg must be positive for n > 1");
}

double roof_courant_number(const CavityConfig& c) { return std::abs(c.u_i) * c.dt * c.nx; }

CavityState initial_cavity_state(const CavityConfig& config) {
  validate(config);
  CavityState s;
  s.mesh = generate_cavity_mesh(config.nx, config.ny, config.amplitude);
  for (int v : bed_chain(s.mesh)) {
    s.x.push_back(s.mesh.vertices[v].x);
    s.bed.push_back(s.mesh.vertices[v].y);
  }
  s.roof = s.bed;
  return s;
}

std::vector<char> attached_edges(std::span<const double> roof, std::span<const double> bed) {
  std::vector<char> on(roof.size() - 1, 0);
  for (std::size_t i = 0; i + 1 < roof.size(); ++i) {
    on[i] = (roof[i] - bed[i] <= kAttachTol) || (roof[i + 1] - bed[i + 1] <= kAttachTol);
  }
  return on;
}

std::vector<double> advect_roof(std::span<const double> x, std::span<const double> roof, std::span<const double> bed,
                                std::span<const double> gamma_n_u, double dt) {
  const std::size_t ne = gamma_n_u.size();
  if (roof.size() != ne + 1 || x.size() != ne + 1 || bed.size() != ne + 1) {
    throw std::invalid_argument("advect_roof: chain arrays must have one entry more than the edge values");
  }
  std::vector<double> h(roof.begin(), roof.end());
  for (std::size_t i = 0; i < ne; ++i) {
    const std::size_t e = i == 0 ? ne - 1 : i - 1;
    const double s = (roof[e + 1] - roof[e]) / (x[e + 1] - x[e]);
    h[i] = std::max(roof[i] - dt * gamma_n_u[e] * std::sqrt(1.0 + s * s), bed[i]);
  }
  h[ne] = h[0];
  return h;
}

double cavity_volume(std::span<const double> x, std::span<const double> roof, std::span<const double> bed) {
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    v += 0.5 * (x[i + 1] - x[i]) * ((roof[i] - bed[i]) + (roof[i + 1] - bed[i + 1]));
  }
  return v;
}

namespace {

ContactProblem cavity_problem(const Mesh& mesh, const Spaces& spaces, const Rheology& rheology,
                              const CavityConfig& config, const std::vector<char>& enabled) {
  ContactProblem prob;
  prob.A = make_power_law_operator(mesh, spaces, rheology, config.assembly);
  prob.B = assemble_B(mesh, spaces);
  prob.trace = normal_trace(mesh, spaces);
  prob.f = assemble_load_cavity(mesh, spaces, config.p_e);
  for (int node : boundary_nodes(mesh, spaces, BoundaryTag::Traction)) {
    prob.fixed_dofs.push_back(Spaces::velocity_dof(node, 0));
    prob.fixed_values.push_back(config.u_i);
  }
  prob.obstacles = Obstacles::zeros(spaces.n_multiplier());
  prob.obstacles.enabled = enabled;
  return prob;
}

}  // namespace

CavitySolve solve_cavity(CavityState& state, const CavityConfig& config) {
  const Spaces spaces = build_spaces(state.mesh);
  const Rheology rheology = make_rheology(config.glen_A, config.glen_n, config.eps_reg);
  CavitySolve out;
  out.time = state.time;
  out.enabled = attached_edges(state.roof, state.bed);
  const ContactProblem prob = cavity_problem(state.mesh, spaces, rheology, config, out.enabled);

  const RigidCone cone = vertical_cone(state.mesh, spaces, prob.trace, rheology.r, prob.fixed_dofs);
  out.compatibility = compatibility_check(prob.f, cone);
  if (!out.compatibility.pass) {
    throw CompatibilityError("cavity load fails the compatibility condition (pairing " +
                                 std::to_string(out.compatibility.pairing) + "); p_e must be positive",
                             out.compatibility);
  }

  MixedState guess = state.solution;
  if (guess.u.size() != spaces.n_velocity() && rheology.r < 2.0) {
    // Cold start: linear solve first.
    const Rheology linear = make_rheology(config.glen_A, 1.0, config.eps_reg);
    ContactProblem lin = cavity_problem(state.mesh, spaces, linear, config, out.enabled);
    guess = semismooth_newton(lin, config.newton, MixedState{}).state;
  }
  NewtonResult res = semismooth_newton(prob, config.newton, std::move(guess));
  state.solution = std::move(res.state);
  out.stats = std::move(res.stats);
  out.diagnostics = contact_diagnostics(prob, state.solution);
  out.gamma_n_u = prob.trace.apply(state.solution.u);
  out.lambda.assign(state.solution.lambda.data(), state.solution.lambda.data() + state.solution.lambda.size());
  for (double g : out.gamma_n_u) out.max_abs_gnu = std::max(out.max_abs_gnu, std::abs(g));
  out.active_edges = static_cast<int>(std::count(out.stats.active.begin(), out.stats.active.end(), 1));
  out.cavity_volume = cavity_volume(state.x, state.roof, state.bed);
  return out;
}

CompatibilityReport cavity_compatibility(const CavityState& state, const CavityConfig& config) {
  const Spaces spaces = build_spaces(state.mesh);
  const Rheology rheology = make_rheology(config.glen_A, config.glen_n, config.eps_reg);
  const auto enabled = attached_edges(state.roof, state.bed);
  const ContactProblem prob = cavity_problem(state.mesh, spaces, rheology, config, enabled);
  return compatibility_check(prob.f, vertical_cone(state.mesh, spaces, prob.trace, rheology.r, prob.fixed_dofs));
}

void advance_cavity(CavityState& state, const CavitySolve& solve, const CavityConfig& config) {
  state.roof = advect_roof(state.x, state.roof, state.bed, solve.gamma_n_u, config.dt);
  state.mesh = deform_to_profile(state.mesh, state.roof);
  ++state.step;
  state.time = state.step * config.dt;
}

CavitySnapshot make_snapshot(const CavityState& state, const CavitySolve& solve) {
  CavitySnapshot snap;
  snap.time = solve.time;
  snap.mesh = state.mesh;
  const std::size_t ne = solve.gamma_n_u.size();
  for (std::size_t i = 0; i < ne; ++i) {
    const double xm = 0.5 * (state.x[i] + state.x[i + 1]);
    snap.x_mid.push_back(xm);
    snap.bed_mid.push_back(0.5 * (state.bed[i] + state.bed[i + 1]));
    snap.roof_mid.push_back(0.5 * (state.roof[i] + state.roof[i + 1]));
  }
  snap.gamma_n_u = solve.gamma_n_u;
  snap.enabled = solve.enabled;
  snap.lambda = solve.lambda;
  const Spaces spaces = build_spaces(state.mesh);
  for (int v = 0; v < spaces.num_vertices; ++v) {
    const int node = spaces.node_of_raw[v];
    snap.vertex_velocity.push_back({state.solution.u[Spaces::velocity_dof(node, 0)],
                                    state.solution.u[Spaces::velocity_dof(node, 1)]});
  }
  snap.cell_pressure.assign(state.solution.p.data(), state.solution.p.data() + state.solution.p.size());
  return snap;
}

ReattachmentPeak reattachment_peak(const CavitySnapshot& snap) {
  const int ne = static_cast<int>(snap.lambda.size());
  const auto detached = [&](int i) { return !snap.enabled[i]; };
  // Downstream end of the cavity: a free edge followed by a contact edge.
  int end = -1;
  for (int i = 0; i < ne; ++i) {
    if (detached(i) && !detached((i + 1) % ne)) {
      end = i;
      break;
    }
  }
  ReattachmentPeak peak;
  if (end < 0) return peak;
  int i = (end + 1) % ne;
  for (int k = 0; k < ne; ++k) {
    const int next = (i + 1) % ne;
    if (detached(next) || snap.lambda[next] >= snap.lambda[i]) break;
    i = next;
  }
  peak.edge = i;
  peak.x = snap.x_mid[i];
  peak.lambda = snap.lambda[i];
  return peak;
}

CavityRun run_cavity(const CavityConfig& config, const std::function<void(const CavitySolve&)>& on_step) {
  const auto start = std::chrono::steady_clock::now();
  CavityRun run;
  CavityState state = initial_cavity_state(config);
  std::vector<char> taken(config.snapshot_times.size(), 0);
  const int last_step = static_cast<int>(std::floor(config.t_end / config.dt + 1e-9));
  for (;;) {
    CavitySolve solve = solve_cavity(state, config);
    if (on_step) on_step(solve);
    const bool steady = solve.max_abs_gnu < config.steady_tol;
    if (steady && !run.steady) {
      run.steady = true;
      run.steady_time = solve.time;
    }
    const bool last = state.step >= last_step || (config.stop_at_steady && steady);
    bool snap = last;
    for (std::size_t k = 0; k < taken.size(); ++k) {
      if (!taken[k] && std::abs(config.snapshot_times[k] - solve.time) <= 0.5 * config.dt) {
        taken[k] = 1;
        snap = true;
      }
    }
    if (snap) run.snapshots.push_back(make_snapshot(state, solve));
    run.steps.push_back(std::move(solve));
    if (last) break;
    advance_cavity(state, run.steps.back(), config);
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace rstokes
