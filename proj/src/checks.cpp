#include "rstokes/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rstokes/cavity.hpp"
#include "rstokes/spaces.hpp"
#include "rstokes/verification.hpp"

namespace rstokes {

namespace {

Vector random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

std::string format(const char* label, double value) {
  std::ostringstream os;
  os << label << ' ' << value;
  return os.str();
}

}  // namespace

double max_asymmetry(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix diff = m - t;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

JacobianCheck jacobian_fd_check(const Mesh& mesh, const Rheology& rheology, int states, double step,
                                std::mt19937_64& rng, const AssemblyOptions& opts) {
  const Spaces spaces = build_spaces(mesh);
  JacobianCheck out;
  for (int s = 0; s < states; ++s) {
    const Vector u = random_vector(spaces.n_velocity(), rng);
    const Vector dir = random_vector(spaces.n_velocity(), rng);
    Vector Au;
    SparseMatrix J;
    assemble_A(mesh, spaces, rheology, u, Au, J, opts);
    const Vector plus = assemble_A_residual(mesh, spaces, rheology, u + step * dir, opts);
    const Vector minus = assemble_A_residual(mesh, spaces, rheology, u - step * dir, opts);
    const Vector fd = (plus - minus) / (2.0 * step);
    const Vector Jv = J * dir;
    out.max_rel_error = std::max(out.max_rel_error, (fd - Jv).norm() / Jv.norm());
    out.max_asymmetry = std::max(out.max_asymmetry, max_asymmetry(J));
    ++out.states;
  }
  return out;
}

double tail_contraction(const std::vector<double>& residuals, int tail, double floor) {
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < residuals.size(); ++k) {
    if (residuals[k] > floor) ratios.push_back(residuals[k + 1] / residuals[k]);
  }
  if (ratios.empty()) return 0.0;
  double worst = 0.0;
  const std::size_t first = ratios.size() > static_cast<std::size_t>(tail) ? ratios.size() - tail : 0;
  for (std::size_t k = first; k < ratios.size(); ++k) worst = std::max(worst, ratios[k]);
  return worst;
}

RigidOracleCheck rigid_projection_oracles(const Mesh& mesh, std::mt19937_64& rng, int fields) {
  const Spaces spaces = build_spaces(mesh);
  const std::array<double, 2> d{0.0, 1.0};
  RigidOracleCheck out;
  for (int f = 0; f < fields; ++f) {
    Vector u = random_vector(spaces.n_velocity(), rng);
    // Shift the vertical component so that both signs of the mean occur.
    const double shift = (f % 2 == 0) ? 0.7 : -0.7;
    for (int node = 0; node < spaces.num_nodes; ++node) u[Spaces::velocity_dof(node, 1)] += shift;
    const FieldSamples s = sample_velocity(mesh, spaces, u);

    for (double r : {2.0, 1.5, 1.25}) {
      const RigidProjection p = rigid_projection(s, d, r);
      // theta* g projects onto itself and the remainder onto 0.
      FieldSamples lifted = s;
      FieldSamples rest = s;
      for (std::size_t q = 0; q < s.values.size(); ++q) {
        lifted.values[q] = {p.theta * d[0], p.theta * d[1]};
        rest.values[q][0] -= p.theta * d[0];
        rest.values[q][1] -= p.theta * d[1];
      }
      out.idempotence = std::max(out.idempotence, std::abs(rigid_projection(lifted, d, r).theta - p.theta));
      out.idempotence = std::max(out.idempotence, std::abs(rigid_projection(rest, d, r).theta));

      // A field moving against the cone direction projects to 0.
      FieldSamples against = s;
      for (auto& v : against.values) v = {v[0], -std::abs(v[1]) - 0.1};
      out.clamp = std::max(out.clamp, std::abs(rigid_projection(against, d, r).theta));
    }

    double mean = 0.0;
    double area = 0.0;
    for (std::size_t q = 0; q < s.values.size(); ++q) {
      mean += s.weights[q] * s.values[q][1];
      area += s.weights[q];
    }
    const double expected = std::max(0.0, mean / area);
    out.closed_form = std::max(out.closed_form, std::abs(rigid_projection(s, d, 2.0).theta - expected));
  }
  return out;
}

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed,
                                              const std::function<void(const CheckResult&)>& report) {
  std::vector<CheckResult> results;
  const auto add = [&](CheckResult c) {
    if (report) report(c);
    results.push_back(std::move(c));
  };
  const auto bounded = [&](std::string name, double value, double tol, std::string detail = {}) {
    add({std::move(name), std::isfinite(value) && value <= tol, value, tol, std::move(detail)});
  };
  std::mt19937_64 rng(seed);
  const std::vector<double> rs{2.0, 1.5, 1.33, 1.25};

  {
    const Mesh mesh = generate_unit_square(3);
    JacobianCheck total;
    for (double r : rs) {
      const JacobianCheck j = jacobian_fd_check(mesh, make_rheology_from_r(0.5, r, 1e-4), 5, 1e-6, rng);
      total.max_rel_error = std::max(total.max_rel_error, j.max_rel_error);
      total.max_asymmetry = std::max(total.max_asymmetry, j.max_asymmetry);
      total.states += j.states;
    }
    bounded("jacobian finite differences", total.max_rel_error, 1e-6, std::to_string(total.states) + " states");
    bounded("jacobian symmetry", total.max_asymmetry, 1e-12);
  }

  const Mesh square = generate_unit_square(8);
  MmsSettings settings;
  {
    double worst = 0.0;
    double pairing = -std::numeric_limits<double>::infinity();
    double tail = 0.0;
    for (double r : rs) {
      const MmsSolution sol = solve_mms(square, r, settings);
      worst = std::max(worst, sol.diagnostics.worst());
      pairing = std::max(pairing, sol.compatibility.pairing);
      if (r == 1.5) tail = tail_contraction(sol.stats.residuals);
    }
    bounded("mms discrete contact conditions", worst, 1e-10);
    add({"mms compatibility pairing < 0", pairing < 0.0, pairing, 0.0, {}});
    bounded("mms r=1.5 newton tail contraction", tail, 0.1);
  }
  {
    const auto disc = make_mms_discretization(square, 1.5, settings);
    const MmsSolution warm = solve_mms(square, 2.0, settings);
    std::vector<MixedState> finals;
    for (double c : {0.1, 1.0, 100.0}) {
      MmsSettings s = settings;
      s.newton.c_comp = c;
      finals.push_back(solve_mms(*disc, s, &warm.state).state);
    }
    double diff = 0.0;
    for (std::size_t k = 1; k < finals.size(); ++k) {
      diff = std::max({diff, (finals[k].u - finals[0].u).lpNorm<Eigen::Infinity>(),
                       (finals[k].p - finals[0].p).lpNorm<Eigen::Infinity>(),
                       (finals[k].lambda - finals[0].lambda).lpNorm<Eigen::Infinity>()});
    }
    bounded("c_comp invariance", diff, 1e-8, "c in {0.1, 1, 100}");
  }
  {
    const RigidOracleCheck rc = rigid_projection_oracles(generate_unit_square(4), rng);
    bounded("rigid projection idempotence", rc.idempotence, 1e-9);
    bounded("rigid projection cone clamp", rc.clamp, 0.0);
    bounded("rigid projection r=2 closed form", rc.closed_form, 1e-9);
  }
  {
    CavityConfig cfg;
    cfg.nx = 16;
    cfg.ny = 8;
    cfg.t_end = 0.25;
    cfg.snapshot_times = {};
    CavityConfig zero = cfg;
    zero.p_e = 0.0;
    const CompatibilityReport c0 = cavity_compatibility(initial_cavity_state(zero), zero);
    add({"cavity p_e=0 fails compatibility", !c0.pass, c0.pairing, 0.0, {}});

    double worst = 0.0;
    double max_lambda = -std::numeric_limits<double>::infinity();
    double min_gap = std::numeric_limits<double>::infinity();
    bool compatible = true;
    CavityState state = initial_cavity_state(cfg);
    while (state.time < cfg.t_end - 0.5 * cfg.dt) {
      const CavitySolve s = solve_cavity(state, cfg);
      compatible = compatible && s.compatibility.pass;
      worst = std::max(worst, s.diagnostics.worst());
      for (double l : s.lambda) max_lambda = std::max(max_lambda, l);
      advance_cavity(state, s, cfg);
      for (std::size_t i = 0; i < state.roof.size(); ++i) min_gap = std::min(min_gap, state.roof[i] - state.bed[i]);
    }
    add({"cavity compatibility every step", compatible, 0.0, 0.0, {}});
    bounded("cavity discrete contact conditions", worst, 1e-10);
    bounded("cavity lambda <= 0", max_lambda, 1e-10);
    add({"cavity roof above bed", min_gap >= 0.0, min_gap, 0.0, format("min h_c - b", min_gap)});
  }
  return results;
}

}  // namespace rstokes
