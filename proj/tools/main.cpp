// rstokes command-line driver.
//
// Exit codes: 0 success, 1 usage error, 2 solver or I/O failure, 3 invariant
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rstokes/cavity.hpp"
#include "rstokes/checks.hpp"
#include "rstokes/config.hpp"
#include "rstokes/output.hpp"
#include "rstokes/verification.hpp"

using namespace rstokes;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitInvariant = 3;
constexpr double kContactTol = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : cfg_(cfg) { manifest_.config = &cfg_; }

  std::ofstream open(const std::string& name) {
    manifest_.files.push_back(name);
    return open_output(cfg_.out / name);
  }
  void timing(const std::string& key, double s) { manifest_.timings[key] = s; }
  void finish(const std::string& status) {
    manifest_.status = status;
    write_text_file(cfg_.out / "run_config.toml", config_file_text(cfg_));
    manifest_.files.push_back("run_config.toml");
    write_text_file(cfg_.out / "manifest.json", manifest_json(manifest_));
  }

 private:
  const RunConfig& cfg_;
  Manifest manifest_;
};

std::string tag(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

int run_solve_mms(const RunConfig& cfg) {
  Outputs out(cfg);
  const auto t0 = Clock::now();
  const Mesh mesh = cfg.mesh ? load_mesh(*cfg.mesh) : generate_unit_square(cfg.n);
  if (cfg.save_mesh) save_mesh(*cfg.save_mesh, mesh);
  std::vector<std::pair<double, MmsSolution>> solves;
  bool ok = true;
  for (double r : cfg.rs) {
    const auto ts = Clock::now();
    MmsSolution sol = solve_mms(mesh, r, cfg.mms);
    out.timing("solve_r" + tag(r), seconds_since(ts));
    const double violation = sol.diagnostics.worst();
    std::printf("r=%-5g h=%.4e newton=%d err_D=%.4e err_V=%.4e err_p=%.4e err_lambda=%.4e contact=%.2e pairing=%.4e\n",
                r, sol.errors.h, sol.stats.iterations, sol.errors.err_D, sol.errors.err_V, sol.errors.err_p,
                sol.errors.err_lambda, violation, sol.compatibility.pairing);
    if (!(violation <= kContactTol)) {
      std::fprintf(stderr, "error: r=%g discrete contact conditions violated by %.3e\n", r, violation);
      ok = false;
    }
    if (!sol.compatibility.pass) {
      std::fprintf(stderr, "error: r=%g load fails the compatibility condition\n", r);
      ok = false;
    }
    const auto disc = make_mms_discretization(mesh, r, cfg.mms);
    auto vtk = out.open("mms_r" + tag(r) + ".vtk");
    write_vtk(vtk, mesh, vertex_velocity(mesh, disc->spaces, sol.state.u),
              std::vector<double>(sol.state.p.data(), sol.state.p.data() + sol.state.p.size()),
              "rstokes solve-mms r=" + tag(r));
    solves.emplace_back(r, std::move(sol));
  }
  auto csv = out.open("mms.csv");
  write_mms_csv(csv, solves);
  csv.close();
  out.timing("total", seconds_since(t0));
  out.finish(ok ? "ok" : "invariant failure");
  return ok ? 0 : kExitInvariant;
}

int run_converge(const RunConfig& cfg) {
  Outputs out(cfg);
  const auto t0 = Clock::now();
  const auto rows = convergence_study(cfg.rs, cfg.base_n, cfg.levels, cfg.mms);
  std::printf("%-5s %-10s %-10s %-6s %-10s %-6s %-10s %-6s %-10s %-6s %s\n", "r", "h", "err_D", "ord", "err_V", "ord",
              "err_p", "ord", "err_lam", "ord", "newton");
  for (const ConvergenceRow& row : rows) {
    const ErrorRecord& e = row.errors;
    std::printf("%-5g %-10.3e %-10.3e %-6.2f %-10.3e %-6.2f %-10.3e %-6.2f %-10.3e %-6.2f %d\n", row.r, e.h, e.err_D,
                row.order_D, e.err_V, row.order_V, e.err_p, row.order_p, e.err_lambda, row.order_lambda,
                row.newton_iters);
  }
  auto csv = out.open("table.csv");
  write_convergence_csv(csv, rows);
  csv.close();
  bool ok = true;
  for (const ConvergenceRow& row : rows) {
    if (!(row.diagnostics.worst() <= kContactTol) || !row.compatibility.pass) {
      std::fprintf(stderr, "error: r=%g n=%d contact violation %.3e, pairing %.3e\n", row.r, row.n,
                   row.diagnostics.worst(), row.compatibility.pairing);
      ok = false;
    }
  }
  out.timing("total", seconds_since(t0));
  out.finish(ok ? "ok" : "invariant failure");
  return ok ? 0 : kExitInvariant;
}

int run_cavity_cmd(const RunConfig& cfg) {
  const CavityConfig& cav = cfg.cavity;
  const double courant = roof_courant_number(cav);
  if (courant > 1.0) {
    std::fprintf(stderr,
                 "warning: roof update Courant number u_i*dt*nx = %.3g exceeds 1; the explicit update is unstable\n",
                 courant);
  }
  Outputs out(cfg);
  double worst = 0.0;
  double max_lambda = -INFINITY;
  const CavityRun run = run_cavity(cav, [&](const CavitySolve& s) {
    worst = std::max(worst, s.diagnostics.worst());
    for (double l : s.lambda) max_lambda = std::max(max_lambda, l);
    std::fprintf(stderr, "t=%.4f newton=%d max|Gu|=%.3e volume=%.4e active=%d\n", s.time, s.stats.iterations,
                 s.max_abs_gnu, s.cavity_volume, s.active_edges);
  });
  double min_gap = INFINITY;
  for (const CavitySnapshot& snap : run.snapshots) {
    auto csv = out.open(roof_file_name(snap.time));
    write_roof_csv(csv, snap);
    auto vtk = out.open("cavity_t" + tag(snap.time) + ".vtk");
    write_vtk(vtk, snap.mesh, snap.vertex_velocity, snap.cell_pressure, "rstokes cavity t=" + tag(snap.time));
    for (std::size_t i = 0; i < snap.roof_mid.size(); ++i) min_gap = std::min(min_gap, snap.roof_mid[i] - snap.bed_mid[i]);
  }
  {
    auto csv = out.open("summary.csv");
    write_cavity_summary(csv, run.steps);
  }
  out.timing("total", run.seconds);
  const bool ok = worst <= kContactTol && max_lambda <= kContactTol && min_gap >= 0.0;
  std::printf("steps=%zu steady=%s", run.steps.size(), run.steady ? "yes" : "no");
  if (run.steady) std::printf(" (t=%.4g)", run.steady_time);
  if (!run.snapshots.empty()) {
    const ReattachmentPeak peak = reattachment_peak(run.snapshots.back());
    if (peak.edge >= 0) std::printf(" reattachment lambda=%.4f at x=%.4f", peak.lambda, peak.x);
  }
  std::printf(" contact=%.2e max_lambda=%.2e seconds=%.1f\n", worst, max_lambda, run.seconds);
  if (!ok) std::fprintf(stderr, "error: cavity invariants violated\n");
  out.finish(ok ? "ok" : "invariant failure");
  return ok ? 0 : kExitInvariant;
}

int run_check(const RunConfig& cfg) {
  const auto results = run_invariant_checks(cfg.seed, [](const CheckResult& c) {
    std::printf("%s  %-40s value=%.3e tol=%.1e %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.tolerance, c.detail.c_str());
    std::fflush(stdout);
  });
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& c) { return c.pass; });
  return ok ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    cfg = parse_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const InfoRequest& info) {
    std::cout << info.text;
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for the list of options.\n";
    return kExitUsage;
  }

  try {
    switch (cfg.subcommand) {
      case Subcommand::SolveMms: return run_solve_mms(cfg);
      case Subcommand::Converge: return run_converge(cfg);
      case Subcommand::Cavity: return run_cavity_cmd(cfg);
      case Subcommand::Check: return run_check(cfg);
    }
  } catch (const CompatibilityError& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    if (e.kind() == SolverError::Kind::SingularMatrix) {
      std::cerr << "hint: a singular system usually means the load violates the compatibility condition\n";
    }
    return kExitSolver;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitSolver;
}
