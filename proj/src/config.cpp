#include "rstokes/config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#ifndef RSTOKES_VERSION
#define RSTOKES_VERSION "unknown"
#endif

namespace rstokes {

namespace {

const std::vector<std::pair<std::string, Subcommand>> kSubcommands = {
    {"solve-mms", Subcommand::SolveMms},
    {"converge", Subcommand::Converge},
    {"cavity", Subcommand::Cavity},
    {"check", Subcommand::Check},
};

CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0) || !std::isfinite(v)) return "must be a positive number";
        return {};
      },
      "POSITIVE");
}

CLI::Validator non_negative() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v >= 0.0) || !std::isfinite(v)) return "must be >= 0";
        return {};
      },
      "NONNEGATIVE");
}

CLI::Validator glen_exponent() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v >= 1.0) || !std::isfinite(v)) return "n >= 1 required, got " + s;
        return {};
      },
      "N>=1");
}

CLI::Validator power_exponent() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(s, v) || !(v > 1.0 && v <= 2.0)) return "r in (1, 2] required, got " + s;
        return {};
      },
      "1<R<=2");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string num_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

std::string_view to_string(Subcommand sub) {
  for (const auto& [name, value] : kSubcommands) {
    if (value == sub) return name;
  }
  return "unknown";
}

std::string version_string() { return RSTOKES_VERSION; }

RunConfig parse_config(const std::vector<std::string>& args, const std::optional<std::filesystem::path>& config_file) {
  RunConfig cfg;
  CLI::App app{"Mixed finite element solver for power-law Stokes flow with frictionless contact", "rstokes"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", config_file ? config_file->string() : std::string{}, "Read options from a TOML/INI file");
  app.allow_config_extras(false);
  app.get_formatter()->column_width(34);

  std::string sub_name;
  std::map<std::string, Subcommand> sub_map(kSubcommands.begin(), kSubcommands.end());
  app.add_option("subcommand", sub_name, "solve-mms | converge | cavity | check")
      ->required()
      ->transform(CLI::IsMember(sub_map));

  std::optional<double> glen_A, glen_n, eps_reg, newton_tol, c_comp;
  std::optional<int> newton_max_iters;
  app.add_option("--glen_A", glen_A, "Glen fluidity A (default 0.5)")->check(positive());
  app.add_option("--glen_n", glen_n, "Glen exponent n >= 1 (cavity; default 3)")->check(glen_exponent());
  app.add_option("--eps_reg", eps_reg, "Viscosity regularization (default 1e-4 MMS, 1e-2 cavity)")
      ->check(non_negative());
  app.add_option("--newton_tol", newton_tol, "Newton residual tolerance (default 1e-11)")->check(positive());
  app.add_option("--newton_max_iters", newton_max_iters, "Newton iteration limit (default 60)")
      ->check(CLI::PositiveNumber);
  app.add_option("--c_comp", c_comp, "Complementarity constant c (default 1)")->check(positive());

  app.add_option("--r", cfg.rs, "Power-law exponents r")->check(power_exponent())->capture_default_str();
  app.add_option("--levels", cfg.levels, "Refinement levels (converge)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--base_n", cfg.base_n, "Cells per side on the coarsest level (converge)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--n", cfg.n, "Cells per side (solve-mms)")->check(CLI::PositiveNumber)->capture_default_str();
  std::string mesh_path, save_mesh_path;
  app.add_option("--mesh", mesh_path, "Mesh file for solve-mms")->check(CLI::ExistingFile);
  app.add_option("--save-mesh", save_mesh_path, "Write the mesh used to this file");

  CavityConfig& cav = cfg.cavity;
  app.add_option("--nx", cav.nx, "Bed edges (cavity)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--ny", cav.ny, "Vertical cells (cavity)")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--amplitude", cav.amplitude, "Bed peak-to-peak amplitude")->check(non_negative())
      ->capture_default_str();
  app.add_option("--u_i", cav.u_i, "Sliding velocity at the top")->capture_default_str();
  app.add_option("--p_e", cav.p_e, "Effective pressure")->check(non_negative())->capture_default_str();
  app.add_option("--dt", cav.dt, "Time step")->check(positive())->capture_default_str();
  app.add_option("--t_end", cav.t_end, "Final time")->check(positive())->capture_default_str();
  app.add_option("--steady_tol", cav.steady_tol, "Steady state when max |Gamma u| falls below")
      ->check(positive())
      ->capture_default_str();
  app.add_option("--snapshot_times", cav.snapshot_times, "Times at which roof profiles are written")
      ->capture_default_str();
  app.add_flag("--stop_at_steady", cav.stop_at_steady, "End the cavity run once steady");

  std::string out_path = cfg.out.string();
  app.add_option("--out", out_path, "Output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for randomized checks")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Element kernel threads")->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw InfoRequest{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw InfoRequest{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::CallForVersion&) {
    throw InfoRequest{version_string() + "\n"};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  cfg.subcommand = sub_map.at(sub_name);
  const bool cavity = cfg.subcommand == Subcommand::Cavity;

  cfg.mms.glen_A = glen_A.value_or(0.5);
  cfg.mms.eps_reg = eps_reg.value_or(1e-4);
  cav.glen_A = glen_A.value_or(0.5);
  cav.glen_n = glen_n.value_or(3.0);
  cav.eps_reg = eps_reg.value_or(1e-2);
  for (NewtonConfig* nc : {&cfg.mms.newton, &cav.newton}) {
    if (newton_tol) nc->tol_residual = *newton_tol;
    if (newton_max_iters) nc->max_iters = *newton_max_iters;
    if (c_comp) nc->c_comp = *c_comp;
  }
  cfg.mms.assembly.threads = cfg.threads;
  cav.assembly.threads = cfg.threads;
  if (glen_n && !cavity) throw UsageError("--glen_n: only used by cavity; MMS runs take --r");
  if (cfg.rs.empty()) throw UsageError("--r: at least one exponent required");
  if (!mesh_path.empty()) cfg.mesh = mesh_path;
  if (!save_mesh_path.empty()) cfg.save_mesh = save_mesh_path;
  cfg.out = out_path;
  if (cavity) {
    try {
      validate(cav);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  const bool cavity = cfg.subcommand == Subcommand::Cavity;
  const NewtonConfig& nc = cavity ? cfg.cavity.newton : cfg.mms.newton;
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("subcommand", quoted(std::string(to_string(cfg.subcommand))));
  e.emplace_back("glen_A", num(cavity ? cfg.cavity.glen_A : cfg.mms.glen_A));
  if (cavity) e.emplace_back("glen_n", num(cfg.cavity.glen_n));
  e.emplace_back("eps_reg", num(cavity ? cfg.cavity.eps_reg : cfg.mms.eps_reg));
  e.emplace_back("newton_tol", num(nc.tol_residual));
  e.emplace_back("newton_max_iters", std::to_string(nc.max_iters));
  e.emplace_back("c_comp", num(nc.c_comp));
  e.emplace_back("r", num_list(cfg.rs));
  e.emplace_back("levels", std::to_string(cfg.levels));
  e.emplace_back("base_n", std::to_string(cfg.base_n));
  e.emplace_back("n", std::to_string(cfg.n));
  if (cfg.mesh) e.emplace_back("mesh", quoted(cfg.mesh->string()));
  if (cfg.save_mesh) e.emplace_back("save-mesh", quoted(cfg.save_mesh->string()));
  e.emplace_back("nx", std::to_string(cfg.cavity.nx));
  e.emplace_back("ny", std::to_string(cfg.cavity.ny));
  e.emplace_back("amplitude", num(cfg.cavity.amplitude));
  e.emplace_back("u_i", num(cfg.cavity.u_i));
  e.emplace_back("p_e", num(cfg.cavity.p_e));
  e.emplace_back("dt", num(cfg.cavity.dt));
  e.emplace_back("t_end", num(cfg.cavity.t_end));
  e.emplace_back("steady_tol", num(cfg.cavity.steady_tol));
  e.emplace_back("snapshot_times", num_list(cfg.cavity.snapshot_times));
  e.emplace_back("stop_at_steady", cfg.cavity.stop_at_steady ? "true" : "false");
  e.emplace_back("out", quoted(cfg.out.string()));
  e.emplace_back("seed", std::to_string(cfg.seed));
  e.emplace_back("threads", std::to_string(cfg.threads));
  return e;
}

std::string config_file_text(const RunConfig& cfg) {
  std::string text;
  for (const auto& [key, value] : config_entries(cfg)) text += key + " = " + value + "\n";
  return text;
}

}  // namespace rstokes
