// Run configuration for the command-line driver: flags, an optional config
// file, and the per-subcommand defaults.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rstokes/cavity.hpp"
#include "rstokes/verification.hpp"

namespace rstokes {

enum class Subcommand { SolveMms, Converge, Cavity, Check };

std::string_view to_string(Subcommand sub);

struct RunConfig {
  Subcommand subcommand = Subcommand::Converge;
  MmsSettings mms{};
  std::vector<double> rs{2.0, 1.5, 1.33, 1.25};
  int base_n = 4;
  int levels = 4;
  int n = 16;  // solve-mms: cells per side
  std::optional<std::filesystem::path> mesh;       // solve-mms: mesh file instead of the unit square
  std::optional<std::filesystem::path> save_mesh;  // write the mesh used
  CavityConfig cavity{};
  std::filesystem::path out = "out";
  std::uint64_t seed = 20240607;
  int threads = 1;
};

/// Bad flag, bad value or unknown config key. The message names the key.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help or --version; `text` is what to print before exiting with 0.
struct InfoRequest {
  std::string text;
};

/// Flags override the config file, which overrides the subcommand defaults.
/// `config_file` is read when no --config flag is given. Throws UsageError or
/// InfoRequest.
RunConfig parse_config(const std::vector<std::string>& args,
                       const std::optional<std::filesystem::path>& config_file = std::nullopt);

/// Every resolved option as (key, value) in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// config_entries as "key = value" lines; passing the file back with
/// --config reproduces the run.
std::string config_file_text(const RunConfig& config);

std::string version_string();

}  // namespace rstokes
