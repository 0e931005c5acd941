// Plot-ready CSV tables, legacy VTK fields and the run manifest.
//
// All numbers are written with 12 significant digits. Output depends only on
// the data passed in, so identical runs give byte-identical files.
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstokes/cavity.hpp"
#include "rstokes/config.hpp"
#include "rstokes/mesh.hpp"
#include "rstokes/spaces.hpp"
#include "rstokes/verification.hpp"

namespace rstokes {

/// Raised when a file cannot be created or written; the message has the path.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Velocity at the mesh vertices (slaves take their master's value).
std::vector<std::array<double, 2>> vertex_velocity(const Mesh& mesh, const Spaces& spaces, const Vector& u);

/// Columns x, b, h_c, gamma_n_u, lambda; one row per bed edge midpoint.
void write_roof_csv(std::ostream& os, const CavitySnapshot& snapshot);

/// "roof_t<time>.csv" with the time printed in shortest form, e.g. roof_t0.1.csv.
std::string roof_file_name(double time);

/// Columns t, cavity_volume, max_abs_gnu, newton_iters, active_edges.
void write_cavity_summary(std::ostream& os, const std::vector<CavitySolve>& steps);

/// One row per MMS solve: r, h, the error norms and solver counts.
void write_mms_csv(std::ostream& os, const std::vector<std::pair<double, MmsSolution>>& solves);

/// Legacy ASCII unstructured grid with point vector "velocity" and cell scalar
/// "pressure".
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<std::array<double, 2>>& vertex_velocity,
               const std::vector<double>& cell_pressure, const std::string& title);

struct Manifest {
  const RunConfig* config = nullptr;
  std::map<std::string, double> timings;  // seconds
  std::vector<std::string> files;         // relative to the output directory
  std::string status = "ok";
};

std::string manifest_json(const Manifest& manifest);

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// Opens `path` for writing, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace rstokes
