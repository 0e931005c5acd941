#include "rstokes/output.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace rstokes {

namespace {

void digits12(std::ostream& os) {
  os.unsetf(std::ios::floatfield);
  os << std::setprecision(12);
}

}  // namespace

std::vector<std::array<double, 2>> vertex_velocity(const Mesh& mesh, const Spaces& spaces, const Vector& u) {
  std::vector<std::array<double, 2>> out;
  out.reserve(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const int node = spaces.node_of_raw[v];
    out.push_back({u[Spaces::velocity_dof(node, 0)], u[Spaces::velocity_dof(node, 1)]});
  }
  return out;
}

void write_roof_csv(std::ostream& os, const CavitySnapshot& s) {
  digits12(os);
  os << "x,b,h_c,gamma_n_u,lambda\n";
  for (std::size_t i = 0; i < s.x_mid.size(); ++i) {
    os << s.x_mid[i] << ',' << s.bed_mid[i] << ',' << s.roof_mid[i] << ',' << s.gamma_n_u[i] << ',' << s.lambda[i]
       << '\n';
  }
}

std::string roof_file_name(double time) {
  std::ostringstream os;
  os << "roof_t" << std::setprecision(6) << time << ".csv";
  return os.str();
}

void write_cavity_summary(std::ostream& os, const std::vector<CavitySolve>& steps) {
  digits12(os);
  os << "t,cavity_volume,max_abs_gnu,newton_iters,active_edges\n";
  for (const CavitySolve& s : steps) {
    os << s.time << ',' << s.cavity_volume << ',' << s.max_abs_gnu << ',' << s.stats.iterations << ','
       << s.active_edges << '\n';
  }
}

void write_mms_csv(std::ostream& os, const std::vector<std::pair<double, MmsSolution>>& solves) {
  digits12(os);
  os << "r,h,err_D,err_V,err_F,err_p,err_lambda,rigid_part,nonrigid_part,newton_iters,pairing,contact_violation\n";
  for (const auto& [r, s] : solves) {
    const ErrorRecord& e = s.errors;
    os << r << ',' << e.h << ',' << e.err_D << ',' << e.err_V << ',' << e.err_F << ',' << e.err_p << ','
       << e.err_lambda << ',' << e.rigid_part << ',' << e.nonrigid_part << ',' << s.stats.iterations << ','
       << s.compatibility.pairing << ',' << s.diagnostics.worst() << '\n';
  }
}

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<std::array<double, 2>>& velocity,
               const std::vector<double>& pressure, const std::string& title) {
  if (velocity.size() != mesh.vertices.size() || pressure.size() != mesh.triangles.size()) {
    throw std::invalid_argument("write_vtk: field sizes do not match the mesh");
  }
  digits12(os);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Point& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) os << "5\n";
  os << "POINT_DATA " << mesh.vertices.size() << "\nVECTORS velocity double\n";
  for (const auto& v : velocity) os << v[0] << ' ' << v[1] << " 0\n";
  os << "CELL_DATA " << mesh.triangles.size() << "\nSCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double p : pressure) os << p << '\n';
}

std::string manifest_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["program"] = "rstokes";
  j["version"] = version_string();
  j["status"] = m.status;
  if (m.config) {
    j["subcommand"] = std::string(to_string(m.config->subcommand));
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, value] : config_entries(*m.config)) {
      // Values are TOML literals; store them as JSON values.
      params[key] = nlohmann::ordered_json::parse(value, nullptr, false);
      if (params[key].is_discarded()) params[key] = value;
    }
    j["parameters"] = params;
    j["rerun"] = "rstokes --config run_config.toml";
  }
  j["timings_seconds"] = m.timings;
  j["files"] = m.files;
  return j.dump(2) + "\n";
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path);
  if (!os) throw OutputError("cannot open " + path.string() + " for writing");
  return os;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream os = open_output(path);
  os << contents;
  os.close();
  if (!os) throw OutputError("write failed: " + path.string());
}

}  // namespace rstokes
