// Subglacial cavity evolution over a periodic cosine bed: contact Stokes solve
// per step, explicit Euler update of the roof, mesh restretching.
#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstokes/assembly.hpp"
#include "rstokes/mesh.hpp"
#include "rstokes/rigid.hpp"
#include "rstokes/solver.hpp"

namespace rstokes {

struct CavityConfig {
  int nx = 32;
  int ny = 32;
  double amplitude = 0.08;
  double glen_A = 0.5;
  double glen_n = 3.0;
  double eps_reg = 1e-2;
  double u_i = 1.0;
  double p_e = 1.2;
  double dt = 0.025;
  double t_end = 3.0;
  double steady_tol = 1e-3;
  std::vector<double> snapshot_times{0.0, 0.1, 3.0};
  bool stop_at_steady = false;
  NewtonConfig newton{};
  AssemblyOptions assembly{};
};

/// Throws std::invalid_argument on inconsistent settings.
void validate(const CavityConfig& config);

/// Courant number u_i dt nx of the explicit upwind roof update; the update is
/// unstable above 1.
double roof_courant_number(const CavityConfig& config);

/// A bed vertex is attached when the roof lies within this distance of the bed.
inline constexpr double kAttachTol = 1e-12;

struct CavityState {
  double time = 0.0;
  int step = 0;
  Mesh mesh;
  std::vector<double> x;     // bed chain abscissae
  std::vector<double> bed;   // b(x) at the chain vertices
  std::vector<double> roof;  // h_c at the chain vertices
  MixedState solution;       // last converged solve (empty before the first)
};

CavityState initial_cavity_state(const CavityConfig& config);

/// Per-edge contact flag: an edge carries the contact constraint when at
/// least one endpoint touches the bed. Other edges are cavity roof with
/// lambda = 0.
std::vector<char> attached_edges(std::span<const double> roof, std::span<const double> bed);

/// Explicit upwind update h_i -= dt (Gamma u)_{i-1} sqrt(1 + s_{i-1}^2) with
/// periodic wrap, then h_i = max(h_i, b_i). Chain values have one more entry
/// than gamma_n_u; the last vertex is the periodic image of the first.
std::vector<double> advect_roof(std::span<const double> x, std::span<const double> roof, std::span<const double> bed,
                                std::span<const double> gamma_n_u, double dt);

/// Trapezoidal integral of h_c - b.
double cavity_volume(std::span<const double> x, std::span<const double> roof, std::span<const double> bed);

struct CavitySolve {
  double time = 0.0;
  std::vector<double> gamma_n_u;  // per bed edge
  std::vector<double> lambda;     // per bed edge
  std::vector<char> enabled;
  NewtonStats stats;
  CompatibilityReport compatibility;
  ContactDiagnostics diagnostics;
  double max_abs_gnu = 0.0;
  double cavity_volume = 0.0;
  int active_edges = 0;
};

/// The load does not pair negatively with the admissible rigid lift.
class CompatibilityError : public std::runtime_error {
 public:
  CompatibilityError(const std::string& what, CompatibilityReport report)
      : std::runtime_error(what), report_(report) {}
  const CompatibilityReport& report() const { return report_; }

 private:
  CompatibilityReport report_;
};

/// Compatibility of the load on the current geometry, without solving.
CompatibilityReport cavity_compatibility(const CavityState& state, const CavityConfig& config);

/// Solves the contact problem on the current geometry, warm-started from the
/// previous solution. Throws CompatibilityError if the load is incompatible.
CavitySolve solve_cavity(CavityState& state, const CavityConfig& config);

/// Roof update, mesh deformation and time advance from a converged solve.
void advance_cavity(CavityState& state, const CavitySolve& solve, const CavityConfig& config);

struct CavitySnapshot {
  double time = 0.0;
  Mesh mesh;
  std::vector<double> x_mid, bed_mid, roof_mid, gamma_n_u, lambda;  // per bed edge
  std::vector<char> enabled;                                        // contact constraint applies
  std::vector<std::array<double, 2>> vertex_velocity;
  std::vector<double> cell_pressure;
};

/// Edge midpoint values use the chord of the bed and roof polylines.
CavitySnapshot make_snapshot(const CavityState& state, const CavitySolve& solve);

struct ReattachmentPeak {
  int edge = -1;  // -1 when no cavity is open
  double x = 0.0;
  double lambda = 0.0;
};

/// First local minimum of lambda scanning downstream (+x, periodic) from the
/// first contact edge after the cavity.
ReattachmentPeak reattachment_peak(const CavitySnapshot& snapshot);

struct CavityRun {
  std::vector<CavitySolve> steps;
  std::vector<CavitySnapshot> snapshots;
  bool steady = false;
  double steady_time = -1.0;
  double seconds = 0.0;
};

/// Steps until t_end, or until max |Gamma u| < steady_tol when stop_at_steady
/// is set. A snapshot is taken at each configured time reached and at the
/// last solve.
CavityRun run_cavity(const CavityConfig& config,
                     const std::function<void(const CavitySolve&)>& on_step = nullptr);

}  // namespace rstokes
