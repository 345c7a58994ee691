#pragma once

#include <array>
#include <string>
#include <vector>

namespace khm::cli {

/// Fully resolved run configuration.  validate() reports problems as
/// "field: reason" strings before any computation starts.
struct RunConfig {
  std::string command;               // sweep | correlate | scale | phase-diagram | fidelity
  std::string line = "jx-eq-jy";     // jx-eq-jy | jz-third
  std::vector<int> sizes;            // lattice linear sizes (odd)
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  int steps = 0;

  double jz = 0.0;                   // correlate: J_z on the jx-eq-jy line
  std::string fit = "auto";          // exp | power | auto | none
  int fit_rmin = -1;                 // -1: per-kind default
  int fit_rmax = -1;
  int crossing_margin = 1;
  bool dump_profile = false;

  int resolution = 0;                // phase-diagram barycentric resolution

  std::array<double, 3> c1{};        // fidelity endpoints
  std::array<double, 3> c2{};

  double peak_lo = 0.0;              // scale: peak-search window (0,0 = sweep window)
  double peak_hi = 0.0;
  double nu_lo = 0.5;
  double nu_hi = 1.5;
  double x_max = 2.0;

  std::string out = "khm_run";       // output path prefix
  int threads = 0;                   // advisory thread-count hint (0 = default)
};

std::vector<std::string> validate(const RunConfig& cfg);

/// Output prefix with the KHM_OUT_DIR override applied to relative paths.
std::string resolve_out_prefix(const std::string& out);

int cmd_sweep(const RunConfig& cfg);
int cmd_correlate(const RunConfig& cfg);
int cmd_scale(const RunConfig& cfg);
int cmd_phase_diagram(const RunConfig& cfg);
int cmd_fidelity(const RunConfig& cfg);

/// Validates and dispatches; returns the process exit code
/// (0 success, 1 partial or full computation failure, 2 bad configuration).
int run(const RunConfig& cfg);

}  // namespace khm::cli
