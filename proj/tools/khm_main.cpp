#include <CLI11.hpp>

#include <string>
#include <vector>

#include "khm/cli.hpp"

namespace {

// Parses "lo:hi:steps" range syntax.
bool parse_range(const std::string& text, double* lo, double* hi, int* steps) {
  const auto first = text.find(':');
  const auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos) return false;
  try {
    *lo = std::stod(text.substr(0, first));
    *hi = std::stod(text.substr(first + 1, second - first - 1));
    *steps = std::stoi(text.substr(second + 1));
  } catch (...) {
    return false;
  }
  return true;
}

void add_common(CLI::App* cmd, khm::cli::RunConfig* cfg) {
  cmd->add_option("--out", cfg->out, "output path prefix");
  cmd->add_option("--threads", cfg->threads,
                  "advisory thread-count hint (results are identical for any value)");
  cmd->set_config("--config", "", "key=value configuration file; flags take precedence");
  cmd->allow_config_extras(CLI::config_extras_mode::ignore_all);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kitaev honeycomb model: fidelity susceptibility and bond-bond correlations"};
  app.require_subcommand(1);

  khm::cli::RunConfig cfg;
  std::string lz_range;
  std::string fit_window;

  auto* sweep = app.add_subcommand(
      "sweep", "chi_F and gap along an evolution line, one CSV per size");
  sweep->add_option("--line", cfg.line, "evolution line: jx-eq-jy | jz-third");
  sweep->add_option("--lz,--lambda", lz_range, "lambda window as lo:hi:steps")
      ->required();
  sweep->add_option("--sizes,-L", cfg.sizes, "comma list of odd sizes")
      ->required()
      ->delimiter(',');
  add_common(sweep, &cfg);

  auto* correlate = app.add_subcommand(
      "correlate", "bond-bond correlation profile along the diagonal cut");
  correlate->add_option("--jz", cfg.jz, "J_z on the jx-eq-jy line")->required();
  correlate->add_option("--sizes,-L", cfg.sizes, "lattice size (odd)")
      ->required()
      ->delimiter(',');
  correlate->add_option("--fit", cfg.fit, "decay fit: exp | power | auto | none");
  correlate->add_option("--window", fit_window, "fit window as rmin:rmax");
  correlate->add_option("--crossing-margin", cfg.crossing_margin,
                        "points dropped around each sign change");
  correlate->add_flag("--dump-profile", cfg.dump_profile,
                      "also write the full C(dx,dy) table");
  add_common(correlate, &cfg);

  auto* scale = app.add_subcommand(
      "scale", "finite-size scaling: mu, nu, alpha and collapse curves");
  scale->add_option("--line", cfg.line, "evolution line: jx-eq-jy | jz-third");
  scale->add_option("--lz,--lambda", lz_range, "lambda window as lo:hi:steps")
      ->required();
  scale->add_option("--sizes,-L", cfg.sizes, "comma list of >= 3 odd sizes")
      ->required()
      ->delimiter(',');
  scale->add_option("--nu-lo", cfg.nu_lo, "nu search lower bound");
  scale->add_option("--nu-hi", cfg.nu_hi, "nu search upper bound");
  scale->add_option("--x-max", cfg.x_max, "collapse window |L^nu dlambda| <= x_max");
  add_common(scale, &cfg);

  auto* phase = app.add_subcommand(
      "phase-diagram", "phase and gap over the coupling simplex");
  phase->add_option("--resolution", cfg.resolution, "barycentric grid resolution")
      ->required();
  phase->add_option("--sizes,-L", cfg.sizes, "lattice size for the gap column")
      ->delimiter(',');
  add_common(phase, &cfg);

  auto* fid = app.add_subcommand("fidelity",
                                 "pairwise ground-state fidelity of two points");
  fid->add_option("--c1", cfg.c1, "first coupling point jx,jy,jz")
      ->required()
      ->delimiter(',');
  fid->add_option("--c2", cfg.c2, "second coupling point jx,jy,jz")
      ->required()
      ->delimiter(',');
  fid->add_option("--sizes,-L", cfg.sizes, "lattice size (odd)")
      ->required()
      ->delimiter(',');
  add_common(fid, &cfg);

  CLI11_PARSE(app, argc, argv);

  if (!lz_range.empty() &&
      !parse_range(lz_range, &cfg.lambda_lo, &cfg.lambda_hi, &cfg.steps)) {
    std::cerr << "config error: lambda: expected lo:hi:steps, got '" << lz_range
              << "'\n";
    return 2;
  }
  if (!fit_window.empty()) {
    const auto colon = fit_window.find(':');
    try {
      cfg.fit_rmin = std::stoi(fit_window.substr(0, colon));
      cfg.fit_rmax = std::stoi(fit_window.substr(colon + 1));
    } catch (...) {
      std::cerr << "config error: window: expected rmin:rmax, got '"
                << fit_window << "'\n";
      return 2;
    }
  }

  cfg.command = app.get_subcommands().front()->get_name();
  return khm::cli::run(cfg);
}
