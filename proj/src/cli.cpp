#include "khm/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "khm/correlation.hpp"
#include "khm/fidelity.hpp"
#include "khm/model.hpp"
#include "khm/scaling.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace khm::cli {

namespace {

using nlohmann::json;

/// Round-trip-exact formatting: 17 significant digits.
std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EvolutionLine line_from_name(const std::string& name) {
  if (name == "jx-eq-jy") return EvolutionLine::jx_eq_jy();
  if (name == "jz-third") return EvolutionLine::jz_third();
  throw std::invalid_argument("unknown line: " + name);
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["command"] = cfg.command;
  j["line"] = cfg.line;
  j["sizes"] = cfg.sizes;
  j["lambda_lo"] = cfg.lambda_lo;
  j["lambda_hi"] = cfg.lambda_hi;
  j["steps"] = cfg.steps;
  j["jz"] = cfg.jz;
  j["fit"] = cfg.fit;
  j["fit_rmin"] = cfg.fit_rmin;
  j["fit_rmax"] = cfg.fit_rmax;
  j["crossing_margin"] = cfg.crossing_margin;
  j["dump_profile"] = cfg.dump_profile;
  j["resolution"] = cfg.resolution;
  j["c1"] = cfg.c1;
  j["c2"] = cfg.c2;
  j["peak_lo"] = cfg.peak_lo;
  j["peak_hi"] = cfg.peak_hi;
  j["nu_lo"] = cfg.nu_lo;
  j["nu_hi"] = cfg.nu_hi;
  j["x_max"] = cfg.x_max;
  j["out"] = cfg.out;
  j["threads"] = cfg.threads;
  return j;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

void apply_thread_hint(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

int default_fit_rmin(bool exponential) {
  return exponential ? kDefaultExpFitRMin : kDefaultPowerFitRMin;
}

int default_fit_rmax(bool exponential) {
  return exponential ? kDefaultExpFitRMax : kDefaultPowerFitRMax;
}

}  // namespace

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> errors;
  const auto fail = [&](const std::string& field, const std::string& reason) {
    errors.push_back(field + ": " + reason);
  };

  if (cfg.line != "jx-eq-jy" && cfg.line != "jz-third")
    fail("line", "must be jx-eq-jy or jz-third");
  for (int L : cfg.sizes) {
    if (L < 1)
      fail("sizes", "L must be positive, got " + std::to_string(L));
    else if (L % 2 == 0)
      fail("sizes", "L must be odd, got " + std::to_string(L));
  }

  const bool needs_window =
      cfg.command == "sweep" || cfg.command == "scale";
  if (needs_window) {
    if (cfg.sizes.empty()) fail("sizes", "at least one size required");
    if (cfg.steps < 2) fail("steps", "at least 2 sweep steps required");
    if (!(cfg.lambda_hi > cfg.lambda_lo))
      fail("lambda", "window must satisfy lo < hi");
  }
  if (cfg.command == "scale") {
    if (cfg.sizes.size() < 3) fail("sizes", "scale needs >= 3 sizes");
    if (!(cfg.nu_hi > cfg.nu_lo)) fail("nu", "search range must satisfy lo < hi");
    if (!(cfg.x_max > 0)) fail("x_max", "must be positive");
  }
  if (cfg.command == "correlate") {
    if (cfg.sizes.size() != 1) fail("sizes", "correlate takes exactly one size");
    if (!(cfg.jz > 0.0 && cfg.jz < 1.0))
      fail("jz", "must lie in (0, 1) on the jx-eq-jy line");
    if (cfg.fit != "exp" && cfg.fit != "power" && cfg.fit != "auto" &&
        cfg.fit != "none")
      fail("fit", "must be exp, power, auto, or none");
    if (cfg.crossing_margin < 0) fail("crossing_margin", "must be >= 0");
    if ((cfg.fit_rmin >= 0) != (cfg.fit_rmax >= 0))
      fail("fit window", "specify both r_min and r_max or neither");
    if (cfg.fit_rmin >= 0 && !(cfg.fit_rmax > cfg.fit_rmin))
      fail("fit window", "must satisfy r_min < r_max");
  }
  if (cfg.command == "phase-diagram") {
    if (cfg.resolution < 2) fail("resolution", "must be >= 2");
    if (cfg.sizes.size() > 1) fail("sizes", "phase-diagram takes one size");
  }
  if (cfg.command == "fidelity") {
    if (cfg.sizes.size() != 1) fail("sizes", "fidelity takes exactly one size");
  }
  if (cfg.out.empty()) fail("out", "output prefix must not be empty");
  if (cfg.threads < 0) fail("threads", "must be >= 0");
  return errors;
}

std::string resolve_out_prefix(const std::string& out) {
  const char* base = std::getenv("KHM_OUT_DIR");
  if (base == nullptr || *base == '\0') return out;
  const std::filesystem::path p(out);
  if (p.is_absolute()) return out;
  return (std::filesystem::path(base) / p).string();
}

int cmd_sweep(const RunConfig& cfg) {
  apply_thread_hint(cfg.threads);
  const std::string prefix = resolve_out_prefix(cfg.out);
  const EvolutionLine line = line_from_name(cfg.line);

  json summary;
  summary["config"] = config_echo(cfg);
  summary["files"] = json::array();
  summary["per_size"] = json::array();
  std::vector<std::string> failures;

  for (int L : cfg.sizes) {
    const SweepRecord record = sweep(line, cfg.lambda_lo, cfg.lambda_hi,
                                     cfg.steps, L);
    const std::string path = prefix + "_L" + std::to_string(L) + ".csv";
    auto out = open_output(path);
    out << "lambda,chi_f,chi_f_per_site,gap\n";
    int degenerate = 0;
    for (const auto& s : record.samples) {
      out << g17(s.lambda) << ',' << g17(s.chi) << ',' << g17(s.chi_per_site)
          << ',' << g17(s.gap) << '\n';
      if (s.degenerate) {
        ++degenerate;
        failures.push_back("L=" + std::to_string(L) +
                           " lambda=" + g17(s.lambda) + ": grid zero mode");
      }
    }

    json entry;
    entry["L"] = L;
    entry["file"] = path;
    entry["degenerate_samples"] = degenerate;
    try {
      const PeakSet peaks = find_peaks(record, cfg.lambda_lo, cfg.lambda_hi);
      entry["peak_count"] = peaks.peaks.size();
      entry["lambda_max"] = peaks.lambda_max;
      entry["chi_max"] = peaks.chi_max;
      entry["chi_max_per_site"] = peaks.chi_max / (2.0 * L * L);
    } catch (const std::exception& e) {
      entry["peak_error"] = e.what();
    }
    summary["per_size"].push_back(entry);
    summary["files"].push_back(path);
  }

  summary["failures"] = failures;
  write_json(prefix + "_summary.json", summary);
  if (!failures.empty()) {
    for (const auto& f : failures) std::cerr << "sweep: " << f << "\n";
    return 1;
  }
  return 0;
}

int cmd_correlate(const RunConfig& cfg) {
  apply_thread_hint(cfg.threads);
  const std::string prefix = resolve_out_prefix(cfg.out);
  const int L = cfg.sizes.at(0);
  const Couplings c = EvolutionLine::jx_eq_jy().point(cfg.jz);
  const CorrelationProfile profile = correlation_profile_fast(c, L);

  const auto cut = profile.diagonal_cut();
  {
    auto out = open_output(prefix + "_corr.csv");
    out << "r,C,abs_C\n";
    for (const auto& [r, value] : cut)
      out << r << ',' << g17(value) << ',' << g17(std::abs(value)) << '\n';
  }

  json summary;
  summary["config"] = config_echo(cfg);
  summary["L"] = L;
  summary["couplings"] = {c.jx, c.jy, c.jz};
  summary["phase"] = to_string(phase_of(c));
  summary["files"] = json::array({prefix + "_corr.csv"});

  std::string fit_kind = cfg.fit;
  if (fit_kind == "auto")
    fit_kind = (phase_of(c) == Phase::A) ? "exp" : "power";

  int rc = 0;
  if (fit_kind != "none") {
    const bool exponential = fit_kind == "exp";
    const int rmin = cfg.fit_rmin >= 0 ? cfg.fit_rmin : default_fit_rmin(exponential);
    const int rmax = cfg.fit_rmax >= 0 ? cfg.fit_rmax : default_fit_rmax(exponential);
    try {
      const DecayFit fit =
          exponential
              ? fit_exponential(profile, rmin, rmax, cfg.crossing_margin)
              : fit_power_law(profile, rmin, rmax, cfg.crossing_margin);
      json jf;
      jf["kind"] = exponential ? "exponential" : "power_law";
      jf[exponential ? "xi" : "exponent"] = fit.value;
      jf["std_error"] = fit.std_error;
      jf["window"] = {fit.r_min, fit.r_max};
      jf["points_used"] = fit.points_used;
      jf["residual"] = fit.residual;
      if (exponential) {
        const double xi_theory = correlation_length_theory(cfg.jz);
        jf["xi_theory"] = xi_theory;
        jf["inverse_xi_ratio_fit_over_theory"] = xi_theory / fit.value;
      }
      summary["fit"] = jf;
    } catch (const std::exception& e) {
      summary["fit_error"] = e.what();
      std::cerr << "correlate: fit failed: " << e.what() << "\n";
      rc = 1;
    }
  }

  if (cfg.dump_profile) {
    const std::string path = prefix + "_profile.csv";
    auto out = open_output(path);
    out << "dx,dy,C\n";
    const int m = (L - 1) / 2;
    for (int dx = -m; dx <= m; ++dx)
      for (int dy = -m; dy <= m; ++dy)
        out << dx << ',' << dy << ',' << g17(profile.at(dx, dy)) << '\n';
    summary["files"].push_back(path);
  }

  write_json(prefix + "_fit.json", summary);
  return rc;
}

int cmd_scale(const RunConfig& cfg) {
  apply_thread_hint(cfg.threads);
  const std::string prefix = resolve_out_prefix(cfg.out);
  const EvolutionLine line = line_from_name(cfg.line);

  std::vector<SweepRecord> records;
  records.reserve(cfg.sizes.size());
  for (int L : cfg.sizes)
    records.push_back(sweep(line, cfg.lambda_lo, cfg.lambda_hi, cfg.steps, L));

  json summary;
  summary["config"] = config_echo(cfg);

  CollapseOptions options;
  options.nu_lo = cfg.nu_lo;
  options.nu_hi = cfg.nu_hi;
  options.x_max = cfg.x_max;
  try {
    const CollapseResult result = collapse(records, options);
    summary["mu"] = result.mu;
    summary["mu_err"] = result.mu_err;
    summary["nu"] = result.nu;
    summary["nu_err"] = result.nu_err;
    summary["alpha"] = result.alpha;
    summary["residual"] = result.residual;

    json per_size = json::array();
    for (std::size_t k = 0; k < records.size(); ++k) {
      const PeakSet ps = find_peaks(records[k], cfg.lambda_lo, cfg.lambda_hi);
      per_size.push_back({{"L", records[k].L},
                          {"lambda_max", ps.lambda_max},
                          {"chi_max", ps.chi_max},
                          {"chi_max_per_site",
                           ps.chi_max / (2.0 * records[k].L * records[k].L)}});
    }
    summary["per_size"] = per_size;

    const std::string curves_path = prefix + "_collapse.csv";
    auto out = open_output(curves_path);
    out << "L,x,y\n";
    for (const auto& curve : result.curves)
      for (std::size_t i = 0; i < curve.x.size(); ++i)
        out << curve.L << ',' << g17(curve.x[i]) << ',' << g17(curve.y[i])
            << '\n';
    summary["files"] = json::array({curves_path});
  } catch (const collapse_error& e) {
    summary["error"] = e.what();
    json curve = json::array();
    for (const auto& [nu, res] : e.residual_curve())
      curve.push_back({{"nu", nu}, {"residual", res}});
    summary["residual_curve"] = curve;
    write_json(prefix + "_scale.json", summary);
    std::cerr << "scale: " << e.what() << "\n";
    return 1;
  }

  write_json(prefix + "_scale.json", summary);
  return 0;
}

int cmd_phase_diagram(const RunConfig& cfg) {
  apply_thread_hint(cfg.threads);
  const std::string prefix = resolve_out_prefix(cfg.out);
  const int L = cfg.sizes.empty() ? 31 : cfg.sizes.at(0);
  const int res = cfg.resolution;

  struct Cell {
    double jx, jy, jz;
    Phase phase;
    double gap_value;
  };
  std::vector<Cell> cells;
  for (int i = 0; i <= res; ++i) {
    for (int j = 0; j <= res - i; ++j) {
      const int k = res - i - j;
      const double jx = static_cast<double>(i) / res;
      const double jy = static_cast<double>(j) / res;
      const double jz = static_cast<double>(k) / res;
      cells.push_back({jx, jy, jz, Phase::B, 0.0});
    }
  }
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < cells.size(); ++n) {
    auto& cell = cells[n];
    const Couplings c = Couplings::on_plane(cell.jx, cell.jy, cell.jz);
    cell.phase = phase_of(c);
    cell.gap_value = gap(c, L);
  }

  const std::string path = prefix + "_phase.csv";
  auto out = open_output(path);
  out << "jx,jy,jz,phase,gap\n";
  int boundary = 0, a_cells = 0, b_cells = 0;
  for (const auto& cell : cells) {
    out << g17(cell.jx) << ',' << g17(cell.jy) << ',' << g17(cell.jz) << ','
        << to_string(cell.phase) << ',' << g17(cell.gap_value) << '\n';
    if (cell.phase == Phase::Boundary) ++boundary;
    if (cell.phase == Phase::A) ++a_cells;
    if (cell.phase == Phase::B) ++b_cells;
  }

  json summary;
  summary["config"] = config_echo(cfg);
  summary["L"] = L;
  summary["cells"] = cells.size();
  summary["a_cells"] = a_cells;
  summary["b_cells"] = b_cells;
  summary["boundary_cells"] = boundary;
  summary["files"] = json::array({path});
  write_json(prefix + "_phase.json", summary);
  return 0;
}

int cmd_fidelity(const RunConfig& cfg) {
  apply_thread_hint(cfg.threads);
  const std::string prefix = resolve_out_prefix(cfg.out);
  const int L = cfg.sizes.at(0);
  const Couplings a(cfg.c1[0], cfg.c1[1], cfg.c1[2]);
  const Couplings b(cfg.c2[0], cfg.c2[1], cfg.c2[2]);

  json summary;
  summary["config"] = config_echo(cfg);
  int rc = 0;
  try {
    const FidelityResult f = fidelity(a, b, L);
    summary["fidelity"] = f.value;
    summary["log_fidelity"] = f.log_value;
    summary["underflow"] = f.underflow;
  } catch (const degeneracy_error& e) {
    summary["error"] = e.what();
    std::cerr << "fidelity: " << e.what() << "\n";
    rc = 1;
  }
  write_json(prefix + "_fidelity.json", summary);
  return rc;
}

int run(const RunConfig& cfg) {
  const auto errors = validate(cfg);
  if (!errors.empty()) {
    for (const auto& e : errors) std::cerr << "config error: " << e << "\n";
    return 2;
  }
  try {
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "correlate") return cmd_correlate(cfg);
    if (cfg.command == "scale") return cmd_scale(cfg);
    if (cfg.command == "phase-diagram") return cmd_phase_diagram(cfg);
    if (cfg.command == "fidelity") return cmd_fidelity(cfg);
  } catch (const std::exception& e) {
    std::cerr << cfg.command << ": " << e.what() << "\n";
    return 1;
  }
  std::cerr << "config error: command: unknown command '" << cfg.command << "'\n";
  return 2;
}

}  // namespace khm::cli
