#include "khm/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "khm/reduction.hpp"

namespace khm {

SweepRecord sweep(const EvolutionLine& line, double lambda_lo, double lambda_hi,
                  int steps, int L) {
  if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
  if (!(lambda_hi > lambda_lo))
    throw std::invalid_argument("sweep window must have lambda_hi > lambda_lo");
  if (!line.contains(lambda_lo) || !line.contains(lambda_hi))
    throw std::invalid_argument("sweep window leaves the line domain");

  const LineSweeper sweeper(line.kind(), L);
  const double sites = 2.0 * L * L;
  SweepRecord record;
  record.line = line.kind();
  record.L = L;
  record.samples.resize(static_cast<std::size_t>(steps));
  const double h = (lambda_hi - lambda_lo) / (steps - 1);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < steps; ++i) {
    const double lambda = lambda_lo + i * h;
    const LineSweeper::Sample sample = sweeper.sample(lambda);
    auto& out = record.samples[static_cast<std::size_t>(i)];
    out.lambda = lambda;
    out.chi = sample.chi;
    out.chi_per_site = sample.chi / sites;
    out.gap = sample.gap;
    out.degenerate = sample.degenerate;
  }
  return record;
}

namespace {

// Vertex of the parabola through three uniformly spaced samples.
void refine_parabola(const SweepSample& a, const SweepSample& b,
                     const SweepSample& c, double* lambda, double* value) {
  const double denom = a.chi - 2.0 * b.chi + c.chi;
  *lambda = b.lambda;
  *value = b.chi;
  if (denom >= 0.0) return;  // flat or not a maximum; keep the grid point
  const double h = b.lambda - a.lambda;
  *lambda = b.lambda + 0.5 * h * (a.chi - c.chi) / denom;
  *value = b.chi - (a.chi - c.chi) * (a.chi - c.chi) / (8.0 * denom);
}

std::pair<std::size_t, std::size_t> window_range(const SweepRecord& record,
                                                 double lo, double hi) {
  const auto& s = record.samples;
  std::size_t first = 0;
  while (first < s.size() && s[first].lambda < lo) ++first;
  std::size_t last = s.size();
  while (last > first && s[last - 1].lambda > hi) --last;
  if (first >= last) throw std::invalid_argument("empty peak window");
  return {first, last};
}

}  // namespace

PeakSet find_peaks(const SweepRecord& record, double window_lo, double window_hi) {
  const auto [first, last] = window_range(record, window_lo, window_hi);
  const auto& s = record.samples;

  PeakSet set;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = first;
  for (std::size_t i = first; i < last; ++i) {
    if (s[i].degenerate) continue;
    if (s[i].chi > best) {
      best = s[i].chi;
      best_i = i;
    }
    if (i == 0 || i + 1 >= s.size()) continue;
    if (s[i - 1].degenerate || s[i + 1].degenerate) continue;
    if (s[i].chi > s[i - 1].chi && s[i].chi > s[i + 1].chi)
      set.peaks.push_back({static_cast<int>(i), s[i].lambda, s[i].chi});
  }
  if (!std::isfinite(best)) throw std::invalid_argument("no usable samples in window");

  set.raw_max = {static_cast<int>(best_i), s[best_i].lambda, s[best_i].chi};
  set.lambda_max = s[best_i].lambda;
  set.chi_max = s[best_i].chi;
  if (best_i > 0 && best_i + 1 < s.size() && !s[best_i - 1].degenerate &&
      !s[best_i + 1].degenerate && s[best_i].chi > s[best_i - 1].chi &&
      s[best_i].chi > s[best_i + 1].chi) {
    refine_parabola(s[best_i - 1], s[best_i], s[best_i + 1], &set.lambda_max,
                    &set.chi_max);
    set.refined_interior = true;
  }
  return set;
}

std::vector<Peak> gap_minima(const SweepRecord& record, double window_lo,
                             double window_hi) {
  const auto [first, last] = window_range(record, window_lo, window_hi);
  const auto& s = record.samples;
  std::vector<Peak> minima;
  for (std::size_t i = std::max<std::size_t>(first, 1);
       i < last && i + 1 < s.size(); ++i) {
    if (s[i].gap < s[i - 1].gap && s[i].gap < s[i + 1].gap)
      minima.push_back({static_cast<int>(i), s[i].lambda, s[i].gap});
  }
  return minima;
}

FitResult fit_mu(const std::vector<int>& sizes,
                 const std::vector<double>& peak_chi_per_site) {
  if (sizes.size() != peak_chi_per_site.size())
    throw std::invalid_argument("sizes and peak values must pair up");
  if (sizes.size() < 3) throw std::invalid_argument("fit_mu needs >= 3 sizes");
  const std::size_t n = sizes.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] <= 0 || !(peak_chi_per_site[i] > 0.0))
      throw std::domain_error("fit_mu needs positive sizes and chi values");
    xs[i] = std::log(static_cast<double>(sizes[i]));
    ys[i] = std::log(peak_chi_per_site[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::domain_error("fit_mu needs at least two distinct sizes");
  FitResult fit;
  fit.value = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - my - fit.value * (xs[i] - mx);
    ss_res += e * e;
  }
  fit.std_error =
      n > 2 ? std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
  return fit;
}

namespace {

struct RescaledCurves {
  // Per size: x = L^nu (lambda - lambda_max) within |x| <= x_max, and the
  // bounded collapse variable chi / chi_max used by the residual.
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ratio;
};

struct PeakInfo {
  double lambda_max = 0.0;
  double chi_max = 0.0;
};

RescaledCurves rescale(const std::vector<SweepRecord>& records,
                       const std::vector<PeakInfo>& peaks, double nu,
                       double x_max) {
  RescaledCurves out;
  out.xs.resize(records.size());
  out.ratio.resize(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const double scale = std::pow(static_cast<double>(records[k].L), nu);
    for (const auto& s : records[k].samples) {
      if (s.degenerate) continue;
      const double x = scale * (s.lambda - peaks[k].lambda_max);
      if (std::abs(x) > x_max) continue;
      out.xs[k].push_back(x);
      out.ratio[k].push_back(s.chi / peaks[k].chi_max);
    }
  }
  return out;
}

// Leave-one-size-out mean squared mismatch of chi/chi_max against the
// piecewise-linear interpolant of the pooled other sizes, normalized by the
// pooled variance so that shrinking the overlap cannot fake a good collapse.
double collapse_residual(const std::vector<SweepRecord>& records,
                         const std::vector<PeakInfo>& peaks, double nu,
                         double x_max) {
  const RescaledCurves curves = rescale(records, peaks, nu, x_max);
  const std::size_t nrec = records.size();

  double mean = 0.0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < nrec; ++k)
    for (double v : curves.ratio[k]) {
      mean += v;
      ++total;
    }
  if (total == 0) return std::numeric_limits<double>::infinity();
  mean /= static_cast<double>(total);

  double num = 0.0, den = 0.0;
  std::vector<std::pair<double, double>> pooled;
  for (std::size_t k = 0; k < nrec; ++k) {
    pooled.clear();
    for (std::size_t m = 0; m < nrec; ++m) {
      if (m == k) continue;
      for (std::size_t i = 0; i < curves.xs[m].size(); ++i)
        pooled.emplace_back(curves.xs[m][i], curves.ratio[m][i]);
    }
    if (pooled.size() < 2) continue;
    std::sort(pooled.begin(), pooled.end());
    for (std::size_t i = 0; i < curves.xs[k].size(); ++i) {
      const double x = curves.xs[k][i];
      if (x < pooled.front().first || x > pooled.back().first) continue;
      auto it = std::lower_bound(pooled.begin(), pooled.end(),
                                 std::make_pair(x, -std::numeric_limits<double>::infinity()));
      double y_interp;
      if (it == pooled.begin()) {
        y_interp = it->second;
      } else {
        const auto [x1, y1] = *(it - 1);
        const auto [x2, y2] = *it;
        y_interp = (x2 == x1) ? y1 : y1 + (y2 - y1) * (x - x1) / (x2 - x1);
      }
      const double dev = curves.ratio[k][i] - y_interp;
      num += dev * dev;
      den += (curves.ratio[k][i] - mean) * (curves.ratio[k][i] - mean);
    }
  }
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

namespace {

std::vector<PeakInfo> collapse_peaks(const std::vector<SweepRecord>& records) {
  std::vector<PeakInfo> peaks(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.samples.size() < 3)
      throw std::invalid_argument("records must contain at least 3 samples");
    const PeakSet ps =
        find_peaks(r, r.samples.front().lambda, r.samples.back().lambda);
    if (!ps.refined_interior)
      throw fit_error("record for L = " + std::to_string(r.L) +
                      " does not contain an interior global peak");
    peaks[k] = {ps.lambda_max, ps.chi_max};
  }
  return peaks;
}

}  // namespace

double collapse_residual_at(const std::vector<SweepRecord>& records, double nu,
                            const CollapseOptions& options) {
  return collapse_residual(records, collapse_peaks(records), nu, options.x_max);
}

CollapseResult collapse(const std::vector<SweepRecord>& records,
                        const CollapseOptions& options) {
  if (records.size() < 3)
    throw std::invalid_argument("collapse needs >= 3 system sizes");
  if (!(options.nu_hi > options.nu_lo))
    throw std::invalid_argument("invalid nu search range");

  const std::vector<PeakInfo> peaks = collapse_peaks(records);
  std::vector<int> sizes(records.size());
  std::vector<double> peak_chi_per_site(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    sizes[k] = records[k].L;
    peak_chi_per_site[k] =
        peaks[k].chi_max / (2.0 * records[k].L * records[k].L);
  }

  const auto residual_at = [&](double nu) {
    return collapse_residual(records, peaks, nu, options.x_max);
  };

  // Golden-section search on [nu_lo, nu_hi].
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = options.nu_lo, b = options.nu_hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = residual_at(c);
  double fd = residual_at(d);
  while (b - a > options.tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = residual_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = residual_at(d);
    }
  }
  const double nu = 0.5 * (a + b);
  const double res_min = residual_at(nu);
  const double res_lo = residual_at(options.nu_lo);
  const double res_hi = residual_at(options.nu_hi);
  if (!(res_min < res_lo && res_min < res_hi)) {
    std::vector<std::pair<double, double>> curve;
    const int samples = 41;
    for (int i = 0; i < samples; ++i) {
      const double v =
          options.nu_lo + (options.nu_hi - options.nu_lo) * i / (samples - 1);
      curve.emplace_back(v, residual_at(v));
    }
    throw collapse_error("no interior residual minimum in the nu search range",
                         std::move(curve));
  }

  CollapseResult result;
  result.nu = nu;
  result.residual = res_min;

  // Sensitivity half-width: where the residual doubles.
  const double step = (options.nu_hi - options.nu_lo) / 200.0;
  double lo = nu, hi = nu;
  while (lo - step >= options.nu_lo && residual_at(lo - step) < 2.0 * res_min)
    lo -= step;
  while (hi + step <= options.nu_hi && residual_at(hi + step) < 2.0 * res_min)
    hi += step;
  result.nu_err = 0.5 * (hi - lo);

  const FitResult mu = fit_mu(sizes, peak_chi_per_site);
  result.mu = mu.value;
  result.mu_err = mu.std_error;
  result.alpha = result.mu / result.nu;

  for (std::size_t k = 0; k < records.size(); ++k) {
    CollapseCurve curve;
    curve.L = records[k].L;
    const double scale = std::pow(static_cast<double>(records[k].L), nu);
    for (const auto& s : records[k].samples) {
      if (s.degenerate) continue;
      const double x = scale * (s.lambda - peaks[k].lambda_max);
      if (std::abs(x) > options.x_max) continue;
      curve.x.push_back(x);
      curve.y.push_back((peaks[k].chi_max - s.chi) / s.chi);
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

}  // namespace khm
