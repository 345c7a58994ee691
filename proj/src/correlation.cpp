#include "khm/correlation.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>

#include "khm/reduction.hpp"

namespace khm {

namespace {

// eps/E and delta/E over the grid; throws on zero modes (the ratios are
// singular there).
struct ModeRatios {
  std::vector<double> eps_over_e;
  std::vector<double> delta_over_e;
};

ModeRatios mode_ratios(const Couplings& c, const MomentumGrid& grid) {
  ModeRatios r;
  r.eps_over_e.resize(static_cast<std::size_t>(grid.size()));
  r.delta_over_e.resize(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    const SpectralPoint p = spectral(c, qx, qy);
    if (p.degenerate)
      throw degeneracy_error("grid zero mode at q = (" + std::to_string(qx) +
                                 ", " + std::to_string(qy) + ")",
                             qx, qy);
    r.eps_over_e[static_cast<std::size_t>(i)] = p.eps / p.energy;
    r.delta_over_e[static_cast<std::size_t>(i)] = p.delta / p.energy;
  }
  return r;
}

// FFTW plan creation is not thread-safe; execution of distinct plans is.
std::mutex fftw_plan_mutex;

}  // namespace

double bond_expectation(const Couplings& c, int L) {
  const MomentumGrid grid(L);
  const ModeRatios r = mode_ratios(c, grid);
  const double sum = compensated_sum(grid.size(), [&](std::int64_t i) {
    return r.eps_over_e[static_cast<std::size_t>(i)];
  });
  return sum / grid.sites();
}

double four_point_naive(const Couplings& c, int L, std::pair<int, int> d) {
  const MomentumGrid grid(L);
  const auto [dx, dy] = d;
  if (dx % L == 0 && dy % L == 0)
    throw std::invalid_argument("displacement must be nonzero mod L");
  const ModeRatios r = mode_ratios(c, grid);

  // cos[(q - q') . d] = Re(w_q conj(w_q')) with w_q = e^{i q . d}
  std::vector<std::complex<double>> w(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    const double phase = qx * dx + qy * dy;
    w[static_cast<std::size_t>(i)] = {std::cos(phase), std::sin(phase)};
  }

  const int n = grid.size();
  CompensatedSum acc;
  for (int i = 0; i < n; ++i) {
    const double de_i = r.delta_over_e[static_cast<std::size_t>(i)];
    const double ee_i = r.eps_over_e[static_cast<std::size_t>(i)];
    const std::complex<double> wi = w[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;  // kernel vanishes at q == q' anyway
      const double kernel =
          wi.real() * w[static_cast<std::size_t>(j)].real() +
          wi.imag() * w[static_cast<std::size_t>(j)].imag() - 1.0;
      acc.add(kernel * (de_i * r.delta_over_e[static_cast<std::size_t>(j)] -
                        ee_i * r.eps_over_e[static_cast<std::size_t>(j)]));
    }
  }
  const double nsites = static_cast<double>(grid.sites());
  return acc.value() / (nsites * nsites);
}

double connected_correlation(const Couplings& c, int L, std::pair<int, int> d) {
  const double m = bond_expectation(c, L);
  return four_point_naive(c, L, d) - m * m;
}

double CorrelationProfile::at(int dx, int dy) const {
  const int ix = ((dx % L) + L) % L;
  const int iy = ((dy % L) + L) % L;
  return values[static_cast<std::size_t>(ix) * L + iy];
}

std::vector<std::pair<int, double>> CorrelationProfile::diagonal_cut(int r_max) const {
  if (r_max < 0) r_max = (L - 1) / 2;
  std::vector<std::pair<int, double>> cut;
  cut.reserve(static_cast<std::size_t>(r_max));
  for (int r = 1; r <= r_max; ++r) cut.emplace_back(r, at(r, r));
  return cut;
}

CorrelationProfile correlation_profile_fast(const Couplings& c, int L) {
  const MomentumGrid grid(L);
  const ModeRatios r = mode_ratios(c, grid);

  // S_X(d) = sum_n exp(2 pi i n . d / L) X(n).  Relabeling n -> n + (L-1)/2
  // only multiplies S by a unit phase, so |S| comes straight from the
  // unnormalized backward FFT of the relabeled array.
  const std::size_t n2 = static_cast<std::size_t>(L) * static_cast<std::size_t>(L);
  fftw_complex* in = fftw_alloc_complex(n2);
  fftw_complex* out_eps = fftw_alloc_complex(n2);
  fftw_complex* out_delta = fftw_alloc_complex(n2);

  fftw_plan plan_eps, plan_delta;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan_eps = fftw_plan_dft_2d(L, L, in, out_eps, FFTW_BACKWARD, FFTW_ESTIMATE);
    plan_delta = fftw_plan_dft_2d(L, L, in, out_delta, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  for (std::size_t i = 0; i < n2; ++i) {
    in[i][0] = r.eps_over_e[i];
    in[i][1] = 0.0;
  }
  fftw_execute(plan_eps);
  for (std::size_t i = 0; i < n2; ++i) {
    in[i][0] = r.delta_over_e[i];
    in[i][1] = 0.0;
  }
  fftw_execute(plan_delta);

  CorrelationProfile profile;
  profile.L = L;
  profile.couplings = c;
  profile.values.resize(n2);
  const double nsites = static_cast<double>(grid.sites());
  const double norm = 1.0 / (nsites * nsites);
  for (std::size_t i = 0; i < n2; ++i) {
    const double se2 = out_eps[i][0] * out_eps[i][0] + out_eps[i][1] * out_eps[i][1];
    const double sd2 =
        out_delta[i][0] * out_delta[i][0] + out_delta[i][1] * out_delta[i][1];
    profile.values[i] = norm * (sd2 - se2);
  }
  profile.values[0] = 0.0;  // C(d) is defined for d != 0 only

  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan_eps);
    fftw_destroy_plan(plan_delta);
  }
  fftw_free(in);
  fftw_free(out_eps);
  fftw_free(out_delta);
  return profile;
}

double correlation_length_theory(double jz) {
  if (!(jz > 0.5 && jz < 1.0))
    throw std::domain_error("correlation_length_theory needs jz in (1/2, 1)");
  return 1.0 / (2.0 * std::asinh(std::sqrt(2.0 * jz - 1.0) / (1.0 - jz)));
}

namespace {

DecayFit fit_decay(const CorrelationProfile& profile, DecayFit::Kind kind,
                   int r_min, int r_max, int crossing_margin, bool enforce_phase) {
  if (r_min < 1 || r_max <= r_min)
    throw std::invalid_argument("invalid fit window [" + std::to_string(r_min) +
                                ", " + std::to_string(r_max) + "]");
  if (enforce_phase) {
    const Phase phase = phase_of(profile.couplings);
    if (kind == DecayFit::Kind::exponential && phase != Phase::A)
      throw std::invalid_argument("exponential fits require gapped (A-phase) couplings");
    if (kind == DecayFit::Kind::power_law && phase != Phase::B)
      throw std::invalid_argument("power-law fits require gapless (B-phase) couplings");
  }

  const auto cut = profile.diagonal_cut(std::min(r_max + crossing_margin,
                                                 (profile.L - 1) / 2));
  // Mark points near a sign change; the dips of |C| there are artifacts of
  // zero crossings, not of the decay law.
  std::vector<bool> excluded(cut.size(), false);
  for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
    const double a = cut[i].second;
    const double b = cut[i + 1].second;
    if (a == 0.0) excluded[i] = true;
    if (b == 0.0) excluded[i + 1] = true;
    if (a * b < 0.0) {
      for (int off = 1 - crossing_margin; off <= crossing_margin; ++off) {
        const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) + off;
        if (k >= 0 && k < static_cast<std::ptrdiff_t>(cut.size()))
          excluded[static_cast<std::size_t>(k)] = true;
      }
    }
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < cut.size(); ++i) {
    const auto [r, value] = cut[i];
    if (r < r_min || r > r_max || excluded[i] || value == 0.0) continue;
    xs.push_back(kind == DecayFit::Kind::power_law ? std::log(static_cast<double>(r))
                                                   : static_cast<double>(r));
    ys.push_back(std::log(std::abs(value)));
  }
  if (xs.size() < 3)
    throw fit_error("fewer than 3 usable points in the fit window");

  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - my - slope * (xs[i] - mx);
    ss_res += e * e;
  }
  const double var_slope = n > 2 ? ss_res / (static_cast<double>(n) - 2.0) / sxx : 0.0;
  const double slope_err = std::sqrt(var_slope);

  if (slope >= 0.0) throw fit_error("correlation does not decay on the window");

  DecayFit fit;
  fit.kind = kind;
  fit.r_min = r_min;
  fit.r_max = r_max;
  fit.points_used = static_cast<int>(n);
  fit.residual = ss_res / static_cast<double>(n);
  if (kind == DecayFit::Kind::exponential) {
    fit.value = -1.0 / slope;                    // xi
    fit.std_error = slope_err / (slope * slope);
  } else {
    fit.value = -slope;                          // decay exponent
    fit.std_error = slope_err;
  }
  return fit;
}

}  // namespace

DecayFit fit_exponential(const CorrelationProfile& profile, int r_min, int r_max,
                         int crossing_margin, bool enforce_phase) {
  return fit_decay(profile, DecayFit::Kind::exponential, r_min, r_max,
                   crossing_margin, enforce_phase);
}

DecayFit fit_power_law(const CorrelationProfile& profile, int r_min, int r_max,
                       int crossing_margin, bool enforce_phase) {
  return fit_decay(profile, DecayFit::Kind::power_law, r_min, r_max,
                   crossing_margin, enforce_phase);
}

}  // namespace khm
