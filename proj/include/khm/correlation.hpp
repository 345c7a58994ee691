#pragma once

#include <utility>
#include <vector>

#include "khm/model.hpp"

namespace khm {

/// Two-point z-bond expectation (1/N) sum_q eps_q / E_q with N = 2 L^2.
/// Equals 1/2 at the dimer point (0,0,1).  Note this is the per-site
/// normalization; the per-z-bond value from -dE0/dJz is twice this.
double bond_expectation(const Couplings& c, int L);

/// Four-point z-bond correlator by the exact double momentum sum
///   (1/N^2) sum_{q != q'} {cos[(q-q') . d] - 1}
///           (delta_q delta_q' - eps_q eps_q') / (E_q E_q')
/// for a cell displacement d != 0 (mod L).  O(L^4); the normative
/// definition that the factorized fast path must reproduce.
double four_point_naive(const Couplings& c, int L, std::pair<int, int> d);

/// Connected bond-bond correlation: four_point - bond_expectation^2.
double connected_correlation(const Couplings& c, int L, std::pair<int, int> d);

/// C(d) for every displacement on the L x L torus.  The origin entry is 0 by
/// convention (the correlation is defined for d != 0 only).
struct CorrelationProfile {
  int L = 0;
  Couplings couplings;
  std::vector<double> values;  // row-major, index (dx mod L) * L + (dy mod L)

  double at(int dx, int dy) const;

  /// Diagonal cut d = (r, r); r_max < 0 means up to (L-1)/2.
  std::vector<std::pair<int, double>> diagonal_cut(int r_max = -1) const;
};

/// All displacements at once via the algebraic factorization
///   C(d) = (1/N^2) ( |S_delta(d)|^2 - |S_eps(d)|^2 ),
///   S_X(d) = sum_q e^{i q . d} X_q / E_q,
/// with the transforms done as 2-D FFTs.  Matches connected_correlation
/// pointwise; C(d) = C(-d).
CorrelationProfile correlation_profile_fast(const Couplings& c, int L);

/// Closed-form correlation length on the jx_eq_jy line in the gapped phase:
/// 1/xi = 2 asinh( sqrt(2 jz - 1) / (1 - jz) ), jz in (1/2, 1).
double correlation_length_theory(double jz);

struct DecayFit {
  enum class Kind { power_law, exponential };
  Kind kind = Kind::exponential;
  double value = 0.0;      // decay exponent (power law) or xi (exponential)
  double std_error = 0.0;
  int r_min = 0;
  int r_max = 0;
  int points_used = 0;
  double residual = 0.0;   // mean squared residual of the log-space fit
};

inline constexpr int kDefaultExpFitRMin = 1;
inline constexpr int kDefaultExpFitRMax = 5;
inline constexpr int kDefaultPowerFitRMin = 6;
inline constexpr int kDefaultPowerFitRMax = 14;

/// Least-squares fit of ln|C| vs r over the diagonal cut.  Points within
/// crossing_margin of a sign change are excluded ("downward peaks" in |C|).
/// Requires >= 3 usable points and, when enforce_phase is set, gapped-phase
/// couplings.  Set enforce_phase = false for cross-phase fit-quality
/// diagnostics.
DecayFit fit_exponential(const CorrelationProfile& profile,
                         int r_min = kDefaultExpFitRMin,
                         int r_max = kDefaultExpFitRMax,
                         int crossing_margin = 1, bool enforce_phase = true);

/// Least-squares fit of ln|C| vs ln r; gapless-phase counterpart.
DecayFit fit_power_law(const CorrelationProfile& profile,
                       int r_min = kDefaultPowerFitRMin,
                       int r_max = kDefaultPowerFitRMax,
                       int crossing_margin = 1, bool enforce_phase = true);

}  // namespace khm
