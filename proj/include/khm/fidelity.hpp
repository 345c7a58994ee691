#pragma once

#include <array>
#include <vector>

#include "khm/model.hpp"

namespace khm {

struct FidelityResult {
  double value = 1.0;      // F in [0, 1]
  double log_value = 0.0;  // sum_q ln|cos(theta_q - theta'_q)|
  bool underflow = false;  // a factor was exactly zero (orthogonal ground states)
};

/// Ground-state fidelity F = prod_q |cos(theta_q - theta'_q)|, accumulated in
/// log space.  Throws degeneracy_error if either spectrum has a grid zero
/// mode.  F(c, c) == 1 exactly.
FidelityResult fidelity(const Couplings& a, const Couplings& b, int L);

/// d(2 theta_q)/dJ_a for a = x, y, z:
///
///   d(2t)/dJx =  [Jz sin qx + Jy sin(qx-qy)] / (eps^2+delta^2) * sgn(delta)
///   d(2t)/dJy = -[Jx sin(qx-qy) - Jz sin qy] / (eps^2+delta^2) * sgn(delta)
///   d(2t)/dJz = -[Jx sin qx + Jy sin qy]     / (eps^2+delta^2) * sgn(delta)
///
/// with sgn(0) := +1.  The sign convention is unobservable downstream: the
/// factor squares out of chi_F and pairs up in the metric at equal q.
struct ThetaGradient {
  std::array<double, 3> d2theta{};
};

ThetaGradient theta_gradient(const Couplings& c, double qx, double qy);

/// Coupling-space Riemann metric g_ab = (1/4) sum_q d2theta_a d2theta_b.
/// Symmetric positive semidefinite; the radial direction (jx, jy, jz) is an
/// exact null vector because theta_q depends only on coupling ratios.
struct MetricTensor {
  // xx, xy, xz, yy, yz, zz
  std::array<double, 6> packed{};

  double operator()(int a, int b) const;
  std::array<std::array<double, 3>, 3> matrix() const;
};

MetricTensor metric_tensor(const Couplings& c, int L);

/// chi_F along a direction: contraction sum_ab g_ab n^a n^b.  Nonnegative.
double chi_f(const Couplings& c, const std::array<double, 3>& tangent, int L);

/// Closed-form chi_F on the two special lines:
///   jx_eq_jy : (1/16) sum_q [ (sin qx + sin qy) / (eps^2+delta^2) ]^2
///   jz_third : (1/36) sum_q [ ((sin qx - sin qy) + 2 sin(qx-qy))
///                             / (eps^2+delta^2) ]^2
double chi_line_closed_form(EvolutionLine::Kind kind, double lambda, int L);

/// Closed-form chi evaluator with precomputed per-grid trig tables, for
/// repeated sampling of one line.  chi_line_closed_form is a one-shot
/// wrapper around this, so sweeps and standalone evaluations agree bitwise.
class LineSweeper {
 public:
  LineSweeper(EvolutionLine::Kind kind, int L);

  struct Sample {
    double chi = 0.0;       // NaN when degenerate
    double gap = 0.0;       // 2 min_q E_q
    bool degenerate = false;
  };

  Sample sample(double lambda) const;
  double chi(double lambda) const;  // throws degeneracy_error on a zero mode
  int linear_size() const { return L_; }
  EvolutionLine::Kind kind() const { return kind_; }

 private:
  EvolutionLine::Kind kind_;
  int L_;
  std::vector<double> sin_sum_;  // sin qx + sin qy
  std::vector<double> cos_sum_;  // cos qx + cos qy
  std::vector<double> sin_x_, sin_y_, cos_x_, cos_y_;
  std::vector<double> numer_;    // (sin qx - sin qy) + 2 sin(qx - qy)
};

/// Finite-difference oracle chi_F = -2 ln F / dlambda^2, averaged over the
/// forward and backward steps (the symmetric mean cancels the cubic term).
/// Throws oracle_error if the fidelity underflows to zero.
double chi_finite_difference(const EvolutionLine& line, double lambda,
                             double dlambda, int L);

}  // namespace khm
