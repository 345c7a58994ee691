#include "khm/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "khm/reduction.hpp"

namespace khm {

namespace {

[[noreturn]] void throw_zero_mode(double qx, double qy) {
  throw degeneracy_error("grid zero mode at q = (" + std::to_string(qx) + ", " +
                             std::to_string(qy) + ")",
                         qx, qy);
}

}  // namespace

FidelityResult fidelity(const Couplings& a, const Couplings& b, int L) {
  const MomentumGrid grid(L);
  FidelityResult result;
  CompensatedSum log_sum;
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    const SpectralPoint pa = spectral(a, qx, qy);
    const SpectralPoint pb = spectral(b, qx, qy);
    if (pa.degenerate || pb.degenerate) throw_zero_mode(qx, qy);
    const double factor = std::abs(std::cos(pa.theta - pb.theta));
    if (factor == 0.0) {
      result.underflow = true;
      continue;
    }
    log_sum.add(std::log(factor));
  }
  result.log_value = log_sum.value();
  result.value = result.underflow ? 0.0 : std::exp(result.log_value);
  if (result.underflow) result.log_value = -std::numeric_limits<double>::infinity();
  return result;
}

ThetaGradient theta_gradient(const Couplings& c, double qx, double qy) {
  const SpectralPoint p = spectral(c, qx, qy);
  if (p.degenerate) throw_zero_mode(qx, qy);
  const double d = p.eps * p.eps + p.delta * p.delta;
  const double sxy = std::sin(qx - qy);
  const double sx = std::sin(qx);
  const double sy = std::sin(qy);
  const double sgn = p.delta < 0.0 ? -1.0 : 1.0;  // sgn(0) := +1
  ThetaGradient g;
  g.d2theta[0] = (c.jz * sx + c.jy * sxy) / d * sgn;
  g.d2theta[1] = -(c.jx * sxy - c.jz * sy) / d * sgn;
  g.d2theta[2] = -(c.jx * sx + c.jy * sy) / d * sgn;
  return g;
}

double MetricTensor::operator()(int a, int b) const {
  static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return packed[static_cast<std::size_t>(idx[a][b])];
}

std::array<std::array<double, 3>, 3> MetricTensor::matrix() const {
  std::array<std::array<double, 3>, 3> m{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m[a][b] = (*this)(a, b);
  return m;
}

MetricTensor metric_tensor(const Couplings& c, int L) {
  const MomentumGrid grid(L);
  CompensatedSum acc[6];
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    const ThetaGradient g = theta_gradient(c, qx, qy);
    const auto& t = g.d2theta;
    acc[0].add(t[0] * t[0]);
    acc[1].add(t[0] * t[1]);
    acc[2].add(t[0] * t[2]);
    acc[3].add(t[1] * t[1]);
    acc[4].add(t[1] * t[2]);
    acc[5].add(t[2] * t[2]);
  }
  MetricTensor m;
  for (int k = 0; k < 6; ++k) m.packed[static_cast<std::size_t>(k)] = 0.25 * acc[k].value();
  return m;
}

double chi_f(const Couplings& c, const std::array<double, 3>& tangent, int L) {
  const MetricTensor g = metric_tensor(c, L);
  double chi = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) chi += g(a, b) * tangent[a] * tangent[b];
  return std::max(chi, 0.0);
}

LineSweeper::LineSweeper(EvolutionLine::Kind kind, int L) : kind_(kind), L_(L) {
  if (kind == EvolutionLine::Kind::segment)
    throw std::invalid_argument("closed form exists only on the special lines");
  const MomentumGrid grid(L);
  const std::size_t n = static_cast<std::size_t>(grid.size());
  if (kind_ == EvolutionLine::Kind::jx_eq_jy) {
    sin_sum_.resize(n);
    cos_sum_.resize(n);
    for (int i = 0; i < grid.size(); ++i) {
      const auto [qx, qy] = grid.momentum(i);
      sin_sum_[static_cast<std::size_t>(i)] = std::sin(qx) + std::sin(qy);
      cos_sum_[static_cast<std::size_t>(i)] = std::cos(qx) + std::cos(qy);
    }
  } else {
    sin_x_.resize(n);
    sin_y_.resize(n);
    cos_x_.resize(n);
    cos_y_.resize(n);
    numer_.resize(n);
    for (int i = 0; i < grid.size(); ++i) {
      const auto [qx, qy] = grid.momentum(i);
      const std::size_t k = static_cast<std::size_t>(i);
      sin_x_[k] = std::sin(qx);
      sin_y_[k] = std::sin(qy);
      cos_x_[k] = std::cos(qx);
      cos_y_[k] = std::cos(qy);
      numer_[k] = (sin_x_[k] - sin_y_[k]) + 2.0 * std::sin(qx - qy);
    }
  }
}

LineSweeper::Sample LineSweeper::sample(double lambda) const {
  Sample s;
  const double tol2 = kZeroModeTol * kZeroModeTol;  // on-plane: couplings sum to 1
  CompensatedSum acc;
  double dmin = std::numeric_limits<double>::infinity();
  if (kind_ == EvolutionLine::Kind::jx_eq_jy) {
    const double j = 0.5 * (1.0 - lambda);
    for (std::size_t i = 0; i < sin_sum_.size(); ++i) {
      const double eps = j * cos_sum_[i] + lambda;
      const double delta = j * sin_sum_[i];
      const double d = eps * eps + delta * delta;
      dmin = std::min(dmin, d);
      const double ratio = sin_sum_[i] / d;
      acc.add(ratio * ratio);
    }
  } else {
    const double jx = lambda;
    const double jy = 2.0 / 3.0 - lambda;
    for (std::size_t i = 0; i < sin_x_.size(); ++i) {
      const double eps = jx * cos_x_[i] + jy * cos_y_[i] + 1.0 / 3.0;
      const double delta = jx * sin_x_[i] + jy * sin_y_[i];
      const double d = eps * eps + delta * delta;
      dmin = std::min(dmin, d);
      const double ratio = numer_[i] / d;
      acc.add(ratio * ratio);
    }
  }
  s.gap = 2.0 * std::sqrt(dmin);
  if (dmin <= tol2) {
    s.degenerate = true;
    s.chi = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double norm =
      (kind_ == EvolutionLine::Kind::jx_eq_jy) ? 1.0 / 16.0 : 1.0 / 36.0;
  s.chi = norm * acc.value();
  return s;
}

double LineSweeper::chi(double lambda) const {
  const EvolutionLine line = (kind_ == EvolutionLine::Kind::jx_eq_jy)
                                 ? EvolutionLine::jx_eq_jy()
                                 : EvolutionLine::jz_third();
  if (!line.contains(lambda))
    throw std::invalid_argument("lambda = " + std::to_string(lambda) +
                                " outside the line domain");
  const Sample s = sample(lambda);
  if (s.degenerate)
    throw degeneracy_error("grid zero mode on the " +
                               std::string(to_string(kind_)) +
                               " line at lambda = " + std::to_string(lambda),
                           0.0, 0.0);
  return s.chi;
}

double chi_line_closed_form(EvolutionLine::Kind kind, double lambda, int L) {
  return LineSweeper(kind, L).chi(lambda);
}

double chi_finite_difference(const EvolutionLine& line, double lambda,
                             double dlambda, int L) {
  if (dlambda <= 0.0) throw std::invalid_argument("dlambda must be positive");
  if (!line.contains(lambda - dlambda) || !line.contains(lambda + dlambda))
    throw std::invalid_argument("finite-difference stencil leaves the line domain");
  const Couplings c0 = line.point(lambda);
  const FidelityResult fwd = fidelity(c0, line.point(lambda + dlambda), L);
  const FidelityResult bwd = fidelity(c0, line.point(lambda - dlambda), L);
  if (fwd.underflow || bwd.underflow)
    throw oracle_error("fidelity underflow in the finite-difference stencil");
  return -(fwd.log_value + bwd.log_value) / (dlambda * dlambda);
}

}  // namespace khm
