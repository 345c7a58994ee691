#include "khm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "khm/reduction.hpp"

namespace khm {

Couplings::Couplings(double x, double y, double z) : jx(x), jy(y), jz(z) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throw std::invalid_argument("couplings must be finite");
  if (x < 0.0 || y < 0.0 || z < 0.0)
    throw std::invalid_argument("couplings must be nonnegative");
}

Couplings Couplings::on_plane(double x, double y, double z) {
  Couplings c(x, y, z);
  if (std::abs(c.sum() - 1.0) > kPlaneTol)
    throw std::invalid_argument("couplings off the jx+jy+jz=1 plane: sum = " +
                                std::to_string(c.sum()));
  return c;
}

bool Couplings::on_simplex(double tol) const {
  return std::abs(sum() - 1.0) <= tol;
}

Phase phase_of(const Couplings& c) {
  if (!c.on_simplex())
    throw std::invalid_argument("phase_of requires on-plane couplings");
  const double m = std::max({c.jx, c.jy, c.jz});
  if (std::abs(m - 0.5) <= kPlaneTol) return Phase::Boundary;
  return m < 0.5 ? Phase::B : Phase::A;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::A: return "A";
    case Phase::B: return "B";
    default: return "Boundary";
  }
}

MomentumGrid::MomentumGrid(int L) : L_(L) {
  if (L < 1 || L % 2 == 0)
    throw std::invalid_argument("L must be odd and positive, got " +
                                std::to_string(L));
}

std::pair<double, double> MomentumGrid::momentum(int i) const {
  const auto [nx, ny] = index(i);
  const double two_pi = 2.0 * std::numbers::pi;
  return {two_pi * nx / L_, two_pi * ny / L_};
}

std::vector<std::pair<double, double>> MomentumGrid::momenta() const {
  std::vector<std::pair<double, double>> qs;
  qs.reserve(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) qs.push_back(momentum(i));
  return qs;
}

SpectralPoint spectral(const Couplings& c, double qx, double qy) {
  SpectralPoint p;
  p.eps = c.jx * std::cos(qx) + c.jy * std::cos(qy) + c.jz;
  p.delta = c.jx * std::sin(qx) + c.jy * std::sin(qy);
  p.energy = std::hypot(p.eps, p.delta);
  if (p.energy <= kZeroModeTol * c.sum()) {
    p.degenerate = true;
    p.theta = 0.0;
  } else {
    p.theta = 0.5 * std::atan2(p.delta, p.eps);
  }
  return p;
}

double ground_energy(const Couplings& c, int L) {
  const MomentumGrid grid(L);
  return -compensated_sum(grid.size(), [&](std::int64_t i) {
    const auto [qx, qy] = grid.momentum(static_cast<int>(i));
    return spectral(c, qx, qy).energy;
  });
}

double gap(const Couplings& c, int L) {
  const MomentumGrid grid(L);
  double emin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    emin = std::min(emin, spectral(c, qx, qy).energy);
  }
  return 2.0 * emin;
}

std::vector<double> lowest_excitations(const Couplings& c, int L, int k) {
  const MomentumGrid grid(L);
  if (k < 1 || k > grid.size())
    throw std::invalid_argument("k must be in [1, L^2]");
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const auto [qx, qy] = grid.momentum(i);
    e.push_back(2.0 * spectral(c, qx, qy).energy);
  }
  std::partial_sort(e.begin(), e.begin() + k, e.end());
  e.resize(static_cast<std::size_t>(k));
  return e;
}

EvolutionLine EvolutionLine::jx_eq_jy() {
  return EvolutionLine(Kind::jx_eq_jy, Couplings(), Couplings());
}

EvolutionLine EvolutionLine::jz_third() {
  return EvolutionLine(Kind::jz_third, Couplings(), Couplings());
}

EvolutionLine EvolutionLine::segment(const Couplings& from, const Couplings& to) {
  if (!from.on_simplex() || !to.on_simplex())
    throw std::invalid_argument("segment endpoints must be on-plane");
  return EvolutionLine(Kind::segment, from, to);
}

std::pair<double, double> EvolutionLine::domain() const {
  switch (kind_) {
    case Kind::jx_eq_jy: return {0.0, 1.0};
    case Kind::jz_third: return {0.0, 2.0 / 3.0};
    default: return {0.0, 1.0};
  }
}

bool EvolutionLine::contains(double lambda) const {
  const auto [lo, hi] = domain();
  if (kind_ == Kind::segment) return lambda >= lo && lambda <= hi;
  return lambda > lo && lambda < hi;  // open interval on the special lines
}

Couplings EvolutionLine::point(double lambda) const {
  if (!contains(lambda))
    throw std::invalid_argument("lambda = " + std::to_string(lambda) +
                                " outside the line domain");
  switch (kind_) {
    case Kind::jx_eq_jy: {
      const double j = 0.5 * (1.0 - lambda);
      return Couplings::on_plane(j, j, lambda);
    }
    case Kind::jz_third:
      return Couplings::on_plane(lambda, 2.0 / 3.0 - lambda, 1.0 / 3.0);
    default: {
      const double x = from_.jx + lambda * (to_.jx - from_.jx);
      const double y = from_.jy + lambda * (to_.jy - from_.jy);
      const double z = from_.jz + lambda * (to_.jz - from_.jz);
      return Couplings::on_plane(x, y, z);
    }
  }
}

std::array<double, 3> EvolutionLine::tangent() const {
  switch (kind_) {
    case Kind::jx_eq_jy: return {-0.5, -0.5, 1.0};
    case Kind::jz_third: return {1.0, -1.0, 0.0};
    default:
      return {to_.jx - from_.jx, to_.jy - from_.jy, to_.jz - from_.jz};
  }
}

const char* to_string(EvolutionLine::Kind k) {
  switch (k) {
    case EvolutionLine::Kind::jx_eq_jy: return "jx-eq-jy";
    case EvolutionLine::Kind::jz_third: return "jz-third";
    default: return "segment";
  }
}

}  // namespace khm
