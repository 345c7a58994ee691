#pragma once

#include <array>
#include <utility>
#include <vector>

#include "khm/errors.hpp"

namespace khm {

/// Couplings must sum to 1 within this tolerance to count as on-plane
/// (inputs typically come from text parsing).
inline constexpr double kPlaneTol = 1e-12;

/// Quasiparticle energies at or below kZeroModeTol * (jx+jy+jz) are treated
/// as exact zero modes.  Physical near-gapless scales on odd grids are
/// O(1/L), many orders of magnitude above this.
inline constexpr double kZeroModeTol = 1e-12;

/// Dimensionless bond couplings (J_x, J_y, J_z).  Nonnegative and finite;
/// most of the library works on the plane jx + jy + jz = 1.
struct Couplings {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;

  Couplings() = default;
  Couplings(double x, double y, double z);

  /// Validating constructor for plane-constrained couplings.
  static Couplings on_plane(double x, double y, double z);

  double sum() const { return jx + jy + jz; }
  bool on_simplex(double tol = kPlaneTol) const;
};

enum class Phase { A, B, Boundary };

/// Phase of an on-plane coupling point: gapped A when some coupling exceeds
/// 1/2, gapless B when all are below, Boundary within kPlaneTol of a
/// transition line.  Off-plane input is rejected.
Phase phase_of(const Couplings& c);

const char* to_string(Phase p);

/// Allowed momenta q_{x,y} = 2 pi n / L, n = -(L-1)/2 .. (L-1)/2, for odd L.
/// Iteration order is row-major over (n_x, n_y).  N = 2 L^2 sites.
class MomentumGrid {
 public:
  explicit MomentumGrid(int L);

  int linear_size() const { return L_; }
  int size() const { return L_ * L_; }
  int sites() const { return 2 * L_ * L_; }

  std::pair<int, int> index(int i) const {
    const int m = (L_ - 1) / 2;
    return {i / L_ - m, i % L_ - m};
  }
  std::pair<double, double> momentum(int i) const;
  std::vector<std::pair<double, double>> momenta() const;

 private:
  int L_;
};

/// Per-momentum spectral data.  theta is the half-angle of atan2(delta, eps),
/// set to 0 with the degenerate flag when the energy vanishes.
struct SpectralPoint {
  double eps = 0.0;     // J_x cos qx + J_y cos qy + J_z
  double delta = 0.0;   // J_x sin qx + J_y sin qy
  double energy = 0.0;  // sqrt(eps^2 + delta^2)
  double theta = 0.0;   // in (-pi/2, pi/2]
  bool degenerate = false;
};

SpectralPoint spectral(const Couplings& c, double qx, double qy);

/// Ground state energy -sum_q E_q over the momentum grid.
double ground_energy(const Couplings& c, int L);

/// Smallest excitation energy 2 min_q E_q.
double gap(const Couplings& c, int L);

/// The k smallest single-mode excitation energies 2 E_q, nondecreasing.
std::vector<double> lowest_excitations(const Couplings& c, int L, int k);

/// One-parameter families of on-plane couplings used as evolution lines:
///   jx_eq_jy : lambda = J_z in (0, 1), J_x = J_y = (1 - lambda)/2
///   jz_third : lambda = J_x in (0, 2/3), J_y = 2/3 - lambda, J_z = 1/3
///   segment  : affine between two on-plane points, lambda in [0, 1]
class EvolutionLine {
 public:
  enum class Kind { jx_eq_jy, jz_third, segment };

  static EvolutionLine jx_eq_jy();
  static EvolutionLine jz_third();
  static EvolutionLine segment(const Couplings& from, const Couplings& to);

  Kind kind() const { return kind_; }
  std::pair<double, double> domain() const;
  bool contains(double lambda) const;

  Couplings point(double lambda) const;
  std::array<double, 3> tangent() const;

 private:
  EvolutionLine(Kind k, const Couplings& from, const Couplings& to)
      : kind_(k), from_(from), to_(to) {}

  Kind kind_;
  Couplings from_;
  Couplings to_;
};

const char* to_string(EvolutionLine::Kind k);

}  // namespace khm
