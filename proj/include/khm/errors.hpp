#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace khm {

/// A grid momentum carries a zero quasiparticle energy.  The ground state is
/// degenerate there and every theta-based quantity is singular, so callers get
/// a hard error instead of a silently regularized number.
class degeneracy_error : public std::runtime_error {
 public:
  degeneracy_error(const std::string& what, double qx, double qy)
      : std::runtime_error(what), qx_(qx), qy_(qy) {}

  double qx() const noexcept { return qx_; }
  double qy() const noexcept { return qy_; }

 private:
  double qx_;
  double qy_;
};

class fit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The finite-difference susceptibility oracle could not produce a usable
/// value (e.g. the fidelity underflowed to zero).
class oracle_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scaling-collapse search failed; carries the sampled (nu, residual) curve
/// so the caller can inspect the landscape.
class collapse_error : public fit_error {
 public:
  collapse_error(const std::string& what,
                 std::vector<std::pair<double, double>> residual_curve)
      : fit_error(what), residual_curve_(std::move(residual_curve)) {}

  const std::vector<std::pair<double, double>>& residual_curve() const noexcept {
    return residual_curve_;
  }

 private:
  std::vector<std::pair<double, double>> residual_curve_;
};

}  // namespace khm
