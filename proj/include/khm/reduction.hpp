#pragma once

#include <cmath>
#include <cstdint>

namespace khm {

/// Neumaier compensated accumulator.  Sums of ~10^6 terms stay accurate to a
/// few ulp, and since accumulation order is fixed by the caller the result is
/// bitwise reproducible.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

/// Sums term(i) for i in [0, n) in index order with compensation.
///
/// All momentum reductions in this library go through fixed-order compensated
/// sums; parallel speedup is taken at the level of independent samples
/// (sweep points, lattice cells), never inside a reduction.  That makes every
/// result bit-identical for any thread count.
template <class Term>
double compensated_sum(std::int64_t n, Term&& term) {
  CompensatedSum acc;
  for (std::int64_t i = 0; i < n; ++i) acc.add(term(i));
  return acc.value();
}

}  // namespace khm
