#include "bnslab/grid.hpp"

#include <cmath>
#include <set>
#include <string>

#include "bnslab/error.hpp"

namespace bnslab {

GridSpec::GridSpec(int n_per_dim, double box_len) : n_(n_per_dim), box_len_(box_len) {
  if (n_per_dim < 8 || (n_per_dim & (n_per_dim - 1)) != 0)
    throw Error("grid: n_per_dim must be a power of two >= 8, got " + std::to_string(n_per_dim));
  if (!(box_len > 0) || !std::isfinite(box_len))
    throw Error("grid: box_len must be positive and finite");
  kappa_ = 2.0 * M_PI / box_len_;

  // Distinct nonzero |xi| on the lattice.
  std::set<int> k2s;
  const int h = n_ / 2;
  for (int a = 0; a <= h; ++a)
    for (int b = 0; b <= h; ++b)
      for (int c = 0; c <= h; ++c)
        if (a || b || c) k2s.insert(a * a + b * b + c * c);
  const double rmin = kappa_ * std::sqrt(static_cast<double>(*k2s.begin()));
  const double rmax = kappa_ * std::sqrt(static_cast<double>(*k2s.rbegin()));

  auto hits = [&](int j) {
    const double lo = 0.75 * std::ldexp(1.0, j), hi = (8.0 / 3.0) * std::ldexp(1.0, j);
    for (int q : k2s) {
      const double r = kappa_ * std::sqrt(static_cast<double>(q));
      if (r > lo && r < hi) return true;
    }
    return false;
  };
  int lo = static_cast<int>(std::floor(std::log2(rmin / (8.0 / 3.0)))) - 1;
  while (!hits(lo)) ++lo;
  int hi = static_cast<int>(std::ceil(std::log2(rmax / 0.75))) + 1;
  while (!hits(hi)) --hi;
  j_min_ = lo;
  j_max_ = hi;
}

double GridSpec::cell_volume() const {
  const double dx = box_len_ / n_;
  return dx * dx * dx;
}

}  // namespace bnslab
