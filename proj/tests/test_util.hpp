#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>

#include "bnslab/field.hpp"
#include "bnslab/grid.hpp"

namespace bnslab::testing {

inline constexpr double kTwoPi = 6.283185307179586;

inline std::size_t mode(const GridSpec& g, int kx, int ky, int kz) {
  const int n = g.n();
  auto w = [n](int k) { return static_cast<std::size_t>(k < 0 ? k + n : k); };
  return (w(kz) * n + w(ky)) * n + w(kx);
}

/// Fills component c at grid point (i*h, j*h, k*h) with fn(x, y, z, c).
inline PhysicalField sample(const GridSpec& g, FieldKind kind,
                            const std::function<double(double, double, double, int)>& fn) {
  PhysicalField f(g, kind);
  const int n = g.n();
  const double h = g.box_len() / n;
  for (int c = 0; c < f.components(); ++c)
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          f.component(c)[(static_cast<std::size_t>(iz) * n + iy) * n + ix] = fn(ix * h, iy * h, iz * h, c);
  return f;
}

/// Physical-side L^p norm computed independently of the library.
inline double sampled_lp(const PhysicalField& f, double p) {
  const std::size_t pts = f.grid().points();
  const double cell = f.grid().volume() / static_cast<double>(pts);
  double acc = 0.0;
  for (std::size_t i = 0; i < pts; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < f.components(); ++c) m2 += f.component(c)[i] * f.component(c)[i];
    const double m = std::sqrt(m2);
    acc = std::isinf(p) ? std::max(acc, m) : acc + std::pow(m, p) * cell;
  }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

/// max_i |a_i - b_i| over all coefficients.
inline double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) d = std::max(d, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return d;
}

inline double max_coeff(const SpectralField& a) {
  double d = 0.0;
  for (const auto& c : a.coeffs()) d = std::max(d, std::abs(c));
  return d;
}

}  // namespace bnslab::testing
