#include "bnslab/field.hpp"

#include <algorithm>
#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/fft.hpp"

namespace bnslab {

PhysicalField::PhysicalField(const GridSpec& grid, FieldKind kind)
    : grid_(grid), kind_(kind), data_(grid.points() * bnslab::components(kind), 0.0) {}

std::vector<double> PhysicalField::modulus() const {
  const std::size_t np = grid_.points();
  std::vector<double> m(np, 0.0);
  for (int c = 0; c < components(); ++c) {
    const double* a = component(c);
    for (std::size_t i = 0; i < np; ++i) m[i] += a[i] * a[i];
  }
  for (auto& v : m) v = std::sqrt(v);
  return m;
}

SpectralField::SpectralField(const GridSpec& grid, FieldKind kind)
    : grid_(grid), kind_(kind), coeffs_(grid.points() * bnslab::components(kind), cplx(0.0, 0.0)) {}

SpectralField SpectralField::from_physical(const PhysicalField& f) {
  SpectralField out(f.grid(), f.kind());
  const auto& src = f.data();
  for (std::size_t i = 0; i < src.size(); ++i) out.coeffs_[i] = cplx(src[i], 0.0);
  fft_forward(f.grid(), f.components(), out.coeffs_.data());
  out.real_valued_ = true;
  return out;
}

CoeffVector SpectralField::to_physical_complex() const {
  CoeffVector buf(coeffs_);
  fft_backward(grid_, components(), buf.data());
  return buf;
}

PhysicalField SpectralField::to_physical() const {
  if (!real_valued_) throw Error("to_physical requires a real-valued field");
  CoeffVector buf = to_physical_complex();
  PhysicalField out(grid_, kind_);
  auto& dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = buf[i].real();
  return out;
}

double SpectralField::coeff_norm() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

double SpectralField::max_divergence() const {
  if (kind_ != FieldKind::vector) throw Error("max_divergence requires a vector field");
  const double total = coeff_norm();
  if (total == 0.0) return 0.0;
  const std::size_t np = grid_.points();
  const cplx* u0 = component(0);
  const cplx* u1 = component(1);
  const cplx* u2 = component(2);
  double worst = 0.0;
  for (std::size_t m = 0; m < np; ++m) {
    const auto k = grid_.deriv_index(m);
    const double kk = std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
    if (kk == 0.0) continue;
    const cplx d = (double(k[0]) * u0[m] + double(k[1]) * u1[m] + double(k[2]) * u2[m]) / kk;
    worst = std::max(worst, std::abs(d));
  }
  return worst / total;
}

double SpectralField::imaginary_ratio() const {
  const CoeffVector buf = to_physical_complex();
  double im = 0.0, mag = 0.0;
  for (const auto& v : buf) {
    im = std::max(im, std::abs(v.imag()));
    mag = std::max(mag, std::abs(v));
  }
  return mag == 0.0 ? 0.0 : im / mag;
}

}  // namespace bnslab
