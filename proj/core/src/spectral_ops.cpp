#include "bnslab/spectral_ops.hpp"

#include <algorithm>
#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/fft.hpp"

namespace bnslab {

namespace {

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* op) {
  if (a.grid() != b.grid()) throw Error(std::string(op) + ": grid mismatch");
  if (a.kind() != b.kind()) throw Error(std::string(op) + ": field kind mismatch");
}

const cplx I(0.0, 1.0);

}  // namespace

double lp_norm(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw Error("lp_norm: p must be >= 1");
  const std::vector<double> m = f.modulus();
  if (std::isinf(p)) return m.empty() ? 0.0 : *std::max_element(m.begin(), m.end());
  double s = 0.0;
  if (p == 2.0) {
    for (double v : m) s += v * v;
  } else {
    for (double v : m) s += std::pow(v, p);
  }
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double lp_norm(const SpectralField& f, double p) {
  if (!f.real_valued()) throw Error("lp_norm requires real-valued field");
  return lp_norm(f.to_physical(), p);
}

double inner_product(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "inner_product");
  double s = 0.0;
  const auto& x = a.coeffs();
  const auto& y = b.coeffs();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
  return s * a.grid().volume();
}

double plancherel_l2(const SpectralField& f) {
  double s = 0.0;
  for (const auto& c : f.coeffs()) s += std::norm(c);
  return std::sqrt(s * f.grid().volume());
}

double relative_l2_error(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "relative_l2_error");
  double d = 0.0, r = 0.0;
  const auto& x = a.coeffs();
  const auto& y = b.coeffs();
  for (std::size_t i = 0; i < x.size(); ++i) {
    d += std::norm(x[i] - y[i]);
    r += std::norm(y[i]);
  }
  return r == 0.0 ? std::sqrt(d) : std::sqrt(d / r);
}

SpectralField leray_project(const SpectralField& f) {
  if (f.kind() != FieldKind::vector) throw Error("leray_project requires a vector (rank 1) field");
  SpectralField out(f);
  const GridSpec& g = f.grid();
  cplx* u0 = out.component(0);
  cplx* u1 = out.component(1);
  cplx* u2 = out.component(2);
  for (std::size_t m = 0; m < g.points(); ++m) {
    const auto k = g.deriv_index(m);
    const double kk = double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (kk == 0.0) continue;
    const cplx dot = (double(k[0]) * u0[m] + double(k[1]) * u1[m] + double(k[2]) * u2[m]) / kk;
    u0[m] -= double(k[0]) * dot;
    u1[m] -= double(k[1]) * dot;
    u2[m] -= double(k[2]) * dot;
  }
  out.set_divergence_free(true);
  return out;
}

SpectralField heat_apply(const SpectralField& f, double t) {
  if (!(t >= 0.0)) throw Error("heat_apply: t must be nonnegative");
  SpectralField out(f);
  if (t == 0.0) return out;
  const GridSpec& g = f.grid();
  const std::size_t np = g.points();
  std::vector<double> decay(np);
  for (std::size_t m = 0; m < np; ++m) decay[m] = std::exp(-t * g.xi2(m));
  for (int c = 0; c < f.components(); ++c) {
    cplx* u = out.component(c);
    for (std::size_t m = 0; m < np; ++m) u[m] *= decay[m];
  }
  return out;
}

SpectralField gradient(const SpectralField& f) {
  const GridSpec& g = f.grid();
  const double kap = g.freq_spacing();
  FieldKind ok;
  if (f.kind() == FieldKind::scalar)
    ok = FieldKind::vector;
  else if (f.kind() == FieldKind::vector)
    ok = FieldKind::tensor;
  else
    throw Error("gradient: tensor input not supported");
  SpectralField out(g, ok);
  const int nc = f.components();
  for (std::size_t m = 0; m < g.points(); ++m) {
    const auto k = g.deriv_index(m);
    for (int i = 0; i < nc; ++i) {
      const cplx v = f.component(i)[m];
      for (int j = 0; j < 3; ++j) out.component(3 * i + j)[m] = I * (kap * k[j]) * v;
    }
  }
  out.set_real_valued(f.real_valued());
  return out;
}

SpectralField divergence(const SpectralField& f) {
  const GridSpec& g = f.grid();
  const double kap = g.freq_spacing();
  FieldKind ok;
  if (f.kind() == FieldKind::vector)
    ok = FieldKind::scalar;
  else if (f.kind() == FieldKind::tensor)
    ok = FieldKind::vector;
  else
    throw Error("divergence: scalar input not supported");
  SpectralField out(g, ok);
  const int rows = components(ok);
  for (std::size_t m = 0; m < g.points(); ++m) {
    const auto k = g.deriv_index(m);
    for (int i = 0; i < rows; ++i) {
      cplx s = 0.0;
      for (int j = 0; j < 3; ++j) s += (kap * k[j]) * f.component(3 * i + j)[m];
      out.component(i)[m] = I * s;
    }
  }
  out.set_real_valued(f.real_valued());
  return out;
}

SpectralField leray_divergence(const SpectralField& F) {
  if (F.kind() != FieldKind::tensor) throw Error("leray_divergence requires a tensor field");
  return leray_project(divergence(F));
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out(f);
  const GridSpec& g = f.grid();
  for (std::size_t m = 0; m < g.points(); ++m) {
    if (g.dealias_keep(m)) continue;
    for (int c = 0; c < f.components(); ++c) out.component(c)[m] = 0.0;
  }
  return out;
}

SpectralField tensor_product(const PhysicalField& u, const PhysicalField& v) {
  if (u.grid() != v.grid()) throw Error("tensor_product: grid mismatch");
  if (u.kind() != FieldKind::vector || v.kind() != FieldKind::vector)
    throw Error("tensor_product requires vector fields");
  const GridSpec& g = u.grid();
  const std::size_t np = g.points();
  SpectralField out(g, FieldKind::tensor);
  const bool symmetric = (&u == &v) || (u.data() == v.data());
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (symmetric && j < i) continue;
      const double* a = u.component(i);
      const double* b = v.component(j);
      cplx* dst = out.component(3 * i + j);
      for (std::size_t x = 0; x < np; ++x) dst[x] = cplx(a[x] * b[x], 0.0);
    }
  }
  if (symmetric) {
    const int upper[6] = {0, 1, 2, 4, 5, 8};
    for (int c : upper) fft_forward(g, 1, out.component(c));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < i; ++j) std::copy(out.component(3 * j + i), out.component(3 * j + i) + np, out.component(3 * i + j));
  } else {
    fft_forward(g, 9, out.component(0));
  }
  for (std::size_t m = 0; m < np; ++m) {
    if (g.dealias_keep(m)) continue;
    for (int c = 0; c < 9; ++c) out.component(c)[m] = 0.0;
  }
  out.set_real_valued(true);
  return out;
}

SpectralField tensor_product(const SpectralField& u, const SpectralField& v) {
  if (&u == &v) {
    const PhysicalField pu = u.to_physical();
    return tensor_product(pu, pu);
  }
  return tensor_product(u.to_physical(), v.to_physical());
}

SpectralField axpy(double a, const SpectralField& x, const SpectralField& y) {
  require_same_grid(x, y, "axpy");
  SpectralField out(y);
  auto& o = out.coeffs();
  const auto& xs = x.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * xs[i];
  out.set_real_valued(x.real_valued() && y.real_valued());
  out.set_divergence_free(x.divergence_free() && y.divergence_free());
  return out;
}

SpectralField scaled(const SpectralField& f, double a) {
  SpectralField out(f);
  for (auto& c : out.coeffs()) c *= a;
  return out;
}

SpectralField pressure_from(const SpectralField& v, const SpectralField* F) {
  if (v.kind() != FieldKind::vector) throw Error("pressure_from: v must be a vector field");
  if (!v.divergence_free()) throw Error("pressure_from: v must be flagged divergence-free");
  SpectralField A = tensor_product(v, v);
  if (F) {
    if (F->kind() != FieldKind::tensor || F->grid() != v.grid()) throw Error("pressure_from: F shape mismatch");
    A = axpy(-1.0, *F, A);
  }
  const GridSpec& g = v.grid();
  SpectralField q(g, FieldKind::scalar);
  cplx* out = q.component(0);
  for (std::size_t m = 0; m < g.points(); ++m) {
    const auto k = g.deriv_index(m);
    const double kk = double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (kk == 0.0) continue;
    cplx s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += double(k[i] * k[j]) * A.component(3 * i + j)[m];
    out[m] = -s / kk;
  }
  q.set_real_valued(v.real_valued() && (!F || F->real_valued()));
  return q;
}

SpectralField rescale_dyadic(const SpectralField& f, double amplitude) {
  SpectralField out(f.grid().halved(), f.kind());
  const auto& src = f.coeffs();
  auto& dst = out.coeffs();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = amplitude * src[i];
  out.set_real_valued(f.real_valued());
  out.set_divergence_free(f.divergence_free());
  return out;
}

}  // namespace bnslab
