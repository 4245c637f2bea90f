#include "bnslab/random_fields.hpp"

#include <cmath>
#include <random>

#include "bnslab/error.hpp"
#include "bnslab/fft.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

namespace {

// Box-Muller on top of mt19937_64 so the stream is the same on every standard library.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : eng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double band_weight(const GridSpec& g, std::size_t m, const RandomFieldSpec& spec) {
  const double kmax = spec.k_max > 0 ? spec.k_max : g.n() / 3.0;
  const int q = g.k2(m);
  if (q == 0 || !g.dealias_keep(m)) return 0.0;
  const double k = std::sqrt(static_cast<double>(q));
  if (k < spec.k_min || k > kmax) return 0.0;
  return std::pow(k, spec.slope);
}

void normalize(SpectralField& f, double target) {
  if (target <= 0) return;
  const double cur = plancherel_l2(f);
  if (cur > 0)
    for (auto& c : f.coeffs()) c *= target / cur;
}

}  // namespace

SpectralField random_field(const GridSpec& g, FieldKind kind, std::uint64_t seed, const RandomFieldSpec& spec) {
  Gaussian rng(seed);
  SpectralField f(g, kind);
  auto& data = f.coeffs();
  for (auto& c : data) c = cplx(rng(), 0.0);
  fft_forward(g, f.components(), data.data());
  const double unit = std::sqrt(static_cast<double>(g.points()));
  for (std::size_t m = 0; m < g.points(); ++m) {
    const double w = band_weight(g, m, spec) * unit;
    for (int c = 0; c < f.components(); ++c) f.component(c)[m] *= w;
  }
  f.set_real_valued(true);
  if (kind == FieldKind::vector && spec.leray) f = leray_project(f);
  normalize(f, spec.l2_norm);
  return f;
}

SpectralField concentrated_field(const GridSpec& g, std::uint64_t seed, const RandomFieldSpec& spec) {
  Gaussian rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double e[3];
  double en = 0.0;
  for (double& v : e) {
    v = rng();
    en += v * v;
  }
  en = std::sqrt(en);
  for (double& v : e) v /= en;
  double x0[3];
  for (double& v : x0) v = rng.uniform() * g.box_len();

  RandomFieldSpec raw = spec;
  raw.leray = false;
  raw.l2_norm = 0.0;
  raw.slope = 0.0;
  SpectralField w = random_field(g, FieldKind::vector, seed, raw);

  SpectralField f(g, FieldKind::vector);
  const double kap = g.freq_spacing();
  for (std::size_t m = 0; m < g.points(); ++m) {
    const double amp = band_weight(g, m, spec);
    if (amp == 0.0) continue;
    const auto k = g.mode_index(m);
    const double phase = -kap * (k[0] * x0[0] + k[1] * x0[1] + k[2] * x0[2]);
    const cplx shift(std::cos(phase), std::sin(phase));
    for (int c = 0; c < 3; ++c) f.component(c)[m] = amp * shift * (e[c] + 0.3 * w.component(c)[m]);
  }
  f.set_real_valued(true);
  f = leray_project(f);
  normalize(f, spec.l2_norm);
  return f;
}

}  // namespace bnslab
