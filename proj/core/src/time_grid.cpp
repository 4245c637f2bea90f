#include "bnslab/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bnslab/error.hpp"

namespace bnslab {

namespace {

constexpr int kGaussPoints = 96;
// Beyond this value of z*s the exponential weight is handled by Taylor moments.
constexpr double kGaussLimit = 90.0;

struct GaussLegendre {
  std::vector<double> x, w;  // on [0,1]
  GaussLegendre() {
    const int n = kGaussPoints;
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      x[i] = 0.5 * (1.0 - t);
      w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

const GaussLegendre& gauss() {
  static const GaussLegendre g;
  return g;
}

// int_0^1 exp(-Z y) y^k dy for k = 0..kmax, Z > kmax (forward recurrence is stable there).
std::vector<double> exp_moments(double Z, int kmax) {
  std::vector<double> J(kmax + 1);
  const double e = std::exp(-Z);
  J[0] = -std::expm1(-Z) / Z;
  for (int k = 1; k <= kmax; ++k) J[k] = (k * J[k - 1] - e) / Z;
  return J;
}

}  // namespace

TimeGrid::TimeGrid(double horizon, int octaves, int nodes_per_block)
    : horizon_(horizon), octaves_(octaves), m_(nodes_per_block) {
  if (!(horizon > 0) || !std::isfinite(horizon)) throw Error("time grid: horizon must be positive");
  if (octaves < 1 || octaves > 60) throw Error("time grid: octaves must be in [1, 60]");
  if (nodes_per_block < 2 || nodes_per_block > 24) throw Error("time grid: nodes_per_block must be in [2, 24]");
  sigma_.resize(m_);
  bary_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const double th = M_PI * (2.0 * (m_ - 1 - i) + 1.0) / (2.0 * m_);
    sigma_[i] = 0.5 * (1.0 + std::cos(th));
    bary_[i] = ((m_ - 1 - i) % 2 == 0 ? 1.0 : -1.0) * std::sin(th);
  }
  for (int b = 0; b < blocks(); ++b)
    for (int i = 0; i < m_; ++i) times_.push_back(block_start(b) + block_width(b) * sigma_[i]);
  full_weights_ = exp_weights(1.0, 0.0);
}

double TimeGrid::block_start(int b) const {
  return b == 0 ? 0.0 : std::ldexp(horizon_, b - 1 - octaves_);
}

double TimeGrid::block_width(int b) const {
  return b == 0 ? std::ldexp(horizon_, -octaves_) : std::ldexp(horizon_, b - 1 - octaves_);
}

int TimeGrid::block_containing(double t) const {
  if (!(t > 0.0) || t > horizon_ * (1 + 1e-14))
    throw Error("time " + std::to_string(t) + " outside ]0, " + std::to_string(horizon_) + "]");
  for (int b = 0; b < blocks(); ++b)
    if (t <= block_end(b)) return b;
  return blocks() - 1;
}

std::vector<double> TimeGrid::lagrange(double s) const {
  std::vector<double> l(m_, 0.0);
  for (int i = 0; i < m_; ++i)
    if (s == sigma_[i]) {
      l[i] = 1.0;
      return l;
    }
  double den = 0.0;
  for (int i = 0; i < m_; ++i) {
    l[i] = bary_[i] / (s - sigma_[i]);
    den += l[i];
  }
  for (auto& v : l) v /= den;
  return l;
}

std::vector<double> TimeGrid::taylor_coefficients(double s) const {
  // c[m*M + k] = l_m^{(k)}(s) / k!, by expanding prod_{n != m} ((r - s) + (s - sigma_n)).
  std::vector<double> c(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int m = 0; m < m_; ++m) {
    std::vector<double> poly{1.0};
    double denom = 1.0;
    for (int n = 0; n < m_; ++n) {
      if (n == m) continue;
      const double a = s - sigma_[n];
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t k = 0; k < poly.size(); ++k) {
        next[k] += a * poly[k];
        next[k + 1] += poly[k];
      }
      poly.swap(next);
      denom *= sigma_[m] - sigma_[n];
    }
    for (int k = 0; k < m_; ++k) c[m * m_ + k] = poly[k] / denom;
  }
  return c;
}

std::vector<double> TimeGrid::exp_weights(double s, double z) const {
  return exp_weights_batch(s, {z});
}

std::vector<double> TimeGrid::exp_weights_batch(double s, const std::vector<double>& zs) const {
  std::vector<double> W(zs.size() * m_, 0.0);
  if (s <= 0.0) return W;
  const auto& gl = gauss();
  std::vector<double> ltab;   // Lagrange values at the Gauss points, built on first use
  std::vector<double> taylor; // Taylor coefficients about s, built on first use
  for (std::size_t r = 0; r < zs.size(); ++r) {
    const double z = zs[r];
    double* out = W.data() + r * m_;
    if (z * s <= kGaussLimit) {
      if (ltab.empty()) {
        ltab.resize(static_cast<std::size_t>(kGaussPoints) * m_);
        for (int g = 0; g < kGaussPoints; ++g) {
          const auto l = lagrange(s - s * gl.x[g]);
          std::copy(l.begin(), l.end(), ltab.begin() + g * m_);
        }
      }
      for (int g = 0; g < kGaussPoints; ++g) {
        const double f = s * gl.w[g] * std::exp(-z * s * gl.x[g]);
        const double* l = ltab.data() + g * m_;
        for (int m = 0; m < m_; ++m) out[m] += f * l[m];
      }
      continue;
    }
    // int_0^s e^{-z x} l_m(s - x) dx = sum_k (-1)^k c_mk s^{k+1} J_k(z s).
    if (taylor.empty()) taylor = taylor_coefficients(s);
    const auto J = exp_moments(z * s, m_ - 1);
    for (int m = 0; m < m_; ++m) {
      double acc = 0.0, sp = s;
      for (int k = 0; k < m_; ++k) {
        acc += ((k % 2) ? -1.0 : 1.0) * taylor[m * m_ + k] * sp * J[k];
        sp *= s;
      }
      out[m] = acc;
    }
  }
  return W;
}

std::vector<double> TimeGrid::integration_weights(double upto) const {
  std::vector<double> w(size(), 0.0);
  if (upto <= 0.0) return w;
  const double end = std::min(upto, horizon_);
  const int last = block_containing(end);
  for (int b = 0; b < last; ++b)
    for (int m = 0; m < m_; ++m) w[b * m_ + m] = block_width(b) * full_weights_[m];
  const double s = (end - block_start(last)) / block_width(last);
  const auto part = s >= 1.0 ? full_weights_ : exp_weights(s, 0.0);
  for (int m = 0; m < m_; ++m) w[last * m_ + m] = block_width(last) * part[m];
  return w;
}

double TimeGrid::integrate(const std::vector<double>& values, double upto) const {
  if (values.size() != size()) throw Error("time grid: value count does not match node count");
  const auto w = integration_weights(upto);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] * values[i];
  return total;
}

std::vector<double> TimeGrid::cumulative(const std::vector<double>& values) const {
  if (values.size() != size()) throw Error("time grid: value count does not match node count");
  std::vector<std::vector<double>> node_w;
  for (int i = 0; i < m_; ++i) node_w.push_back(exp_weights(sigma_[i], 0.0));
  std::vector<double> out(size());
  double before = 0.0;
  for (int b = 0; b < blocks(); ++b) {
    const double h = block_width(b);
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (int m = 0; m < m_; ++m) acc += node_w[i][m] * values[b * m_ + m];
      out[b * m_ + i] = before + h * acc;
    }
    double acc = 0.0;
    for (int m = 0; m < m_; ++m) acc += full_weights_[m] * values[b * m_ + m];
    before += h * acc;
  }
  return out;
}

double TimeGrid::interpolate(const std::vector<double>& values, double t) const {
  if (values.size() != size()) throw Error("time grid: value count does not match node count");
  const int b = block_containing(t);
  const auto l = lagrange((t - block_start(b)) / block_width(b));
  double acc = 0.0;
  for (int m = 0; m < m_; ++m) acc += l[m] * values[b * m_ + m];
  return acc;
}

}  // namespace bnslab
