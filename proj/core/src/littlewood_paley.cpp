#include "bnslab/littlewood_paley.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "bnslab/error.hpp"
#include "bnslab/fft.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

namespace {

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

std::string range_text(const GridSpec& g) {
  return "[" + std::to_string(g.j_min()) + ", " + std::to_string(g.j_max()) + "]";
}

}  // namespace

double DyadicPartition::cutoff(double r) {
  constexpr double lo = 0.75, hi = 4.0 / 3.0;
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  return smooth_step((hi - r) / (hi - lo));
}

double DyadicPartition::profile(double r) {
  if (r <= 0.75 || r >= 8.0 / 3.0) return 0.0;
  return cutoff(r / 2.0) - cutoff(r);
}

DyadicPartition::DyadicPartition(const GridSpec& grid, double profile_defect)
    : grid_(grid), j_min_(grid.j_min()), j_max_(grid.j_max()) {
  const std::size_t np = grid.points();
  std::vector<double> radius(np);
  for (std::size_t m = 0; m < np; ++m) radius[m] = std::sqrt(grid.xi2(m));
  for (int j = j_min_ - 1; j <= j_max_ + 1; ++j) {
    std::vector<double> t(np, 0.0);
    const double scale = std::ldexp(1.0, -j);
    for (std::size_t m = 0; m < np; ++m) t[m] = profile(radius[m] * scale) * (1.0 + profile_defect);
    tables_.push_back(std::move(t));
  }
}

const std::vector<double>& DyadicPartition::table(int j) const {
  if (j < j_min_ - 1 || j > j_max_ + 1)
    throw Error("dyadic shell " + std::to_string(j) + " outside resolvable range " + range_text(grid_));
  return tables_[j - (j_min_ - 1)];
}

double DyadicPartition::partition_residual() const {
  const double lo = (4.0 / 3.0) * std::ldexp(1.0, j_min_);
  const double hi = 0.75 * std::ldexp(1.0, j_max_ + 1);
  double worst = 0.0;
  for (std::size_t m = 0; m < grid_.points(); ++m) {
    if (grid_.k2(m) == 0) continue;
    const double r = std::sqrt(grid_.xi2(m));
    if (r < lo || r > hi) continue;
    double s = 0.0;
    for (int j = j_min_; j <= j_max_; ++j) s += table(j)[m];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

const DyadicPartition& dyadic_partition(const GridSpec& grid) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<DyadicPartition>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{grid.n(), grid.box_len()}];
  if (!slot) slot = std::make_unique<DyadicPartition>(grid);
  return *slot;
}

SpectralField lp_project(const SpectralField& f, int j) {
  const GridSpec& g = f.grid();
  if (j < g.j_min() || j > g.j_max())
    throw Error("lp_project: shell " + std::to_string(j) + " outside resolvable range " + range_text(g));
  const auto& w = dyadic_partition(g).table(j);
  SpectralField out(f);
  for (int c = 0; c < f.components(); ++c) {
    cplx* u = out.component(c);
    for (std::size_t m = 0; m < g.points(); ++m) u[m] *= w[m];
  }
  out.set_divergence_free(f.divergence_free());
  return out;
}

std::vector<ShellNorm> shell_norms(const SpectralField& f, double p) {
  const GridSpec& g = f.grid();
  std::vector<ShellNorm> out;
  for (int j = g.j_min(); j <= g.j_max(); ++j) out.push_back({j, lp_norm(lp_project(f, j), p)});
  return out;
}

double aggregate(const std::vector<ShellNorm>& shells, double s, double q) {
  if (!(q >= 1.0)) throw Error("besov: q must be >= 1");
  double acc = 0.0;
  for (const auto& sh : shells) {
    const double v = std::pow(2.0, sh.j * s) * sh.norm;
    if (std::isinf(q))
      acc = std::max(acc, v);
    else
      acc += std::pow(v, q);
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

BesovResult besov_norm(const SpectralField& f, const BesovIndex& idx) {
  BesovResult r;
  r.j_min = f.grid().j_min();
  r.j_max = f.grid().j_max();
  r.shells = shell_norms(f, idx.p);
  r.value = aggregate(r.shells, idx.s, idx.q);
  return r;
}

DyadicSequence DyadicSequence::zeros(const GridSpec& grid, FieldKind kind, int j_min, int j_max) {
  DyadicSequence seq{grid, kind, j_min, {}};
  for (int j = j_min; j <= j_max; ++j) seq.pieces.emplace_back(grid, kind);
  return seq;
}

DyadicSequence retraction(const SpectralField& f) {
  const GridSpec& g = f.grid();
  DyadicSequence seq{g, f.kind(), g.j_min(), {}};
  for (int j = g.j_min(); j <= g.j_max(); ++j) {
    SpectralField piece = lp_project(f, j);
    piece.set_real_valued(f.real_valued());
    seq.pieces.push_back(piece.to_physical());
  }
  return seq;
}

SpectralField coretraction(const DyadicSequence& seq) {
  const GridSpec& g = seq.grid;
  const DyadicPartition& part = dyadic_partition(g);
  SpectralField out(g, seq.kind);
  for (int j = seq.j_min; j <= seq.j_max(); ++j) {
    const PhysicalField& piece = seq.at(j);
    if (piece.grid() != g || piece.kind() != seq.kind) throw Error("coretraction: mismatched grids in sequence");
    if (j < g.j_min() || j > g.j_max())
      throw Error("coretraction: shell " + std::to_string(j) + " outside resolvable range " + range_text(g));
    const SpectralField ph = SpectralField::from_physical(piece);
    const auto& a = part.table(j - 1);
    const auto& b = part.table(j);
    const auto& c = part.table(j + 1);
    for (int comp = 0; comp < ph.components(); ++comp) {
      const cplx* src = ph.component(comp);
      cplx* dst = out.component(comp);
      for (std::size_t m = 0; m < g.points(); ++m) dst[m] += (a[m] + b[m] + c[m]) * src[m];
    }
  }
  out.set_real_valued(true);
  return out;
}

std::vector<double> piece_norms(const DyadicSequence& seq, double p) {
  std::vector<double> out;
  for (const auto& piece : seq.pieces) out.push_back(lp_norm(piece, p));
  return out;
}

double sequence_norm(const DyadicSequence& seq, double s, double p, double q) {
  const auto norms = piece_norms(seq, p);
  std::vector<ShellNorm> shells;
  for (std::size_t i = 0; i < norms.size(); ++i) shells.push_back({seq.j_min + static_cast<int>(i), norms[i]});
  return aggregate(shells, s, q);
}

std::vector<double> heat_time_grid(const GridSpec& g, int samples) {
  const double t0 = std::pow(std::ldexp(1.0, -g.j_max()) / 4.0, 2);
  const double t1 = std::pow(std::ldexp(1.0, -g.j_min()) * 4.0, 2);
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) t[i] = t0 * std::pow(t1 / t0, double(i) / (samples - 1));
  return t;
}

double heat_besov_norm(const SpectralField& f, double s, double p, int samples) {
  if (!(s < 0.0)) throw Error("heat_besov_norm: heat characterization requires s < 0");
  double best = 0.0;
  for (double t : heat_time_grid(f.grid(), samples))
    best = std::max(best, std::pow(t, -s / 2.0) * lp_norm(heat_apply(f, t), p));
  return best;
}

}  // namespace bnslab
