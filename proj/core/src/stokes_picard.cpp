#include "bnslab/stokes_picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

#include "bnslab/error.hpp"
#include "bnslab/parallel.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

namespace {

// Exponential-integrator weights for every lattice |k|^2 class and block.
// Row i < M is node sigma_i of the block, row M is the block end.
struct DuhamelPlan {
  int m = 0;
  int classes = 0;
  std::vector<int> cls;                      // per mode
  std::vector<double> a;                     // |xi|^2 per class
  std::vector<std::vector<double>> decay;    // [block][c*(M+1) + i]
  std::vector<std::vector<double>> weights;  // [block][(c*(M+1) + i)*M + m]
};

using PlanKey = std::tuple<int, double, double, int, int>;

std::shared_ptr<const DuhamelPlan> build_plan(const GridSpec& grid, const TimeGrid& tg) {
  auto plan = std::make_shared<DuhamelPlan>();
  const int M = tg.nodes_per_block();
  plan->m = M;
  std::map<int, int> index;
  plan->cls.resize(grid.points());
  for (std::size_t q = 0; q < grid.points(); ++q) {
    const int k2 = grid.k2(q);
    auto it = index.find(k2);
    if (it == index.end()) it = index.emplace(k2, 0).first;
    plan->cls[q] = k2;
  }
  int c = 0;
  for (auto& kv : index) {
    kv.second = c++;
    plan->a.push_back(grid.freq_spacing() * grid.freq_spacing() * kv.first);
  }
  for (auto& v : plan->cls) v = index[v];
  plan->classes = c;

  std::vector<double> svals(tg.sigma());
  svals.push_back(1.0);
  for (int b = 0; b < tg.blocks(); ++b) {
    const double h = tg.block_width(b);
    std::vector<double> zs(plan->a.size());
    for (std::size_t r = 0; r < zs.size(); ++r) zs[r] = plan->a[r] * h;
    std::vector<double> dec(static_cast<std::size_t>(c) * (M + 1));
    std::vector<double> w(dec.size() * M);
    for (int i = 0; i <= M; ++i) {
      const auto rows = tg.exp_weights_batch(svals[i], zs);
      for (int cc = 0; cc < c; ++cc) {
        dec[cc * (M + 1) + i] = std::exp(-zs[cc] * svals[i]);
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(cc) * M, M, w.begin() + (cc * (M + 1) + i) * M);
      }
    }
    plan->decay.push_back(std::move(dec));
    plan->weights.push_back(std::move(w));
  }
  return plan;
}

std::shared_ptr<const DuhamelPlan> duhamel_plan(const GridSpec& grid, const TimeGrid& tg) {
  static std::mutex mu;
  static std::map<PlanKey, std::shared_ptr<const DuhamelPlan>> cache;
  const PlanKey key{grid.n(), grid.box_len(), tg.horizon(), tg.octaves(), tg.nodes_per_block()};
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto plan = build_plan(grid, tg);
  std::lock_guard<std::mutex> lock(mu);
  if (cache.size() >= 16) cache.clear();
  cache.emplace(key, plan);
  return plan;
}

std::vector<SpectralField> block_sources(const GridSpec& grid, const TimeGrid& tg, const SourceFn& source, int b) {
  std::vector<SpectralField> G;
  for (int m = 0; m < tg.nodes_per_block(); ++m) {
    G.push_back(source(static_cast<std::size_t>(b) * tg.nodes_per_block() + m));
    if (G.back().grid() != grid || G.back().kind() != FieldKind::vector)
      throw Error("duhamel: sources must be vector fields on the output grid");
  }
  return G;
}

std::vector<std::size_t> active_modes(const std::vector<SpectralField>& G, const SpectralField& z) {
  const std::size_t np = z.grid().points();
  std::vector<std::size_t> act;
  for (std::size_t q = 0; q < np; ++q) {
    bool on = false;
    for (int comp = 0; comp < 3 && !on; ++comp) {
      on = z.component(comp)[q] != cplx(0.0);
      for (const auto& g : G) on = on || g.component(comp)[q] != cplx(0.0);
    }
    if (on) act.push_back(q);
  }
  return act;
}

// Advances z across block b; writes node values into out (when given).
void step_block(const DuhamelPlan& plan, const std::vector<SpectralField>& G, double h, int b, SpectralField& z,
                Trajectory* out) {
  const int M = plan.m;
  const auto act = active_modes(G, z);
  const auto& dec = plan.decay[b];
  const auto& W = plan.weights[b];
  parallel_for(act.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<cplx> g(M);
    for (std::size_t t = lo; t < hi; ++t) {
      const std::size_t q = act[t];
      const int c = plan.cls[q];
      for (int comp = 0; comp < 3; ++comp) {
        for (int m = 0; m < M; ++m) g[m] = G[m].component(comp)[q];
        const cplx z0 = z.component(comp)[q];
        for (int i = 0; i <= M; ++i) {
          const double* w = &W[(c * (M + 1) + i) * M];
          cplx acc(0.0);
          for (int m = 0; m < M; ++m) acc += w[m] * g[m];
          const cplx val = dec[c * (M + 1) + i] * z0 + h * acc;
          if (i < M) {
            if (out) out->field(static_cast<std::size_t>(b) * M + i).component(comp)[q] = val;
          } else {
            z.component(comp)[q] = val;
          }
        }
      }
    }
  });
}

void require_vector_pair(const Trajectory& u, const Trajectory& v) {
  if (u.grid() != v.grid()) throw Error("bilinear_B: grid mismatch");
  if (u.kind() != FieldKind::vector || v.kind() != FieldKind::vector)
    throw Error("bilinear_B: vector trajectories required");
  if (!u.has_time_grid() || !v.has_time_grid() || !(u.time_grid() == v.time_grid()))
    throw Error("bilinear_B: trajectories must share one dyadic time grid");
}

}  // namespace

Trajectory duhamel_from_sources(const GridSpec& grid, const TimeGrid& tgrid, const SourceFn& source) {
  const auto plan = duhamel_plan(grid, tgrid);
  Trajectory out(grid, FieldKind::vector, tgrid);
  SpectralField z(grid, FieldKind::vector);
  bool real = true;
  for (int b = 0; b < tgrid.blocks(); ++b) {
    const auto G = block_sources(grid, tgrid, source, b);
    for (const auto& g : G) real = real && g.real_valued();
    step_block(*plan, G, tgrid.block_width(b), b, z, &out);
  }
  for (auto& f : out.fields()) {
    f.set_divergence_free(true);
    f.set_real_valued(real);
  }
  return out;
}

Trajectory duhamel_L(const Trajectory& F) {
  if (F.kind() != FieldKind::tensor) throw Error("duhamel_L: tensor forcing required");
  return duhamel_from_sources(F.grid(), F.time_grid(),
                              [&F](std::size_t i) { return leray_divergence(F.field(i)); });
}

SpectralField duhamel_at(const Trajectory& F, double t) {
  if (F.kind() != FieldKind::tensor) throw Error("duhamel_at: tensor forcing required");
  const TimeGrid& tg = F.time_grid();
  if (!(t > 0.0) || t > F.horizon()) throw Error("duhamel_at: time outside ]0, T] of the forcing");
  const GridSpec& grid = F.grid();
  const auto plan = duhamel_plan(grid, tg);
  const SourceFn source = [&F](std::size_t i) { return leray_divergence(F.field(i)); };
  SpectralField z(grid, FieldKind::vector);
  const int last = tg.block_containing(t);
  for (int b = 0; b < last; ++b) step_block(*plan, block_sources(grid, tg, source, b), tg.block_width(b), b, z, nullptr);

  const auto G = block_sources(grid, tg, source, last);
  const double h = tg.block_width(last);
  const double s = std::min(1.0, (t - tg.block_start(last)) / h);
  std::vector<double> zs(plan->a.size());
  for (std::size_t r = 0; r < zs.size(); ++r) zs[r] = plan->a[r] * h;
  const auto W = tg.exp_weights_batch(s, zs);
  const int M = plan->m;
  SpectralField out(grid, FieldKind::vector);
  for (std::size_t q = 0; q < grid.points(); ++q) {
    const int c = plan->cls[q];
    const double d = std::exp(-zs[c] * s);
    for (int comp = 0; comp < 3; ++comp) {
      cplx acc(0.0);
      for (int m = 0; m < M; ++m) acc += W[c * M + m] * G[m].component(comp)[q];
      out.component(comp)[q] = d * z.component(comp)[q] + h * acc;
    }
  }
  out.set_divergence_free(true);
  return out;
}

Trajectory bilinear_B(const Trajectory& u, const Trajectory& v) {
  require_vector_pair(u, v);
  const bool same = &u == &v;
  return duhamel_from_sources(u.grid(), u.time_grid(), [&](std::size_t i) {
    return leray_divergence(same ? tensor_product(u.field(i), u.field(i)) : tensor_product(u.field(i), v.field(i)));
  });
}

void PicardConfig::validate() const {
  if (k < 0) throw Error("picard config: k must be >= 0");
  if (!(T > 0.0)) throw Error("picard config: T must be positive");
  if (!(p >= 1.0)) throw Error("picard config: p must be >= 1");
  if (!(tol > 0.0)) throw Error("picard config: tol must be positive");
  if (max_iter < 1) throw Error("picard config: max_iter must be >= 1");
  (void)time_grid();
}

SpectralField PicardBundle::forcing_at(int l, std::size_t i) const {
  if (l < 0 || l > k()) throw Error("picard bundle: forcing level out of range");
  const SpectralField& P = iterate(l).field(i);
  SpectralField F = tensor_product(P, P);
  if (l > 0) {
    const SpectralField& Q = iterate(l - 1).field(i);
    F = axpy(-1.0, tensor_product(Q, Q), F);
  }
  return F;
}

Trajectory PicardBundle::forcing(int l) const {
  const Trajectory& P = iterate(0);
  Trajectory out(P.grid(), FieldKind::tensor, P.time_grid());
  for (std::size_t i = 0; i < P.size(); ++i) out.field(i) = forcing_at(l, i);
  return out;
}

Trajectory picard_zero(const SpectralField& u0, const Trajectory* F, const TimeGrid& tgrid) {
  if (u0.kind() != FieldKind::vector) throw Error("picard: initial data must be a vector field");
  if (!u0.divergence_free() || u0.max_divergence() > 1e-10)
    throw Error("picard: initial data must be divergence-free");
  Trajectory P0 = heat_trajectory(u0, tgrid);
  if (F) {
    if (F->grid() != u0.grid()) throw Error("picard: forcing grid differs from the data grid");
    if (!(F->time_grid() == tgrid)) throw Error("picard: forcing time grid differs from the configured grid");
    P0 = axpy(1.0, duhamel_L(*F), P0);
  }
  for (auto& f : P0.fields()) f.set_divergence_free(true);
  return P0;
}

namespace {

LevelNorms level_norms(const PicardBundle& bundle, int l, double p) {
  const Trajectory& P = bundle.iterate(l);
  LevelNorms ln;
  ln.level = l;
  ln.kato = kato_norm(P, KatoIndex::critical(p));
  ln.linf_l2 = linf_l2(P, P.horizon());
  std::vector<double> sq(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double f = plancherel_l2(bundle.forcing_at(l, i));
    sq[i] = f * f;
  }
  ln.forcing_l2 = std::sqrt(std::max(0.0, P.time_grid().integrate(sq)));
  return ln;
}

}  // namespace

PicardBundle picard_bundle(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg) {
  cfg.validate();
  std::vector<Trajectory> its;
  its.push_back(picard_zero(u0, F, cfg.time_grid()));
  for (int l = 0; l < cfg.k; ++l) its.push_back(axpy(-1.0, bilinear_B(its[l], its[l]), its[0]));
  PicardBundle bundle(std::move(its), {});
  std::vector<LevelNorms> norms;
  for (int l = 0; l <= cfg.k; ++l) norms.push_back(level_norms(bundle, l, cfg.p));
  bundle.set_norms(std::move(norms));
  return bundle;
}

int k_of_p(double p) {
  if (!(p > 3.0)) throw Error("k_of_p: p must exceed 3");
  return static_cast<int>(std::ceil(p / 2.0)) - 2;
}

SlopeReport fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) throw Error("fit_loglog: need matching, non-empty samples");
  SlopeReport rep;
  rep.horizons = xs;
  rep.norms = ys;
  for (std::size_t i = 0; i < xs.size(); ++i) rep.constants.push_back(ys[i] / std::pow(xs[i], 0.25));
  const bool positive = std::all_of(ys.begin(), ys.end(), [](double y) { return y > 0.0 && std::isfinite(y); });
  if (xs.size() < 2 || !positive) return rep;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return rep;
  rep.slope = sxy / sxx;
  rep.defined = true;
  return rep;
}

SlopeReport fk_l2_scaling(const SpectralField& u0, const Trajectory* F, int k, const std::vector<double>& horizons,
                          const PicardConfig& cfg) {
  if (horizons.empty()) throw Error("fk_l2_scaling: empty horizon list");
  PicardConfig c = cfg;
  c.k = k;
  c.T = *std::max_element(horizons.begin(), horizons.end());
  for (double T : horizons)
    if (!(T > 0.0)) throw Error("fk_l2_scaling: horizons must be positive");
  c.validate();
  std::vector<Trajectory> its;
  its.push_back(picard_zero(u0, F, c.time_grid()));
  for (int l = 0; l < k; ++l) its.push_back(axpy(-1.0, bilinear_B(its[l], its[l]), its[0]));
  const PicardBundle bundle(std::move(its), {});
  const TimeGrid& tg = bundle.iterate(0).time_grid();
  std::vector<double> sq(tg.size());
  for (std::size_t i = 0; i < tg.size(); ++i) {
    const double f = plancherel_l2(bundle.forcing_at(k, i));
    sq[i] = f * f;
  }
  std::vector<double> norms;
  for (double T : horizons) norms.push_back(std::sqrt(std::max(0.0, tg.integrate(sq, T))));
  return fit_loglog(horizons, norms);
}

MildSolution mild_solve(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg) {
  cfg.validate();
  const KatoIndex idx = KatoIndex::critical(cfg.p);
  Trajectory P0 = picard_zero(u0, F, cfg.time_grid());
  const double scale = kato_norm(P0, idx);
  Trajectory v = P0;
  std::vector<double> incs;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Trajectory next = axpy(-1.0, bilinear_B(v, v), P0);
    const double inc = kato_norm(axpy(-1.0, v, next), idx);
    incs.push_back(inc);
    v = std::move(next);
    if (inc < cfg.tol) {
      const Trajectory r = axpy(1.0, bilinear_B(v, v), axpy(-1.0, P0, v));
      MildSolution sol{std::move(v), std::move(P0), std::move(incs), kato_norm(r, idx), it};
      for (auto& f : sol.v.fields()) f.set_divergence_free(true);
      return sol;
    }
    if (!std::isfinite(inc) || inc > 1e8 * std::max(scale, 1e-300))
      throw ConvergenceError("mild_solve: increments diverged after " + std::to_string(it) + " iterations", incs);
  }
  throw ConvergenceError("mild_solve: no convergence within " + std::to_string(cfg.max_iter) + " iterations", incs);
}

SmallnessBracket smallness_bracket(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg, double a0,
                                   int max_doublings) {
  if (!(a0 > 0.0)) throw Error("smallness_bracket: a0 must be positive");
  if (max_doublings < 0) throw Error("smallness_bracket: max_doublings must be >= 0");
  SmallnessBracket out;
  double a = a0;
  for (int d = 0; d <= max_doublings; ++d, a *= 2.0) {
    SpectralField scaled_u0 = scaled(u0, a);
    scaled_u0.set_divergence_free(u0.divergence_free());
    out.amplitudes.push_back(a);
    try {
      out.iterations.push_back(mild_solve(scaled_u0, F, cfg).iterations);
      out.last_converged = a;
    } catch (const ConvergenceError&) {
      out.iterations.push_back(0);
      out.first_failed = a;
      break;
    }
  }
  return out;
}

double EnergyReport::max_relative() const {
  if (scale == 0.0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double r : residual) best = std::max(best, r / scale);
  return best;
}

EnergyReport energy_residual(const Trajectory& v, const PicardBundle& bundle) {
  const int k = bundle.k();
  const Trajectory& Pk = bundle.iterate(k);
  if (v.grid() != Pk.grid() || v.kind() != FieldKind::vector || v.times() != Pk.times())
    throw Error("energy_residual: solution and bundle must share grid and time nodes");
  const TimeGrid& tg = Pk.time_grid();
  const std::size_t nt = tg.size();
  const std::size_t np = v.grid().points();
  const double dv = v.grid().cell_volume();
  std::vector<double> kin(nt), dis(nt), cross(nt), cross_abs(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const SpectralField u = axpy(-1.0, Pk.field(i), v.field(i));
    const double un = plancherel_l2(u);
    kin[i] = un * un;
    const SpectralField gu = gradient(u);
    const double gn = plancherel_l2(gu);
    dis[i] = gn * gn;
    const PhysicalField P = Pk.field(i).to_physical();
    const PhysicalField U = u.to_physical();
    const PhysicalField Gp = gu.to_physical();
    std::optional<PhysicalField> Q;
    if (k > 0) Q = bundle.iterate(k - 1).field(i).to_physical();
    double acc = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double* pa = P.component(a);
        const double* pb = P.component(b);
        const double* ub = U.component(b);
        const double* g = Gp.component(3 * a + b);
        const double* qa = Q ? Q->component(a) : nullptr;
        const double* qb = Q ? Q->component(b) : nullptr;
        for (std::size_t x = 0; x < np; ++x) {
          double m = pa[x] * ub[x] + pa[x] * pb[x];
          if (qa) m -= qa[x] * qb[x];
          acc += m * g[x];
        }
      }
    cross[i] = acc * dv;
    cross_abs[i] = std::abs(cross[i]);
  }
  const auto D = tg.cumulative(dis);
  const auto C = tg.cumulative(cross);
  const auto A = tg.cumulative(cross_abs);
  EnergyReport rep;
  rep.times = tg.times();
  rep.kinetic = kin;
  for (std::size_t i = 0; i < nt; ++i) {
    rep.residual.push_back(kin[i] + 2.0 * D[i] - 2.0 * C[i]);
    rep.scale = std::max(rep.scale, kin[i] + 2.0 * std::abs(D[i]) + 2.0 * A[i]);
  }
  return rep;
}

}  // namespace bnslab
