#include "bnslab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>

#include "bnslab/kato.hpp"
#include "bnslab/littlewood_paley.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "bnslab/split_picard.hpp"
#include "bnslab/splitting.hpp"
#include "bnslab/stokes_picard.hpp"
#include "json.hpp"

namespace bnslab {

using json = nlohmann::json;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void say(const VerifyContext& ctx, const std::string& line) {
  if (ctx.log) *ctx.log << "  " << line << std::endl;
}

GridSpec grid_of(const RunConfig& c) { return GridSpec(c.n, c.box_len); }

// Distinct deterministic seed streams per criterion.
std::uint64_t stream(const RunConfig& c, std::uint64_t salt, std::uint64_t i = 0) {
  return c.seed * 1000003ull + salt * 10007ull + i;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

PicardConfig picard_config(const RunConfig& c, double p, double T) {
  PicardConfig pc;
  pc.p = p;
  pc.k = c.k >= 0 ? c.k : k_of_p(p);
  pc.T = T;
  pc.octaves = c.octaves;
  pc.nodes_per_block = c.nodes_per_block;
  pc.tol = c.tol;
  pc.max_iter = c.max_iter;
  pc.validate();
  return pc;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double coeff_of_variation(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= (v.size() - 1);
  return mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0;
}

std::string join_slopes(const std::vector<double>& xs) {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : ", ") + fmt("%.3g", x);
  return s;
}

DyadicSequence random_sequence(const GridSpec& g, std::mt19937_64& rng, int j_min, int count, double s) {
  DyadicSequence seq = DyadicSequence::zeros(g, FieldKind::scalar, j_min, j_min + count - 1);
  std::normal_distribution<double> gauss;
  for (int j = j_min; j < j_min + count; ++j) {
    const double amp = std::pow(2.0, -j * s) * std::exp(0.5 * gauss(rng));
    for (double& x : seq.at(j).data()) x = amp * gauss(rng);
  }
  return seq;
}

// Small-data mild solution shared by criteria 6, 8 and 9.
struct SmallData {
  double kappa_hat = 0.0;
  double kappa_median = 0.0;
  double kappa_x_max = 0.0;
  double kappa_x_median = 0.0;
  double kappa_refinement_delta = 0.0;  // first pair, relative change on a finer time grid
  std::optional<SpectralField> u0;
  std::optional<MildSolution> sol;
  std::string failure;
};

std::shared_ptr<SmallData> small_data(VerifyContext& ctx);

}  // namespace

// ---- audit / report ------------------------------------------------------------------------

void DivergenceAudit::record(const SpectralField& f, const std::string& label) {
  if (!f.divergence_free() || f.kind() != FieldKind::vector) return;
  const double d = f.max_divergence();
  ++count_;
  if (d > worst_ || !std::isfinite(d)) {
    worst_ = std::isfinite(d) ? d : inf;
    worst_label_ = label;
  }
}

void DivergenceAudit::record(const Trajectory& t, const std::string& label) {
  for (const auto& f : t.fields()) record(f, label);
}

bool ScenarioReport::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string ScenarioReport::to_json() const {
  json doc;
  doc["scenario"] = scenario;
  doc["seed"] = seed;
  doc["config_hash"] = config_hash;
  doc["seconds"] = seconds;
  doc["pass"] = pass();
  json arr = json::array();
  for (const auto& c : checks) {
    json m = json::object();
    for (const auto& [k, v] : c.measured) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
    arr.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds},
                   {"measured", m}});
  }
  doc["checks"] = arr;
  return doc.dump(2);
}

std::string format_check(const CheckResult& r) {
  return fmt("[%s] %2d %-26s %s (%.1f s)", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

SpectralField seeded_initial_data(const GridSpec& grid, std::uint64_t seed, double amplitude) {
  if (amplitude == 0.0) {
    SpectralField z(grid, FieldKind::vector);
    z.set_divergence_free(true);
    return z;
  }
  RandomFieldSpec spec;
  spec.l2_norm = amplitude;
  return random_field(grid, FieldKind::vector, seed, spec);
}

Trajectory seeded_forcing(const GridSpec& grid, const TimeGrid& tgrid, std::uint64_t seed, double amplitude) {
  Trajectory F(grid, FieldKind::tensor, tgrid);
  if (amplitude == 0.0) return F;
  RandomFieldSpec spec;
  spec.l2_norm = 1.0;
  const SpectralField W = random_field(grid, FieldKind::tensor, seed, spec);
  for (std::size_t i = 0; i < tgrid.size(); ++i)
    F.field(i) = scaled(W, amplitude * std::pow(tgrid.time(i) / tgrid.horizon(), -0.25));
  return F;
}

// ---- criteria ------------------------------------------------------------------------------

CheckResult check_partition(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{1, "partition_of_unity"};
  const DyadicPartition part(grid_of(ctx.cfg), ctx.cfg.fault.partition_defect);
  const double res = part.partition_residual();
  r.seconds = sw.seconds();
  r.add("residual", res);
  r.add("defect", ctx.cfg.fault.partition_defect);
  r.pass = res <= 1e-10 && r.seconds < 1.0;
  r.detail = fmt("max |sum phi_j - 1| = %.2e over shells %d..%d", res, part.j_min(), part.j_max());
  ctx.csv.add("verify", "partition_residual", "-", res);
  return r;
}

CheckResult check_retraction(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{2, "retraction_identity"};
  const GridSpec g = grid_of(ctx.cfg);
  double worst = 0.0;
  for (int i = 0; i < ctx.cfg.samples; ++i) {
    const SpectralField f = random_field(g, FieldKind::scalar, stream(ctx.cfg, 2, i));
    const double e = relative_l2_error(coretraction(retraction(f)), f);
    worst = std::max(worst, e);
    ctx.csv.add("verify", "sr_identity_error", fmt("sample=%d", i), e);
  }
  r.seconds = sw.seconds();
  r.add("worst_relative_error", worst);
  r.pass = worst <= 1e-8 && r.seconds < 10.0;
  r.detail = fmt("max ||S R f - f|| / ||f|| = %.2e over %d fields", worst, ctx.cfg.samples);
  return r;
}

CheckResult check_heat_besov(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{3, "heat_besov_equivalence"};
  const GridSpec g = grid_of(ctx.cfg);
  r.pass = true;
  for (double p : {4.0, 6.0}) {
    const double s = BesovIndex::critical_s(p);
    double lo = inf, hi = 0.0;
    for (int i = 0; i < ctx.cfg.samples; ++i) {
      const SpectralField f = random_field(g, FieldKind::vector, stream(ctx.cfg, 3, i));
      const double ratio = heat_besov_norm(f, s, p) / besov_norm(f, {s, p, inf}).value;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      ctx.csv.add("verify", "heat_lp_ratio", fmt("p=%g;sample=%d", p, i), ratio);
    }
    const double c = std::max(hi, 1.0 / lo), width = hi / lo;
    r.add(fmt("c_p%g", p), c);
    r.add(fmt("width_p%g", p), width);
    r.pass = r.pass && width <= 3.0;
    r.detail += fmt("%sp=%g: ratios in [%.3f, %.3f], c = %.3f, max/min = %.3f", r.detail.empty() ? "" : "; ", p, lo, hi,
                    c, width);
  }
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_interpolation(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{4, "kato_interpolation"};
  const GridSpec g = grid_of(ctx.cfg);
  std::mt19937_64 rng(stream(ctx.cfg, 4));
  const TimeGrid tg(1.0, 4, 3);
  const int count = 50;
  int held = 0;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    RandomFieldSpec spec;
    spec.slope = uniform(rng, -3.0, -1.0);
    spec.l2_norm = std::pow(10.0, uniform(rng, -2.0, 1.0));
    const Trajectory u = heat_trajectory(random_field(g, FieldKind::vector, stream(ctx.cfg, 4, i), spec), tg);
    const KatoIndex a{uniform(rng, -1.0, 0.0), uniform(rng, 2.0, 4.0)};
    const KatoIndex b{uniform(rng, -1.0, 0.0), uniform(rng, 6.0, 16.0)};
    const double theta = uniform(rng, 0.1, 0.9);
    const InterpolationReport rep = interp_check(u, a, b, theta);
    held += rep.holds ? 1 : 0;
    worst = std::max(worst, rep.lhs / rep.rhs);
    ctx.csv.add("verify", "interpolation_ratio", fmt("sample=%d", i), rep.lhs / rep.rhs);
  }
  r.seconds = sw.seconds();
  r.add("held", held);
  r.add("worst_lhs_over_rhs", worst);
  r.pass = held == count;
  r.detail = fmt("%d/%d trajectories satisfy the inequality, max lhs/rhs = %.4f", held, count, worst);
  return r;
}

CheckResult check_splitting(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{5, "splitting_certificates"};
  const RunConfig& cfg = ctx.cfg;
  const GridSpec g = grid_of(cfg);
  std::mt19937_64 rng(stream(cfg, 5));
  const int n = cfg.samples;
  std::vector<std::string> failures;
  int certified = 0;
  auto take = [&](const SplitCertificate& c, int i) {
    if (c.pass()) {
      ++certified;
      return;
    }
    for (const auto& ch : c.checks)
      if (!ch.pass) failures.push_back(fmt("%s[%d].%s", c.lemma_id.c_str(), i, ch.name.c_str()));
  };

  for (int i = 0; i < n; ++i) {
    const DyadicSequence seq = random_sequence(g, rng, -10, 20, 0.0);
    const double K = std::pow(2.0, uniform(rng, -3.0, 12.0));
    if (i % 2 == 0) take(horizontal_split(seq, 2.0, 0.0, -0.5, 0.5, K).certificate, i);
    else take(horizontal_split(seq, 2.0, 0.0, 0.5, -0.5, K).certificate, i);
  }
  for (int i = 0; i < n; ++i) {
    const DyadicSequence seq = random_sequence(g, rng, -6, 12, 0.0);
    const double q = i % 2 == 0 ? inf : 1.0;
    const DiagonalParams dp{0.0, 4.0, q, 0.3, 2.0, q, -0.15, 8.0, q};
    take(diagonal_split(seq, dp, std::pow(2.0, uniform(rng, -3.0, 3.0))).certificate, i);
  }
  const InitialDataParams idp = InitialDataParams::of(6.0);
  for (int i = 0; i < n; ++i) {
    const DyadicSequence seq = random_sequence(g, rng, -6, 12, idp.s_p);
    const NondiagonalParams np{idp.s_p, 6.0, 0.0, 2.0, idp.s_bar, idp.p2, idp.s0};
    take(nondiagonal_split(seq, np, std::pow(2.0, uniform(rng, -3.0, 8.0)), std::pow(2.0, uniform(rng, -2.0, 2.0)))
             .certificate,
         i);
  }
  std::vector<double> l2_constants;
  for (int i = 0; i < n; ++i) {
    const SpectralField u = i % 2 == 0 ? random_field(g, FieldKind::vector, stream(cfg, 51, i))
                                       : concentrated_field(g, stream(cfg, 51, i));
    take(besov_split(u, idp.besov(), std::pow(2.0, uniform(rng, -1.0, 1.0))).certificate, i);
  }
  for (int i = 0; i < n; ++i) {
    const SpectralField u = i % 2 == 0 ? random_field(g, FieldKind::vector, stream(cfg, 52, i))
                                       : concentrated_field(g, stream(cfg, 52, i));
    const InitialDataSplit s = split_initial_data(u, 6.0, std::pow(2.0, uniform(rng, -1.0, 1.0)));
    ctx.audit.record(s.u_tilde, "split_initial_data.u_tilde");
    ctx.audit.record(s.u_bar, "split_initial_data.u_bar");
    for (const auto& [k, v] : s.certificate.params)
      if (k == "measured_l2_constant" && v > 0.0) l2_constants.push_back(v);
    take(s.certificate, i);
  }
  const TimeGrid ftg(1.0, 4, 4);
  for (int i = 0; i < n; ++i) {
    const Trajectory F = seeded_forcing(g, ftg, stream(cfg, 53, i), std::pow(2.0, uniform(rng, -4.0, 2.0)));
    take(split_forcing(F, 6.0, std::pow(2.0, uniform(rng, -1.0, 2.0))).certificate, i);
  }
  const bool certs_ok = failures.empty();
  r.add("certified", certified);
  r.add("initial_l2_constant_cv", coeff_of_variation(l2_constants));

  // N-sweep exponent regressions.
  std::vector<double> Ns = cfg.N_sweep;
  std::vector<double> besov_tilde, init_tilde, force_tilde;
  const SpectralField u_crit = random_field(g, FieldKind::vector, stream(cfg, 54));
  const Trajectory F_crit = seeded_forcing(g, ftg, stream(cfg, 55), 1.0);
  const BesovSplitParams bp = idp.besov();
  const ForcingSplitParams fp = ForcingSplitParams::of(6.0);
  for (double N : Ns) {
    const BesovSplit b = besov_split(u_crit, bp, N);
    besov_tilde.push_back(besov_norm(b.u_tilde, {bp.s_tilde, bp.p_tilde, 1.0}).value);
    const InitialDataSplit s = split_initial_data(u_crit, 6.0, N);
    init_tilde.push_back(plancherel_l2(s.u_tilde));
    const ForcingSplit f = split_forcing(F_crit, 6.0, N);
    force_tilde.push_back(spacetime_norm(f.F_tilde, 3.0, fp.p_tilde, ftg.horizon()));
    ctx.csv.add("verify", "nsweep_besov_tilde", fmt("N=%g", N), besov_tilde.back());
    ctx.csv.add("verify", "nsweep_initial_l2_tilde", fmt("N=%g", N), init_tilde.back());
    ctx.csv.add("verify", "nsweep_forcing_l3l2_tilde", fmt("N=%g", N), force_tilde.back());
  }
  struct Regression {
    const char* name;
    const std::vector<double>* ys;
    double predicted;
  };
  const Regression regs[] = {{"besov_tilde", &besov_tilde, bp.tilde_exponent()},
                             {"initial_l2_tilde", &init_tilde, -idp.gamma2},
                             {"forcing_l3l2_tilde", &force_tilde, 1.0 - 6.0 / 2.0}};
  bool regs_ok = true;
  std::string reg_detail;
  for (const auto& rg : regs) {
    const SlopeReport sr = fit_loglog(Ns, *rg.ys);
    const bool ok = sr.defined && std::abs(sr.slope - rg.predicted) <= 0.1 * std::abs(rg.predicted);
    regs_ok = regs_ok && ok;
    r.add(fmt("slope_%s", rg.name), sr.defined ? sr.slope : std::nan(""));
    r.add(fmt("predicted_%s", rg.name), rg.predicted);
    if (sr.defined) {
      reg_detail += fmt("; %s slope %.3f vs %.3f", rg.name, sr.slope, rg.predicted);
    } else {
      std::size_t zeros = 0;
      for (double y : *rg.ys) zeros += y <= 0.0 ? 1 : 0;
      reg_detail += fmt("; %s slope undefined (%zu of %zu sweep values vanish)", rg.name, zeros, rg.ys->size());
    }
  }
  r.seconds = sw.seconds();
  r.pass = certs_ok && regs_ok && r.seconds < 120.0;
  r.detail = fmt("%d/%d certificates pass", certified, 6 * n) + reg_detail;
  if (!failures.empty()) r.detail += "; first failing check " + failures.front();
  return r;
}

namespace {

std::shared_ptr<SmallData> small_data(VerifyContext& ctx) {
  static std::shared_ptr<SmallData> cached;
  static std::string cached_key;
  const std::string key = run_config_json(ctx.cfg);
  if (cached && cached_key == key) return cached;

  auto sd = std::make_shared<SmallData>();
  const RunConfig& cfg = ctx.cfg;
  const GridSpec g = grid_of(cfg);
  const KatoIndex k6 = KatoIndex::critical(6.0);

  // Bilinear constant over seeded pairs on a coarser time grid.
  const TimeGrid kt(cfg.T, std::min(cfg.octaves, 8), std::min(cfg.nodes_per_block, 6));
  std::vector<double> ratios, ratios_x;
  for (int i = 0; i < cfg.samples; ++i) {
    const Trajectory u = heat_trajectory(random_field(g, FieldKind::vector, stream(cfg, 6, 2 * i)), kt);
    const Trajectory v = heat_trajectory(random_field(g, FieldKind::vector, stream(cfg, 6, 2 * i + 1)), kt);
    const Trajectory B = bilinear_B(u, v);
    ctx.audit.record(B, "bilinear_B");
    const double kb = kato_norm(B, k6), ku = kato_norm(u, k6), kv = kato_norm(v, k6);
    ratios.push_back(kb / (ku * kv));
    ratios_x.push_back(kb / (ku * carleson_norm(v, CarlesonScan::dyadic(cfg.T)).total));
    ctx.csv.add("verify", "bilinear_ratio_kato", fmt("pair=%d", i), ratios.back());
    ctx.csv.add("verify", "bilinear_ratio_carleson", fmt("pair=%d", i), ratios_x.back());
  }
  sd->kappa_hat = *std::max_element(ratios.begin(), ratios.end());
  sd->kappa_median = median(ratios);
  sd->kappa_x_max = *std::max_element(ratios_x.begin(), ratios_x.end());
  sd->kappa_x_median = median(ratios_x);
  if (!ratios.empty()) {
    const TimeGrid fine(cfg.T, kt.octaves() + 2, kt.nodes_per_block() + 2);
    const Trajectory u = heat_trajectory(random_field(g, FieldKind::vector, stream(cfg, 6, 0)), fine);
    const Trajectory v = heat_trajectory(random_field(g, FieldKind::vector, stream(cfg, 6, 1)), fine);
    const double r = kato_norm(bilinear_B(u, v), k6) / (kato_norm(u, k6) * kato_norm(v, k6));
    sd->kappa_refinement_delta = std::abs(r - ratios.front()) / ratios.front();
    ctx.csv.add("verify", "bilinear_ratio_refinement_delta", "pair=0", sd->kappa_refinement_delta);
  }

  const PicardConfig pc = picard_config(cfg, 6.0, cfg.T);
  SpectralField u0 = random_field(g, FieldKind::vector, stream(cfg, 60));
  const double p0 = kato_norm(heat_trajectory(u0, pc.time_grid()), k6);
  sd->u0 = scaled(u0, 0.1 / sd->kappa_hat / p0);
  SpectralField& data = *sd->u0;
  data.set_divergence_free(true);
  try {
    sd->sol = mild_solve(data, nullptr, pc);
    ctx.audit.record(sd->sol->v, "mild_solve.v");
    ctx.audit.record(sd->sol->p0, "mild_solve.p0");
  } catch (const ConvergenceError& e) {
    sd->failure = e.what();
  }
  cached = sd;
  cached_key = key;
  return sd;
}

}  // namespace

CheckResult check_contraction(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{6, "picard_contraction"};
  const auto sd = small_data(ctx);
  r.add("kappa_hat", sd->kappa_hat);
  r.add("kappa_median", sd->kappa_median);
  r.add("kappa_carleson_max", sd->kappa_x_max);
  r.add("kappa_carleson_median", sd->kappa_x_median);
  r.add("kappa_refinement_delta", sd->kappa_refinement_delta);
  if (!sd->sol) {
    r.pass = false;
    r.detail = "mild_solve failed: " + sd->failure;
    r.seconds = sw.seconds();
    return r;
  }
  const auto& inc = sd->sol->increments;
  double worst = 0.0;
  for (std::size_t i = 1; i < inc.size(); ++i)
    if (inc[i - 1] > 0.0) worst = std::max(worst, inc[i] / inc[i - 1]);
  for (std::size_t i = 0; i < inc.size(); ++i) ctx.csv.add("verify", "picard_increment", fmt("iter=%zu", i + 1), inc[i]);
  r.add("max_increment_ratio", worst);
  r.add("residual", sd->sol->residual);
  r.add("iterations", sd->sol->iterations);
  r.pass = inc.size() >= 2 && worst <= 0.5 && sd->sol->residual <= 1e-8;
  r.detail = fmt("kappa_hat = %.4f (refinement delta %.1e), %d iterations, increments {%s}, max ratio %.2e, residual %.2e",
                 sd->kappa_hat, sd->kappa_refinement_delta, sd->sol->iterations, join_slopes(inc).c_str(), worst,
                 sd->sol->residual);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_fk_scaling(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{7, "fk_scaling_law"};
  const RunConfig& cfg = ctx.cfg;
  const GridSpec g = grid_of(cfg);
  const SpectralField u0 = seeded_initial_data(g, stream(cfg, 7), cfg.amplitude);
  const double T_max = *std::max_element(cfg.T_sweep.begin(), cfg.T_sweep.end());
  r.pass = true;
  for (double p : {4.0, 6.0}) {
    const PicardConfig pc = picard_config(cfg, p, T_max);
    const SlopeReport sr = fk_l2_scaling(u0, nullptr, k_of_p(p), cfg.T_sweep, pc);
    for (std::size_t i = 0; i < sr.horizons.size(); ++i)
      ctx.csv.add("verify", "fk_l2", fmt("p=%g;T=%g", p, sr.horizons[i]), sr.norms[i]);
    const bool ok = sr.defined && sr.slope >= 0.2 && sr.slope <= 0.3;
    r.pass = r.pass && ok;
    r.add(fmt("slope_p%g", p), sr.defined ? sr.slope : std::nan(""));
    r.detail += fmt("%sp=%g (k=%d): slope %.3f", r.detail.empty() ? "" : "; ", p, k_of_p(p), sr.slope);
  }
  r.detail += " (window [0.2, 0.3])";
  r.seconds = sw.seconds();
  r.pass = r.pass && r.seconds < 120.0;
  return r;
}

CheckResult check_decay(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{8, "decay_property"};
  const auto sd = small_data(ctx);
  if (!sd->sol) {
    r.detail = "no small-data mild solution: " + sd->failure;
    r.seconds = sw.seconds();
    return r;
  }
  const RunConfig& cfg = ctx.cfg;
  PicardConfig pc = picard_config(cfg, 6.0, cfg.T);
  const PicardBundle bundle = picard_bundle(*sd->u0, nullptr, pc);
  const Trajectory diff = axpy(-1.0, bundle.iterate(pc.k), sd->sol->v);
  std::vector<double> Ts, ys;
  for (double T : cfg.T_sweep) {
    if (T > cfg.T) continue;
    Ts.push_back(T);
    ys.push_back(linf_l2(diff, T));
    ctx.csv.add("verify", "decay_sup_l2", fmt("T=%g", T), ys.back());
  }
  const SlopeReport sr = fit_loglog(Ts, ys);
  r.add("slope", sr.defined ? sr.slope : std::nan(""));
  r.add("k", pc.k);
  r.pass = sr.defined && sr.slope >= 0.2 && sr.slope <= 0.35;
  r.detail = fmt("slope of sup_{t<=T} ||v - P_%d||_2 = %.3f (window [0.2, 0.35])", pc.k, sr.slope);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_energy(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{9, "energy_inequality"};
  const auto sd = small_data(ctx);
  if (!sd->sol) {
    r.detail = "no small-data mild solution: " + sd->failure;
    r.seconds = sw.seconds();
    return r;
  }
  const RunConfig& cfg = ctx.cfg;
  const PicardConfig pc = picard_config(cfg, 6.0, cfg.T);
  const PicardBundle bundle = picard_bundle(*sd->u0, nullptr, pc);
  const EnergyReport er = energy_residual(sd->sol->v, bundle);
  const double rel = er.max_relative();

  // Adversarial: add a fixed high-frequency field at every node.
  RandomFieldSpec hs;
  hs.k_min = cfg.n / 4.0;
  hs.l2_norm = 0.1 * linf_l2(sd->sol->v, cfg.T);
  const SpectralField w = random_field(grid_of(cfg), FieldKind::vector, stream(cfg, 9), hs);
  Trajectory bad = sd->sol->v;
  for (auto& f : bad.fields()) f = axpy(1.0, w, f);
  const EnergyReport eb = energy_residual(bad, bundle);
  const double rel_bad = eb.max_relative();
  for (std::size_t i = 0; i < er.times.size(); ++i)
    ctx.csv.add("verify", "energy_residual", fmt("t=%.6g", er.times[i]), er.residual[i]);
  r.add("max_relative_residual", rel);
  r.add("scale", er.scale);
  r.add("perturbed_max_relative_residual", rel_bad);
  r.pass = rel <= 1e-6 && rel_bad > 1e-6;
  r.detail = fmt("max residual/scale = %.2e (scale %.2e); perturbed solution gives %.2e", rel, er.scale, rel_bad);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_scaling(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{10, "scaling_covariance"};
  const RunConfig& cfg = ctx.cfg;
  const GridSpec g = grid_of(cfg);
  const SpectralField u0 = random_field(g, FieldKind::vector, stream(cfg, 10, 0));
  const SpectralField u1 = random_field(g, FieldKind::vector, stream(cfg, 10, 1));
  const double t = 0.3;
  const double e_heat = relative_l2_error(heat_apply(rescale_dyadic(u0), t / 4.0), rescale_dyadic(heat_apply(u0, t)));

  const TimeGrid tg(1.0, 6, 6);
  const Trajectory F = seeded_forcing(g, tg, stream(cfg, 10, 2), 1.0);
  const Trajectory L = duhamel_L(F);
  const Trajectory Ls = duhamel_L(rescale_dyadic(F, 4.0));
  ctx.audit.record(L, "duhamel_L");
  ctx.audit.record(Ls, "duhamel_L.rescaled");
  const double e_duhamel = relative_error(Ls, rescale_dyadic(L, 2.0));

  const Trajectory u = heat_trajectory(u0, tg), v = heat_trajectory(u1, tg);
  const Trajectory B = bilinear_B(u, v);
  const Trajectory Bs = bilinear_B(rescale_dyadic(u, 2.0), rescale_dyadic(v, 2.0));
  ctx.audit.record(B, "bilinear_B");
  ctx.audit.record(Bs, "bilinear_B.rescaled");
  const double e_bilinear = relative_error(Bs, rescale_dyadic(B, 2.0));

  r.add("heat", e_heat);
  r.add("duhamel", e_duhamel);
  r.add("bilinear", e_bilinear);
  ctx.csv.add("verify", "scaling_error", "op=heat", e_heat);
  ctx.csv.add("verify", "scaling_error", "op=duhamel", e_duhamel);
  ctx.csv.add("verify", "scaling_error", "op=bilinear", e_bilinear);
  r.pass = e_heat <= 1e-6 && e_duhamel <= 1e-6 && e_bilinear <= 1e-6;
  r.detail = fmt("relative commutator: heat %.2e, duhamel %.2e, bilinear %.2e", e_heat, e_duhamel, e_bilinear);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_divergence(VerifyContext& ctx) {
  Stopwatch sw;
  CheckResult r{11, "divergence_preservation"};
  const GridSpec g = grid_of(ctx.cfg);
  for (int i = 0; i < 5; ++i) {
    RandomFieldSpec spec;
    spec.leray = false;
    const SpectralField f = random_field(g, FieldKind::vector, stream(ctx.cfg, 11, i), spec);
    ctx.audit.record(leray_project(f), "leray_project");
    ctx.audit.record(random_field(g, FieldKind::vector, stream(ctx.cfg, 11, 100 + i)), "random_field");
  }
  const TimeGrid tg(1.0, 4, 4);
  ctx.audit.record(duhamel_L(seeded_forcing(g, tg, stream(ctx.cfg, 11, 200), 1.0)), "duhamel_L");
  r.add("worst", ctx.audit.worst());
  r.add("fields_audited", static_cast<double>(ctx.audit.count()));
  r.pass = ctx.audit.count() > 0 && ctx.audit.worst() <= 1e-10;
  r.detail = fmt("%zu flagged fields, worst mode-wise divergence %.2e%s", ctx.audit.count(), ctx.audit.worst(),
                 ctx.audit.worst_label().empty() ? "" : (" (" + ctx.audit.worst_label() + ")").c_str());
  r.seconds = sw.seconds();
  return r;
}

ScenarioReport run_verify(const RunConfig& cfg, std::ostream* log, CsvTable* csv,
                          void (*on_check)(const CheckResult&)) {
  Stopwatch total;
  VerifyContext ctx{cfg, {}, {}, log};
  ScenarioReport rep;
  rep.scenario = "verify";
  rep.seed = cfg.seed;
  rep.config_hash = content_hash(run_config_json(cfg));
  using Fn = CheckResult (*)(VerifyContext&);
  const Fn fns[] = {check_partition,  check_retraction, check_heat_besov, check_interpolation,
                    check_splitting,  check_contraction, check_fk_scaling, check_decay,
                    check_energy,     check_scaling,    check_divergence};
  for (Fn fn : fns) {
    CheckResult r;
    Stopwatch sw;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r.id = static_cast<int>(rep.checks.size()) + 1;
      r.name = "criterion";
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
      r.seconds = sw.seconds();
    }
    if (on_check) on_check(r);
    say(ctx, format_check(r));
    rep.checks.push_back(std::move(r));
  }
  CheckResult e2e{12, "end_to_end"};
  const bool rest = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  e2e.seconds = total.seconds();
  e2e.add("seconds", e2e.seconds);
  e2e.pass = rest && e2e.seconds <= kVerifyBudgetSeconds;
  e2e.detail = fmt("criteria 1-11 %s, suite ran in %.1f s (budget %.0f s)", rest ? "all pass" : "not all pass",
                   e2e.seconds, kVerifyBudgetSeconds);
  if (on_check) on_check(e2e);
  say(ctx, format_check(e2e));
  rep.checks.push_back(std::move(e2e));
  rep.seconds = total.seconds();
  if (csv) *csv = ctx.csv;
  return rep;
}

// ---- subcommands ---------------------------------------------------------------------------

namespace {

std::string out_path(const RunConfig& cfg, const std::string& scenario, const std::string& file) {
  return cfg.output_dir + "/" + scenario + "/" + file;
}

json base_report(const RunConfig& cfg, const std::string& scenario) {
  return {{"scenario", scenario}, {"seed", cfg.seed}, {"config_hash", content_hash(run_config_json(cfg))}};
}

json slope_json(const SlopeReport& s) {
  return {{"horizons", s.horizons}, {"norms", s.norms}, {"defined", s.defined},
          {"slope", s.defined ? json(s.slope) : json(nullptr)}};
}

std::optional<Trajectory> maybe_forcing(const RunConfig& cfg, const TimeGrid& tg) {
  if (cfg.forcing_amplitude == 0.0) return std::nullopt;
  return seeded_forcing(grid_of(cfg), tg, cfg.seed + 1, cfg.forcing_amplitude);
}

}  // namespace

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  CsvTable csv;
  log << "verify: n=" << cfg.n << " seed=" << cfg.seed << std::endl;
  const ScenarioReport rep = run_verify(cfg, &log, &csv);
  write_text_atomic(out_path(cfg, "verify", "results.csv"), csv.str());
  write_text_atomic(out_path(cfg, "verify", "report.json"), rep.to_json() + "\n");
  log << (rep.pass() ? "verify: all checks pass" : "verify: FAILED") << std::endl;
  return rep.pass() ? 0 : 1;
}

int cmd_picard(const RunConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  const GridSpec g = grid_of(cfg);
  const PicardConfig pc = picard_config(cfg, cfg.p, cfg.T);
  const SpectralField u0 = seeded_initial_data(g, cfg.seed, cfg.amplitude);
  const auto F = maybe_forcing(cfg, pc.time_grid());
  const PicardBundle b = picard_bundle(u0, F ? &*F : nullptr, pc);
  CsvTable csv;
  json levels = json::array();
  for (const auto& n : b.norms()) {
    const std::string idx = fmt("level=%d", n.level);
    csv.add("picard", "kato_norm", idx, n.kato);
    csv.add("picard", "linf_l2", idx, n.linf_l2);
    csv.add("picard", "forcing_l2", idx, n.forcing_l2);
    levels.push_back({{"level", n.level}, {"kato", n.kato}, {"linf_l2", n.linf_l2}, {"forcing_l2", n.forcing_l2}});
  }
  for (int l = 1; l <= b.k(); ++l) {
    const double d = relative_error(b.iterate(l), b.iterate(l - 1));
    csv.add("picard", "iterate_change", fmt("level=%d", l), d);
  }
  json rep = base_report(cfg, "picard");
  rep["k"] = b.k();
  rep["p"] = cfg.p;
  rep["levels"] = levels;
  rep["seconds"] = sw.seconds();
  write_text_atomic(out_path(cfg, "picard", "results.csv"), csv.str());
  write_text_atomic(out_path(cfg, "picard", "report.json"), rep.dump(2) + "\n");
  log << "picard: k=" << b.k() << ", " << csv.rows() << " rows written" << std::endl;
  return 0;
}

int cmd_decay(const RunConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  const GridSpec g = grid_of(cfg);
  const double T_max = *std::max_element(cfg.T_sweep.begin(), cfg.T_sweep.end());
  const PicardConfig pc = picard_config(cfg, cfg.p, T_max);
  const SpectralField u0 = seeded_initial_data(g, cfg.seed, cfg.amplitude);
  const auto F = maybe_forcing(cfg, pc.time_grid());
  const MildSolution sol = mild_solve(u0, F ? &*F : nullptr, pc);
  const PicardBundle b = picard_bundle(u0, F ? &*F : nullptr, pc);
  const Trajectory diff = axpy(-1.0, b.iterate(pc.k), sol.v);
  const Trajectory Fk = b.forcing(pc.k);
  std::vector<double> Ts = cfg.T_sweep, dec, fk;
  std::sort(Ts.begin(), Ts.end());
  CsvTable csv;
  for (double T : Ts) {
    dec.push_back(linf_l2(diff, T));
    fk.push_back(spacetime_l2(Fk, T));
    csv.add("decay", "sup_l2_v_minus_pk", fmt("T=%g", T), dec.back());
    csv.add("decay", "fk_l2", fmt("T=%g", T), fk.back());
  }
  const SlopeReport sd = fit_loglog(Ts, dec), sf = fit_loglog(Ts, fk);
  csv.add("decay", "slope_sup_l2_v_minus_pk", "-", sd.defined ? sd.slope : std::nan(""));
  csv.add("decay", "slope_fk_l2", "-", sf.defined ? sf.slope : std::nan(""));
  json rep = base_report(cfg, "decay");
  rep["k"] = pc.k;
  rep["p"] = cfg.p;
  rep["target_exponent"] = 0.25;
  rep["decay"] = slope_json(sd);
  rep["fk"] = slope_json(sf);
  rep["mild_iterations"] = sol.iterations;
  rep["seconds"] = sw.seconds();
  write_text_atomic(out_path(cfg, "decay", "results.csv"), csv.str());
  write_text_atomic(out_path(cfg, "decay", "report.json"), rep.dump(2) + "\n");
  log << fmt("decay: slope %.3f (sup ||v - P_k||_2), %.3f (||F_k||_{L^2})", sd.slope, sf.slope) << std::endl;
  return 0;
}

int cmd_split(const RunConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  const GridSpec g = grid_of(cfg);
  const SpectralField u0 = seeded_initial_data(g, cfg.seed, cfg.amplitude > 0.0 ? cfg.amplitude : 1.0);
  const InitialDataParams prm = InitialDataParams::of(cfg.p);
  CsvTable csv;
  json certs = json::array();
  std::vector<double> Ns = cfg.N_sweep, l2, sub;
  std::sort(Ns.begin(), Ns.end());
  bool all_pass = true;
  for (double N : Ns) {
    const InitialDataSplit s = split_initial_data(u0, cfg.p, N);
    l2.push_back(plancherel_l2(s.u_tilde));
    sub.push_back(besov_norm(s.u_bar, {prm.s_bar, prm.p2, prm.p2}).value);
    csv.add("split", "u_tilde_l2", fmt("N=%g", N), l2.back());
    csv.add("split", "u_bar_besov", fmt("N=%g", N), sub.back());
    all_pass = all_pass && s.certificate.pass();
    certs.push_back(json::parse(certificate_json(s.certificate)));
  }
  const SlopeReport st = fit_loglog(Ns, l2), sb = fit_loglog(Ns, sub);
  csv.add("split", "slope_u_tilde_l2", "predicted", -prm.gamma2);
  csv.add("split", "slope_u_tilde_l2", "measured", st.defined ? st.slope : std::nan(""));
  csv.add("split", "slope_u_bar_besov", "predicted", prm.gamma1);
  csv.add("split", "slope_u_bar_besov", "measured", sb.defined ? sb.slope : std::nan(""));
  json rep = base_report(cfg, "split");
  rep["p"] = cfg.p;
  rep["gamma1"] = prm.gamma1;
  rep["gamma2"] = prm.gamma2;
  rep["delta2"] = prm.delta2;
  rep["u_tilde_l2"] = slope_json(st);
  rep["u_bar_besov"] = slope_json(sb);
  rep["certificates"] = certs;
  rep["certificates_pass"] = all_pass;
  rep["seconds"] = sw.seconds();
  write_text_atomic(out_path(cfg, "split", "results.csv"), csv.str());
  write_text_atomic(out_path(cfg, "split", "report.json"), rep.dump(2) + "\n");
  log << "split: " << Ns.size() << " levels, certificates " << (all_pass ? "pass" : "FAIL") << std::endl;
  return all_pass ? 0 : 1;
}

int cmd_norms(const RunConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  const GridSpec g = grid_of(cfg);
  const double s = BesovIndex::critical_s(cfg.p);
  const TimeGrid tg(cfg.T, std::min(cfg.octaves, 6), std::min(cfg.nodes_per_block, 4));
  CsvTable csv;
  for (int i = 0; i < cfg.samples; ++i) {
    const SpectralField f = random_field(g, FieldKind::vector, cfg.seed + i);
    const std::string idx = fmt("sample=%d", i);
    const Trajectory h = heat_trajectory(f, tg);
    csv.add("norms", "l2", idx, plancherel_l2(f));
    csv.add("norms", "besov_critical_inf", idx, besov_norm(f, {s, cfg.p, inf}).value);
    csv.add("norms", "besov_critical_q", idx, besov_norm(f, {s, cfg.p, cfg.q}).value);
    csv.add("norms", "heat_besov", idx, heat_besov_norm(f, s, cfg.p));
    csv.add("norms", "kato_heat", idx, kato_norm(h, KatoIndex::critical(cfg.p)));
    csv.add("norms", "carleson_heat", idx, carleson_norm(h, CarlesonScan::dyadic(cfg.T)).total);
  }
  json rep = base_report(cfg, "norms");
  rep["samples"] = cfg.samples;
  rep["p"] = cfg.p;
  rep["seconds"] = sw.seconds();
  write_text_atomic(out_path(cfg, "norms", "results.csv"), csv.str());
  write_text_atomic(out_path(cfg, "norms", "report.json"), rep.dump(2) + "\n");
  log << "norms: " << csv.rows() << " rows written" << std::endl;
  return 0;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  Stopwatch sw;
  const GridSpec g = grid_of(cfg);
  const PicardConfig pc = picard_config(cfg, cfg.p, cfg.T);
  const SpectralField u0 = seeded_initial_data(g, cfg.seed, cfg.amplitude);
  const auto F = maybe_forcing(cfg, pc.time_grid());
  json rep = base_report(cfg, "solve");
  if (cfg.bracket_doublings > 0 && cfg.amplitude > 0.0) {
    const SmallnessBracket br = smallness_bracket(seeded_initial_data(g, cfg.seed, 1.0), F ? &*F : nullptr, pc,
                                                  cfg.amplitude, cfg.bracket_doublings);
    rep["smallness_bracket"] = {{"amplitudes", br.amplitudes},
                                {"iterations", br.iterations},
                                {"last_converged", br.last_converged},
                                {"first_failed", br.first_failed}};
    log << fmt("solve: smallness bracket [%.4g, %.4g]", br.last_converged, br.first_failed) << std::endl;
  }
  try {
    const MildSolution sol = mild_solve(u0, F ? &*F : nullptr, pc);
    const PicardBundle b = picard_bundle(u0, F ? &*F : nullptr, pc);
    const EnergyReport er = energy_residual(sol.v, b);
    CsvTable csv;
    for (std::size_t i = 0; i < sol.increments.size(); ++i)
      csv.add("solve", "increment", fmt("iter=%zu", i + 1), sol.increments[i]);
    for (std::size_t i = 0; i < er.times.size(); ++i) {
      csv.add("solve", "energy_residual", fmt("t=%.17g", er.times[i]), er.residual[i]);
      csv.add("solve", "kinetic", fmt("t=%.17g", er.times[i]), er.kinetic[i]);
    }
    write_trajectory(out_path(cfg, "solve", "v.bnsf"), sol.v);
    rep["converged"] = true;
    rep["iterations"] = sol.iterations;
    rep["increments"] = sol.increments;
    rep["residual"] = sol.residual;
    rep["energy_max_relative"] = er.max_relative();
    rep["energy_scale"] = er.scale;
    rep["seconds"] = sw.seconds();
    write_text_atomic(out_path(cfg, "solve", "results.csv"), csv.str());
    write_text_atomic(out_path(cfg, "solve", "report.json"), rep.dump(2) + "\n");
    log << fmt("solve: %d iterations, residual %.2e, energy residual/scale %.2e", sol.iterations, sol.residual,
               er.max_relative())
        << std::endl;
    return 0;
  } catch (const ConvergenceError& e) {
    rep["converged"] = false;
    rep["error"] = e.what();
    rep["increments"] = e.increments();
    write_text_atomic(out_path(cfg, "solve", "report.json"), rep.dump(2) + "\n");
    log << "solve: " << e.what() << std::endl;
    return 2;
  }
}

}  // namespace bnslab
