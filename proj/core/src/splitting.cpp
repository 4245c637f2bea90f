#include "bnslab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "bnslab/error.hpp"
#include "bnslab/kato.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

namespace {

constexpr double kDim = 3.0;

double geometric(double gap) { return 1.0 / (1.0 - std::pow(2.0, -std::abs(gap))); }

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// p / p_target, zero when the target integrability is infinite.
double ratio(double p, double target) { return std::isinf(target) ? 0.0 : p / target; }

double relative_reconstruction(const SpectralField& a, const SpectralField& b, const SpectralField& whole) {
  const SpectralField sum = axpy(1.0, a, b);
  return relative_l2_error(sum, whole);
}

double sequence_reconstruction(const std::vector<const DyadicSequence*>& parts, const DyadicSequence& whole) {
  double err = 0.0, ref = 0.0;
  for (int j = whole.j_min; j <= whole.j_max(); ++j) {
    const auto& w = whole.at(j).data();
    for (std::size_t x = 0; x < w.size(); ++x) {
      double s = 0.0;
      for (const auto* part : parts) s += part->at(j).data()[x];
      err = std::max(err, std::abs(s - w[x]));
      ref = std::max(ref, std::abs(w[x]));
    }
  }
  return ref > 0.0 ? err / ref : err;
}

// max_j ||piece_j||_p / ||whole_j||_p over shells where the source is nonzero.
double shell_persistency(const DyadicSequence& piece, const DyadicSequence& whole, double p) {
  const auto a = piece_norms(piece, p);
  const auto b = piece_norms(whole, p);
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (b[j] > 0.0) worst = std::max(worst, a[j] / b[j]);
    else if (a[j] > 0.0) worst = inf;
  }
  return worst;
}

void require_sequence(const DyadicSequence& seq) {
  if (seq.pieces.empty()) throw Error("splitting: empty dyadic sequence");
}

}  // namespace

// ---- certificates --------------------------------------------------------------------------

bool SplitCertificate::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const SplitCheck& c) { return c.pass; });
}

void SplitCertificate::check(const std::string& name, double measured, double bound, double rel) {
  const bool ok = std::isfinite(measured) && measured <= bound + rel * std::max(std::abs(bound), 1e-300);
  checks.push_back({name, measured, bound, ok});
}

void SplitCertificate::absorb(const SplitCertificate& other, const std::string& prefix) {
  for (const auto& c : other.checks) checks.push_back({prefix + c.name, c.measured, c.bound, c.pass});
}

const SplitCheck* SplitCertificate::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

// ---- horizontal ----------------------------------------------------------------------------

HorizontalSplit horizontal_split(const DyadicSequence& seq, double p, double s, double s0, double s1, double K) {
  require_sequence(seq);
  if (s == s0 || s == s1 || s0 == s1) throw Error("horizontal_split: s, s0, s1 must be distinct");
  if (!((s0 < s && s < s1) || (s1 < s && s < s0)))
    throw Error("horizontal_split: s must lie strictly between s0 and s1");
  if (!(K > 0.0)) throw Error("horizontal_split: K must be positive");

  HorizontalSplit out{DyadicSequence::zeros(seq.grid, seq.kind, seq.j_min, seq.j_max()),
                      DyadicSequence::zeros(seq.grid, seq.kind, seq.j_min, seq.j_max()),
                      static_cast<int>(std::floor(std::log2(K))),
                      {}};
  const bool f_high = s0 < s;
  for (int j = seq.j_min; j <= seq.j_max(); ++j) {
    const bool high = j > out.kappa;
    (high == f_high ? out.f : out.g).at(j) = seq.at(j);
  }

  auto& c = out.certificate;
  c.lemma_id = "horizontal_split";
  c.param("s", s);
  c.param("s0", s0);
  c.param("s1", s1);
  c.param("p", p);
  c.param("K", K);
  c.param("kappa", out.kappa);
  const double un = sequence_norm(seq, s, p, inf);
  c.check("f_l1_s0", sequence_norm(out.f, s0, p, 1.0), std::pow(K, s0 - s) * geometric(s0 - s) * un);
  c.check("g_l1_s1", sequence_norm(out.g, s1, p, 1.0), std::pow(K, s1 - s) * geometric(s1 - s) * un);
  c.check("persistency_f", sequence_norm(out.f, s, p, inf), un, 0.0);
  c.check("persistency_g", sequence_norm(out.g, s, p, inf), un, 0.0);
  c.check("reconstruction", sequence_reconstruction({&out.f, &out.g}, seq), 0.0, 0.0);
  return out;
}

// ---- diagonal ------------------------------------------------------------------------------

double DiagonalParams::theta() const { return (inv(p) - inv(p_bar)) / (inv(p_tilde) - inv(p_bar)); }

void DiagonalParams::validate() const {
  if (!(p_tilde > 0.0 && p_tilde < p && p < p_bar)) throw Error("diagonal split: need 0 < p_tilde < p < p_bar");
  const double th = theta();
  const double rs = std::abs(sigma - (th * s_tilde + (1.0 - th) * s_bar));
  const double rq = std::abs(inv(q) - (th * inv(q_tilde) + (1.0 - th) * inv(q_bar)));
  if (rs > 1e-12 * std::max(1.0, std::abs(sigma)) || rq > 1e-12)
    throw Error("diagonal split: (sigma, 1/p, 1/q) is not on the segment between the targets (residuals s: " +
                std::to_string(rs) + ", 1/q: " + std::to_string(rq) + ")");
}

double DiagonalParams::q_ratio_tilde() const {
  if (q == q_tilde) return 1.0;
  if (std::isinf(q)) throw Error("diagonal split: q = inf with finite q_tilde is not supported");
  if (std::isinf(q_tilde)) return 0.0;
  return q / q_tilde;
}

DiagonalSplit diagonal_split(const DyadicSequence& seq, const DiagonalParams& prm, double N) {
  require_sequence(seq);
  prm.validate();
  if (!(N > 0.0)) throw Error("diagonal_split: N must be positive");
  const double r = prm.q_ratio_tilde();
  const double et = 1.0 - ratio(prm.p, prm.p_tilde);
  const auto norms = piece_norms(seq, prm.p);
  const double total = sequence_norm(seq, prm.sigma, prm.p, prm.q);

  DiagonalSplit out{DyadicSequence::zeros(seq.grid, seq.kind, seq.j_min, seq.j_max()),
                    DyadicSequence::zeros(seq.grid, seq.kind, seq.j_min, seq.j_max()),
                    std::vector<double>(seq.pieces.size(), inf),
                    {}};
  const double log_c = total > 0.0 ? (1.0 - r) * std::log(total) / et : 0.0;
  const int ncomp = components(seq.kind);
  const std::size_t np = seq.grid.points();
  for (int j = seq.j_min; j <= seq.j_max(); ++j) {
    const std::size_t idx = static_cast<std::size_t>(j - seq.j_min);
    const PhysicalField& g = seq.at(j);
    if (!(norms[idx] > 0.0)) {
      out.g_bar.at(j) = g;
      continue;
    }
    const double log_lambda = (j * std::log(2.0) * (prm.sigma * r - prm.s_tilde) + (r - 1.0) * std::log(norms[idx])) / et;
    const double A = std::exp(log_c + log_lambda) * N * norms[idx];
    out.thresholds[idx] = A;
    const auto mod = g.modulus();
    PhysicalField& gt = out.g_tilde.at(j);
    PhysicalField& gb = out.g_bar.at(j);
    for (int comp = 0; comp < ncomp; ++comp) {
      const double* src = g.component(comp);
      double* t = gt.component(comp);
      double* b = gb.component(comp);
      for (std::size_t x = 0; x < np; ++x) (mod[x] > A ? t : b)[x] = src[x];
    }
  }

  auto& c = out.certificate;
  c.lemma_id = "diagonal_split";
  c.param("sigma", prm.sigma);
  c.param("p", prm.p);
  c.param("q", prm.q);
  c.param("s_tilde", prm.s_tilde);
  c.param("p_tilde", prm.p_tilde);
  c.param("s_bar", prm.s_bar);
  c.param("p_bar", prm.p_bar);
  c.param("theta", prm.theta());
  c.param("N", N);
  c.check("tilde", sequence_norm(out.g_tilde, prm.s_tilde, prm.p_tilde, prm.q_tilde), std::pow(N, et) * total);
  c.check("bar", sequence_norm(out.g_bar, prm.s_bar, prm.p_bar, prm.q_bar),
          std::pow(N, 1.0 - ratio(prm.p, prm.p_bar)) * total);
  c.check("persistency_tilde", shell_persistency(out.g_tilde, seq, prm.p), 1.0, 0.0);
  c.check("persistency_bar", shell_persistency(out.g_bar, seq, prm.p), 1.0, 0.0);
  c.check("reconstruction", sequence_reconstruction({&out.g_tilde, &out.g_bar}, seq), 0.0, 0.0);
  return out;
}

// ---- non-diagonal --------------------------------------------------------------------------

double NondiagonalParams::s1() const {
  const double tau = (1.0 / p - 1.0 / p_tilde) / (inv(p_bar) - 1.0 / p_tilde);
  return s_tilde + tau * (s_bar - s_tilde);
}

void NondiagonalParams::validate() const {
  if (!(p_tilde > 0.0 && p_tilde < p && p < p_bar)) throw Error("nondiagonal split: need 0 < p_tilde < p < p_bar");
  const double a = s1();
  if (std::abs(a - s) <= 1e-12 * std::max(1.0, std::abs(s)))
    throw Error("nondiagonal split: (s,1/p), (s_tilde,1/p_tilde), (s_bar,1/p_bar) are colinear");
  if (!((s0 < s && s < a) || (a < s && s < s0)))
    throw Error("nondiagonal split: s must lie strictly between s0 and s1 = " + std::to_string(a));
}

NondiagonalSplit nondiagonal_split(const DyadicSequence& seq, const NondiagonalParams& prm, double K, double N) {
  prm.validate();
  const double s1 = prm.s1();
  HorizontalSplit h = horizontal_split(seq, prm.p, prm.s, prm.s0, s1, K);
  DiagonalSplit d = diagonal_split(h.g, {s1, prm.p, 1.0, prm.s_tilde, prm.p_tilde, 1.0, prm.s_bar, prm.p_bar, 1.0}, N);

  NondiagonalSplit out{std::move(h.f), std::move(d.g_tilde), std::move(d.g_bar), {}};
  auto& c = out.certificate;
  c.lemma_id = "nondiagonal_split";
  c.param("s", prm.s);
  c.param("p", prm.p);
  c.param("s0", prm.s0);
  c.param("s1", s1);
  c.param("K", K);
  c.param("N", N);
  const double un = sequence_norm(seq, prm.s, prm.p, inf);
  const double hk = std::pow(K, s1 - prm.s) * geometric(s1 - prm.s);
  c.check("f_l1_s0", sequence_norm(out.f, prm.s0, prm.p, 1.0), std::pow(K, prm.s0 - prm.s) * geometric(prm.s0 - prm.s) * un);
  c.check("g_tilde", sequence_norm(out.g_tilde, prm.s_tilde, prm.p_tilde, 1.0),
          hk * std::pow(N, 1.0 - ratio(prm.p, prm.p_tilde)) * un);
  c.check("g_bar", sequence_norm(out.g_bar, prm.s_bar, prm.p_bar, 1.0), hk * std::pow(N, 1.0 - ratio(prm.p, prm.p_bar)) * un);
  c.check("persistency_f", shell_persistency(out.f, seq, prm.p), 1.0, 0.0);
  c.check("persistency_g_tilde", shell_persistency(out.g_tilde, seq, prm.p), 1.0, 0.0);
  c.check("persistency_g_bar", shell_persistency(out.g_bar, seq, prm.p), 1.0, 0.0);
  c.check("reconstruction", sequence_reconstruction({&out.f, &out.g_tilde, &out.g_bar}, seq), 0.0, 0.0);
  c.absorb(h.certificate, "horizontal.");
  c.absorb(d.certificate, "diagonal.");
  return out;
}

// ---- Besov ---------------------------------------------------------------------------------

BesovSplitParams BesovSplitParams::make(double s, double p, double s_tilde, double p_tilde, double s_bar, double p_bar) {
  if (!(p_tilde >= 1.0 && p_tilde < p && p < p_bar)) throw Error("besov split: need 1 <= p_tilde < p < p_bar");
  BesovSplitParams b{s, p, s_tilde, p_tilde, s_bar, p_bar, 0.0, 0.0};
  const double y = inv(p_bar);
  const double slope_alpha = (s_tilde - s) / (1.0 / p_tilde - 1.0 / p);  // ds per unit of 1/p along alpha
  const double s_alpha = s + (y - 1.0 / p) * slope_alpha;
  const double s_beta = s + kDim * (y - 1.0 / p);
  if (std::abs(slope_alpha - kDim) < 1e-14) throw Error("besov split: alpha coincides with the Sobolev line beta");
  const double lo = std::min(s_alpha, s_beta), hi = std::max(s_alpha, s_beta);
  if (!(y > 0.0 && y < 1.0 / p && s_bar > lo && s_bar < hi))
    throw Error("besov split: (s_bar, 1/p_bar) = (" + std::to_string(s_bar) + ", " + std::to_string(y) +
                ") is outside the region bounded by alpha (s = " + std::to_string(s_alpha) +
                " at this height), beta (s = " + std::to_string(s_beta) + ") and 1/p = 0");
  b.s0 = s_bar + kDim / p - kDim * y;
  b.s1 = b.nondiagonal().s1();
  return b;
}

double BesovSplitParams::K(double N) const { return std::pow(N, (1.0 - ratio(p, p_bar)) / (s0 - s1)); }

double BesovSplitParams::tilde_exponent() const {
  return (s1 - s) / (s0 - s1) * (1.0 - ratio(p, p_bar)) + (1.0 - ratio(p, p_tilde));
}

double BesovSplitParams::bar_exponent() const { return (s0 - s) / (s0 - s1) * (1.0 - ratio(p, p_bar)); }

BesovSplit besov_split(const SpectralField& u, const BesovSplitParams& prm, double N) {
  if (!(N > 0.0)) throw Error("besov_split: N must be positive");
  const BesovSplitParams chk = BesovSplitParams::make(prm.s, prm.p, prm.s_tilde, prm.p_tilde, prm.s_bar, prm.p_bar);
  const double K = chk.K(N);
  const DyadicSequence Ru = retraction(u);
  NondiagonalSplit nd = nondiagonal_split(Ru, chk.nondiagonal(), K, N);
  DyadicSequence rest = nd.f;
  for (int j = rest.j_min; j <= rest.j_max(); ++j) {
    auto& d = rest.at(j).data();
    const auto& b = nd.g_bar.at(j).data();
    for (std::size_t x = 0; x < d.size(); ++x) d[x] += b[x];
  }
  BesovSplit out{coretraction(nd.g_tilde), coretraction(rest), K, {}};

  const SplitConstants& sc = split_constants(u.grid());
  const double un = besov_norm(u, {chk.s, chk.p, inf}).value;
  const double gs0 = geometric(chk.s0 - chk.s), gs1 = geometric(chk.s1 - chk.s);
  const double Ks1 = std::pow(K, chk.s1 - chk.s), Ks0 = std::pow(K, chk.s0 - chk.s);
  const double et = 1.0 - ratio(chk.p, chk.p_tilde), eb = 1.0 - ratio(chk.p, chk.p_bar);
  const double c_tilde = sc.ell1(chk.s_tilde);
  const double c_emb = sc.embedding(chk.s_bar, chk.s0, chk.p, chk.p_bar);
  const double c_bar = sc.ell1(chk.s_bar);
  const double c_inf = sc.ellinf(chk.s);

  const double nt = besov_norm(out.u_tilde, {chk.s_tilde, chk.p_tilde, 1.0}).value;
  const double nb = besov_norm(out.u_bar, {chk.s_bar, chk.p_bar, 1.0}).value;

  auto& c = out.certificate;
  c.lemma_id = "besov_split";
  c.param("s", chk.s);
  c.param("p", chk.p);
  c.param("s_tilde", chk.s_tilde);
  c.param("p_tilde", chk.p_tilde);
  c.param("s_bar", chk.s_bar);
  c.param("p_bar", chk.p_bar);
  c.param("s0", chk.s0);
  c.param("s1", chk.s1);
  c.param("N", N);
  c.param("K", K);
  c.param("tilde_exponent", chk.tilde_exponent());
  c.param("bar_exponent", chk.bar_exponent());
  c.param("coretraction_l1_tilde", c_tilde);
  c.param("coretraction_l1_bar", c_bar);
  c.param("embedding", c_emb);
  c.param("coretraction_linf", c_inf);
  c.param("source_norm", un);
  c.param("measured_tilde_constant", un > 0 ? nt / (std::pow(N, chk.tilde_exponent()) * un) : 0.0);
  c.param("measured_bar_constant", un > 0 ? nb / (std::pow(N, chk.bar_exponent()) * un) : 0.0);
  c.check("reconstruction", relative_reconstruction(out.u_tilde, out.u_bar, u), 1e-10, 0.0);
  c.check("tilde", nt, c_tilde * Ks1 * gs1 * std::pow(N, et) * un, 1e-10);
  c.check("bar", nb, (c_emb * Ks0 * gs0 + c_bar * Ks1 * gs1 * std::pow(N, eb)) * un, 1e-10);
  c.check("persistency_tilde", besov_norm(out.u_tilde, {chk.s, chk.p, inf}).value, c_inf * un, 1e-10);
  c.check("persistency_bar", besov_norm(out.u_bar, {chk.s, chk.p, inf}).value, c_inf * un, 1e-10);
  c.absorb(nd.certificate, "sequence.");
  return out;
}

// ---- initial data --------------------------------------------------------------------------

InitialDataParams InitialDataParams::of(double p) {
  if (!(p > kDim) || std::isinf(p)) throw Error("split_initial_data: p must lie in ]3, inf[");
  InitialDataParams d;
  d.p = p;
  d.s_p = BesovIndex::critical_s(p);
  d.p2 = 2.0 * p;
  d.s_p2 = BesovIndex::critical_s(d.p2);
  d.s_dot = (1.0 / (2.0 * p) - 0.5) / (1.0 / p - 0.5) * d.s_p;
  d.s_bar = (d.s_p2 + d.s_dot) / 2.0;
  const BesovSplitParams b = d.besov();
  d.s0 = b.s0;
  d.s1 = b.s1;
  d.gamma2 = -b.tilde_exponent();
  d.gamma1 = b.bar_exponent();
  d.delta2 = d.s_bar - d.s_p2;
  return d;
}

BesovSplitParams InitialDataParams::besov() const { return BesovSplitParams::make(s_p, p, 0.0, 2.0, s_bar, p2); }

InitialDataSplit split_initial_data(const SpectralField& u0, double p, double N) {
  const InitialDataParams prm = InitialDataParams::of(p);
  if (u0.kind() != FieldKind::vector) throw Error("split_initial_data: vector field required");
  if (u0.max_divergence() > 1e-10) throw Error("split_initial_data: initial data must be divergence-free");
  BesovSplit b = besov_split(u0, prm.besov(), N);
  InitialDataSplit out{leray_project(b.u_tilde), leray_project(b.u_bar), prm, {}};

  const SplitConstants& sc = split_constants(u0.grid());
  const BesovSplitParams bp = prm.besov();
  const double un = besov_norm(u0, {prm.s_p, p, inf}).value;
  const double K = b.K;
  const double gs0 = geometric(bp.s0 - bp.s), gs1 = geometric(bp.s1 - bp.s);
  const double l2_bound = sc.ell1(0.0) * std::pow(K, bp.s1 - bp.s) * gs1 * std::pow(N, 1.0 - p / 2.0) * un;
  const double bar_bound = sc.leray() *
                           (sc.embedding(bp.s_bar, bp.s0, p, bp.p_bar) * std::pow(K, bp.s0 - bp.s) * gs0 +
                            sc.ell1(bp.s_bar) * std::pow(K, bp.s1 - bp.s) * gs1 * std::pow(N, 1.0 - p / bp.p_bar)) *
                           un;
  const double l2 = plancherel_l2(out.u_tilde);
  const double sub = besov_norm(out.u_bar, {prm.s_bar, prm.p2, prm.p2}).value;

  auto& c = out.certificate;
  c.lemma_id = "initial_data_split";
  c.param("p", p);
  c.param("p2", prm.p2);
  c.param("s_p", prm.s_p);
  c.param("s_dot", prm.s_dot);
  c.param("s_bar", prm.s_bar);
  c.param("s0", prm.s0);
  c.param("s1", prm.s1);
  c.param("gamma1", prm.gamma1);
  c.param("gamma2", prm.gamma2);
  c.param("delta2", prm.delta2);
  c.param("N", N);
  c.param("K", K);
  c.param("leray_constant", sc.leray());
  c.param("source_norm", un);
  c.param("measured_l2_constant", un > 0 ? l2 * std::pow(N, prm.gamma2) / un : 0.0);
  c.param("measured_bar_constant", un > 0 ? sub / (std::pow(N, prm.gamma1) * un) : 0.0);
  c.check("reconstruction", relative_reconstruction(out.u_tilde, out.u_bar, u0), 1e-10, 0.0);
  c.check("divergence_tilde", out.u_tilde.max_divergence(), 1e-10, 0.0);
  c.check("divergence_bar", out.u_bar.max_divergence(), 1e-10, 0.0);
  c.check("l2_tilde", l2, l2_bound, 1e-10);
  c.check("subcritical_bar", sub, bar_bound, 1e-10);
  const double pers = sc.leray() * sc.ellinf(prm.s_p) * un;
  c.check("persistency_tilde", besov_norm(out.u_tilde, {prm.s_p, p, inf}).value, pers, 1e-10);
  c.check("persistency_bar", besov_norm(out.u_bar, {prm.s_p, p, inf}).value, pers, 1e-10);
  c.absorb(b.certificate, "besov.");
  return out;
}

// ---- forcing -------------------------------------------------------------------------------

ForcingSplitParams ForcingSplitParams::of(double p) {
  if (!(p > kDim) || std::isinf(p)) throw Error("split_forcing: p must lie in ]3, inf[");
  ForcingSplitParams f;
  f.p = p;
  f.sigma = -2.0 + kDim / p;
  f.p_bar = 2.0 * p;
  f.s_bar = f.sigma + (f.s_tilde - f.sigma) / (1.0 / f.p_tilde - 1.0 / p) * (1.0 / f.p_bar - 1.0 / p);
  f.delta3 = f.s_bar - (-2.0 + kDim / f.p_bar);
  return f;
}

double ForcingSplitParams::lambda(int j) const {
  return std::pow(2.0, -j * (sigma - s_tilde) / (2.0 * (1.0 - p / p_tilde)));
}

ForcingSplit split_forcing(const Trajectory& F, double p, double N) {
  if (F.kind() != FieldKind::tensor) throw Error("split_forcing: tensor forcing required");
  if (!F.has_time_grid()) throw Error("split_forcing: forcing must live on a dyadic time grid (block-compatible)");
  if (!(N > 0.0)) throw Error("split_forcing: N must be positive");
  const ForcingSplitParams prm = ForcingSplitParams::of(p);
  const TimeGrid& tg = F.time_grid();
  const double T = F.horizon();
  const int M = tg.nodes_per_block();
  const GridSpec& grid = F.grid();
  const std::size_t np = grid.points();

  ForcingSplit out{Trajectory(grid, FieldKind::tensor, tg), Trajectory(grid, FieldKind::tensor, tg), prm, {}};
  double src_seq = 0.0, tilde_seq = 0.0, bar_seq = 0.0;
  double c_r = 0.0, c_s_tilde = 0.0, c_s_bar = 0.0;
  for (int b = 0; b < tg.blocks(); ++b) {
    const int j = b - tg.octaves();
    const double label = std::ldexp(1.0, j);
    std::vector<PhysicalField> phys;
    double m = 0.0;
    for (int i = 0; i < M; ++i) {
      const std::size_t node = static_cast<std::size_t>(b) * M + i;
      phys.push_back(F.field(node).to_physical());
      m = std::max(m, lp_norm(phys.back(), p));
      const double rel = 2.0 * F.time(node) / T / label;
      c_r = std::max(c_r, std::pow(rel, prm.sigma / 2.0));
      c_s_tilde = std::max(c_s_tilde, std::pow(rel, -prm.s_tilde / 2.0));
      c_s_bar = std::max(c_s_bar, std::pow(rel, -prm.s_bar / 2.0));
    }
    src_seq = std::max(src_seq, std::pow(label, -prm.sigma / 2.0) * m);
    const double A = m > 0.0 ? N * prm.lambda(j) * m : inf;
    double mt = 0.0, mb = 0.0;
    for (int i = 0; i < M; ++i) {
      const std::size_t node = static_cast<std::size_t>(b) * M + i;
      PhysicalField t(grid, FieldKind::tensor), u(grid, FieldKind::tensor);
      const auto mod = phys[i].modulus();
      for (int comp = 0; comp < 9; ++comp) {
        const double* src = phys[i].component(comp);
        double* pt = t.component(comp);
        double* pb = u.component(comp);
        for (std::size_t x = 0; x < np; ++x) (mod[x] > A ? pt : pb)[x] = src[x];
      }
      mt = std::max(mt, lp_norm(t, prm.p_tilde));
      mb = std::max(mb, lp_norm(u, prm.p_bar));
      out.F_tilde.field(node) = SpectralField::from_physical(t);
      out.F_bar.field(node) = SpectralField::from_physical(u);
    }
    tilde_seq = std::max(tilde_seq, std::pow(label, -prm.s_tilde / 2.0) * mt);
    bar_seq = std::max(bar_seq, std::pow(label, -prm.s_bar / 2.0) * mb);
  }

  const double M_src = fspace_norm(F, p);
  const double et = 1.0 - p / prm.p_tilde, eb = 1.0 - p / prm.p_bar;
  const double half = T / 2.0;
  const double w_tilde = kato_norm(out.F_tilde, {prm.s_tilde, prm.p_tilde});
  const double w_bar = kato_norm(out.F_bar, {prm.s_bar, prm.p_bar});
  const double bound_tilde = std::pow(half, (prm.sigma - prm.s_tilde) / 2.0) * c_s_tilde * c_r * std::pow(N, et) * M_src;
  const double bound_bar = std::pow(half, (prm.sigma - prm.s_bar) / 2.0) * c_s_bar * c_r * std::pow(N, eb) * M_src;

  const auto w = tg.integration_weights(T);
  double l3 = 0.0, l3_weight = 0.0;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    l3 += w[i] * std::pow(plancherel_l2(out.F_tilde.field(i)), 3.0);
    l3_weight += std::abs(w[i]) * std::pow(tg.time(i), 1.5 * prm.s_tilde);
  }
  l3 = std::cbrt(std::max(0.0, l3));

  auto& c = out.certificate;
  c.lemma_id = "forcing_split";
  c.param("p", p);
  c.param("sigma", prm.sigma);
  c.param("s_tilde", prm.s_tilde);
  c.param("p_tilde", prm.p_tilde);
  c.param("s_bar", prm.s_bar);
  c.param("p_bar", prm.p_bar);
  c.param("delta3", prm.delta3);
  c.param("N", N);
  c.param("T", T);
  c.param("retraction_constant", c_r);
  c.param("source_norm", M_src);
  c.param("measured_l3l2_constant", M_src > 0 ? l3 / (std::pow(N, et) * M_src) : 0.0);
  c.param("measured_bar_constant", M_src > 0 ? w_bar / (std::pow(N, eb) * M_src) : 0.0);
  Trajectory sum = axpy(1.0, out.F_tilde, out.F_bar);
  c.check("reconstruction", relative_error(sum, F), 1e-10, 0.0);
  c.check("persistency_tilde", fspace_norm(out.F_tilde, p), M_src, 1e-12);
  c.check("persistency_bar", fspace_norm(out.F_bar, p), M_src, 1e-12);
  c.check("sequence_tilde", tilde_seq, std::pow(N, et) * src_seq);
  c.check("sequence_bar", bar_seq, std::pow(N, eb) * src_seq);
  c.check("weighted_tilde", w_tilde, bound_tilde, 1e-10);
  c.check("l3l2_tilde", l3, std::cbrt(l3_weight) * bound_tilde, 1e-10);
  c.check("weighted_bar", w_bar, bound_bar, 1e-10);
  return out;
}

// ---- constants -----------------------------------------------------------------------------

SplitConstants::SplitConstants(const GridSpec& grid)
    : grid_(grid), j_min_(grid.j_min()), j_max_(grid.j_max()) {
  const DyadicPartition& part = dyadic_partition(grid);
  const int nk = j_max_ - j_min_ + 1;
  l1_.assign(static_cast<std::size_t>(nk) * 5, 0.0);
  for (int k = j_min_; k <= j_max_; ++k)
    for (int j = std::max(j_min_, k - 2); j <= std::min(j_max_, k + 2); ++j)
      l1_[(k - j_min_) * 5 + (j - k + 2)] = kernel_norm(k, j, 1.0);

  // Leray on one fattened shell: sum over (i, l) of ||kernel(P_il phi~_k)||_1.
  const double V = grid.volume();
  for (int k = j_min_; k <= j_max_; ++k) {
    double total = 0.0;
    for (int l = 0; l < 3; ++l) {
      SpectralField e(grid, FieldKind::vector);
      for (std::size_t q = 0; q < grid.points(); ++q)
        e.component(l)[q] = part.table(k - 1)[q] + part.table(k)[q] + part.table(k + 1)[q];
      const SpectralField pe = leray_project(e);
      const CoeffVector samples = pe.to_physical_complex();
      for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (std::size_t x = 0; x < grid.points(); ++x) acc += std::abs(samples[i * grid.points() + x]);
        total += acc / V * grid.cell_volume();
      }
    }
    leray_ = std::max(leray_, total);
  }
}

double SplitConstants::kernel_norm(int k, int j, double r) const {
  const DyadicPartition& part = dyadic_partition(grid_);
  SpectralField m(grid_, FieldKind::scalar);
  m.set_real_valued(false);
  const auto& pk = part.table(k);
  for (std::size_t q = 0; q < grid_.points(); ++q)
    m.component(0)[q] = pk[q] * (part.table(j - 1)[q] + part.table(j)[q] + part.table(j + 1)[q]);
  const CoeffVector samples = m.to_physical_complex();
  const double V = grid_.volume();
  double acc = 0.0;
  if (std::isinf(r)) {
    for (const auto& z : samples) acc = std::max(acc, std::abs(z) / V);
    return acc;
  }
  for (const auto& z : samples) acc += std::pow(std::abs(z) / V, r);
  return std::pow(acc * grid_.cell_volume(), 1.0 / r);
}

double SplitConstants::ell1(double s) const {
  double best = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) {
    double col = 0.0;
    for (int k = std::max(j_min_, j - 2); k <= std::min(j_max_, j + 2); ++k)
      col += std::pow(2.0, (k - j) * s) * l1_[(k - j_min_) * 5 + (j - k + 2)];
    best = std::max(best, col);
  }
  return best;
}

double SplitConstants::ellinf(double s) const {
  double best = 0.0;
  for (int k = j_min_; k <= j_max_; ++k) {
    double row = 0.0;
    for (int j = std::max(j_min_, k - 2); j <= std::min(j_max_, k + 2); ++j)
      row += std::pow(2.0, (k - j) * s) * l1_[(k - j_min_) * 5 + (j - k + 2)];
    best = std::max(best, row);
  }
  return best;
}

double SplitConstants::embedding(double s_bar, double s0, double p, double p_bar) const {
  if (!(p_bar >= p)) throw Error("split constants: embedding needs p_bar >= p");
  const double inv_r = 1.0 + inv(p_bar) - 1.0 / p;
  const double r = 1.0 / inv_r;
  double best = 0.0;
  for (int j = j_min_; j <= j_max_; ++j) {
    double col = 0.0;
    for (int k = std::max(j_min_, j - 2); k <= std::min(j_max_, j + 2); ++k)
      col += std::pow(2.0, k * s_bar - j * s0) * kernel_norm(k, j, r);
    best = std::max(best, col);
  }
  return best;
}

const SplitConstants& split_constants(const GridSpec& grid) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::unique_ptr<SplitConstants>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{grid.n(), grid.box_len()}];
  if (!slot) slot = std::make_unique<SplitConstants>(grid);
  return *slot;
}

}  // namespace bnslab
