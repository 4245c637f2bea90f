#include <gtest/gtest.h>

#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/harness.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "bnslab/split_picard.hpp"
#include "bnslab/stokes_picard.hpp"
#include "test_util.hpp"

using namespace bnslab;
using namespace bnslab::testing;

namespace {

const GridSpec g16(16, kTwoPi);

PicardConfig small_cfg(int k = 1) {
  PicardConfig c;
  c.k = k;
  c.octaves = 6;
  c.nodes_per_block = 4;
  return c;
}

// P div F mode by mode, times `mult(|xi|^2)`.
SpectralField projected_div(const SpectralField& F, const std::function<double(double)>& mult) {
  const GridSpec& g = F.grid();
  SpectralField out(g, FieldKind::vector);
  const cplx I(0.0, 1.0);
  for (std::size_t m = 1; m < g.points(); ++m) {
    const auto k = g.deriv_index(m);
    double xi[3];
    double a = 0.0;
    for (int c = 0; c < 3; ++c) {
      xi[c] = g.freq_spacing() * k[c];
      a += xi[c] * xi[c];
    }
    if (a == 0.0) continue;
    cplx d[3];
    for (int i = 0; i < 3; ++i) {
      d[i] = 0.0;
      for (int j = 0; j < 3; ++j) d[i] += I * xi[j] * F.component(3 * i + j)[m];
    }
    const cplx dot = (xi[0] * d[0] + xi[1] * d[1] + xi[2] * d[2]) / a;
    const double w = mult(g.xi2(m));
    for (int i = 0; i < 3; ++i) out.component(i)[m] = w * (d[i] - xi[i] * dot);
  }
  return out;
}

SpectralField zero_vector(const GridSpec& g) {
  SpectralField z(g, FieldKind::vector);
  z.set_divergence_free(true);
  return z;
}

double max_rel(const Trajectory& a, const Trajectory& b) { return relative_error(a, b); }

}  // namespace

TEST(Duhamel, ZeroForcingGivesZero) {
  const auto F = constant_trajectory(SpectralField(g16, FieldKind::tensor), TimeGrid(1.0, 4, 4));
  const auto L = duhamel_L(F);
  for (const auto& f : L.fields()) EXPECT_EQ(max_coeff(f), 0.0);
}

TEST(Duhamel, ConstantForcingClosedForm) {
  const auto F0 = random_field(g16, FieldKind::tensor, 3, {.leray = false});
  const TimeGrid tg(1.0, 6, 4);
  const auto L = duhamel_L(constant_trajectory(F0, tg));
  for (std::size_t i = 0; i < tg.size(); i += 3) {
    const double t = tg.time(i);
    const auto ref = projected_div(F0, [t](double a) { return -std::expm1(-t * a) / a; });
    EXPECT_LE(relative_l2_error(L.field(i), ref), 1e-10) << "t=" << t;
  }
}

TEST(Duhamel, LinearInTimeForcingClosedForm) {
  const auto F0 = random_field(g16, FieldKind::tensor, 4, {.leray = false});
  const TimeGrid tg(0.5, 5, 4);
  Trajectory F(g16, FieldKind::tensor, tg);
  for (std::size_t i = 0; i < tg.size(); ++i) F.field(i) = scaled(F0, tg.time(i));
  const auto L = duhamel_L(F);
  for (std::size_t i = 1; i < tg.size(); i += 4) {
    const double t = tg.time(i);
    // int_0^t e^{-(t-s)a} s ds = t/a - (1 - e^{-ta})/a^2
    const auto ref = projected_div(F0, [t](double a) { return t / a + std::expm1(-t * a) / (a * a); });
    EXPECT_LE(relative_l2_error(L.field(i), ref), 1e-9) << "t=" << t;
  }
}

TEST(Duhamel, OutputIsDivergenceFree) {
  const auto F = constant_trajectory(random_field(g16, FieldKind::tensor, 5, {.leray = false}), TimeGrid(1.0, 4, 4));
  const auto L = duhamel_L(F);
  for (const auto& f : L.fields()) {
    EXPECT_TRUE(f.divergence_free());
    EXPECT_LE(f.max_divergence(), 1e-12 * (max_coeff(f) + 1e-300));
  }
}

TEST(Duhamel, PointEvaluationMatchesNodesAndRejectsLateTimes) {
  const auto F = constant_trajectory(random_field(g16, FieldKind::tensor, 6, {.leray = false}), TimeGrid(1.0, 4, 4));
  const auto L = duhamel_L(F);
  EXPECT_LE(relative_l2_error(duhamel_at(F, L.time(7)), L.field(7)), 1e-12);
  const double t = 0.3;
  const auto ref = projected_div(F.field(0), [t](double a) { return -std::expm1(-t * a) / a; });
  EXPECT_LE(relative_l2_error(duhamel_at(F, t), ref), 1e-10);
  EXPECT_THROW(duhamel_at(F, 1.5), Error);
  EXPECT_THROW(duhamel_at(F, 0.0), Error);
}

TEST(Bilinear, VanishesWithZeroFactor) {
  const TimeGrid tg(1.0, 4, 4);
  const auto u = heat_trajectory(random_field(g16, FieldKind::vector, 1), tg);
  const auto zero = constant_trajectory(SpectralField(g16, FieldKind::vector), tg);
  const auto B = bilinear_B(u, zero);
  for (const auto& f : B.fields()) EXPECT_EQ(max_coeff(f), 0.0);
}

TEST(Bilinear, SymmetricInItsArguments) {
  const TimeGrid tg(1.0, 4, 4);
  const auto u = heat_trajectory(random_field(g16, FieldKind::vector, 1), tg);
  const auto v = heat_trajectory(random_field(g16, FieldKind::vector, 2), tg);
  // (u (x) v) and (v (x) u) differ by a transpose, but div of the sum is what enters B(u,v)+B(v,u).
  const auto a = axpy(1.0, bilinear_B(u, v), bilinear_B(v, u));
  const auto uv = axpy(1.0, u, v);
  const auto umv = axpy(-1.0, v, u);
  const auto b = axpy(-1.0, bilinear_B(umv, umv), bilinear_B(uv, uv));
  EXPECT_LE(max_rel(scaled(b, 0.5), a), 1e-12);
}

TEST(Bilinear, EnergyBoundConstantIsStable) {
  const TimeGrid tg(1.0, 6, 4);
  std::vector<double> c;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const auto u = heat_trajectory(random_field(g16, FieldKind::vector, s), tg);
    const auto v = heat_trajectory(random_field(g16, FieldKind::vector, 50 + s), tg);
    c.push_back(linf_l2(bilinear_B(u, v), 1.0) / (linf_l2(u, 1.0) * kato_norm(v, KatoIndex::critical(6))));
  }
  double mean = 0.0, var = 0.0;
  for (double x : c) mean += x / c.size();
  for (double x : c) var += (x - mean) * (x - mean) / c.size();
  EXPECT_GT(mean, 0.0);
  EXPECT_LE(std::sqrt(var) / mean, 0.5);
}

TEST(DuhamelBound, ForcingToKatoConstantIsStable) {
  const TimeGrid tg(1.0, 8, 4);
  std::vector<double> c;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const auto F = seeded_forcing(g16, tg, s, 1.0);
    c.push_back(kato_norm(duhamel_L(F), KatoIndex::critical(6)) / fspace_norm(F, 3.0));
  }
  double mean = 0.0, var = 0.0;
  for (double x : c) mean += x / c.size();
  for (double x : c) var += (x - mean) * (x - mean) / c.size();
  EXPECT_GT(mean, 0.0);
  EXPECT_LE(std::sqrt(var) / mean, 0.5);
}

TEST(KOfP, Values) {
  EXPECT_EQ(k_of_p(4.0), 0);
  EXPECT_EQ(k_of_p(6.0), 1);
  EXPECT_EQ(k_of_p(7.5), 2);
  EXPECT_EQ(k_of_p(3.5), 0);
  EXPECT_THROW(k_of_p(3.0), Error);
  EXPECT_THROW(k_of_p(2.0), Error);
}

TEST(Picard, ZeroDataGivesZeroBundle) {
  const auto b = picard_bundle(zero_vector(g16), nullptr, small_cfg(2));
  ASSERT_EQ(b.k(), 2);
  for (int l = 0; l <= 2; ++l) {
    for (const auto& f : b.iterate(l).fields()) EXPECT_EQ(max_coeff(f), 0.0);
    EXPECT_EQ(b.norms()[l].kato, 0.0);
    EXPECT_EQ(b.norms()[l].forcing_l2, 0.0);
  }
}

TEST(Picard, FirstIterateComposesHeatAndBilinear) {
  const auto u0 = random_field(g16, FieldKind::vector, 7, {.l2_norm = 2.0});
  const auto cfg = small_cfg(1);
  const auto b = picard_bundle(u0, nullptr, cfg);
  const auto P0 = heat_trajectory(u0, cfg.time_grid());
  EXPECT_LE(max_rel(b.iterate(0), P0), 1e-14);
  EXPECT_LE(max_rel(b.iterate(1), axpy(-1.0, bilinear_B(P0, P0), P0)), 1e-12);
}

TEST(Picard, IncrementIsDuhamelOfForcing) {
  const auto u0 = random_field(g16, FieldKind::vector, 8, {.l2_norm = 2.0});
  const auto b = picard_bundle(u0, nullptr, small_cfg(2));
  const auto diff = axpy(-1.0, b.iterate(1), b.iterate(2));
  const auto ref = scaled(duhamel_L(b.forcing(1)), -1.0);
  EXPECT_LE(max_rel(diff, ref), 1e-12);
}

TEST(Picard, ForcingIsDifferenceOfTensorSquares) {
  const auto u0 = random_field(g16, FieldKind::vector, 9, {.l2_norm = 2.0});
  const auto b = picard_bundle(u0, nullptr, small_cfg(1));
  for (std::size_t i = 0; i < b.iterate(0).size(); i += 5) {
    const auto& P0 = b.iterate(0).field(i);
    const auto& P1 = b.iterate(1).field(i);
    const auto ref = axpy(-1.0, tensor_product(P0, P0), tensor_product(P1, P1));
    EXPECT_LE(relative_l2_error(b.forcing_at(1, i), ref), 1e-14);
    EXPECT_LE(relative_l2_error(b.forcing_at(0, i), tensor_product(P0, P0)), 1e-14);
  }
}

TEST(Picard, IteratesStayDivergenceFree) {
  const auto u0 = random_field(g16, FieldKind::vector, 10, {.l2_norm = 3.0});
  const auto b = picard_bundle(u0, nullptr, small_cfg(2));
  for (int l = 0; l <= 2; ++l) {
    EXPECT_TRUE(b.iterate(l).divergence_free());
    for (const auto& f : b.iterate(l).fields()) EXPECT_LE(f.max_divergence(), 1e-12 * max_coeff(f));
  }
}

TEST(Picard, RejectsCompressibleData) {
  EXPECT_THROW(picard_bundle(random_field(g16, FieldKind::vector, 1, {.leray = false}), nullptr, small_cfg()), Error);
}

TEST(Picard, LeadingForcingObeysHolder) {
  const GridSpec g(32, kTwoPi);
  const auto u0 = random_field(g, FieldKind::vector, 11, {.k_max = 5});
  auto cfg = small_cfg(0);
  cfg.p = 4.0;
  const auto b = picard_bundle(u0, nullptr, cfg);
  const double M = kato_norm(b.iterate(0), KatoIndex::critical(4));
  EXPECT_LE(fspace_norm(b.forcing(0), 2.0), M * M * (1 + 1e-9));
}

TEST(FkScaling, ZeroDataHasUndefinedSlope) {
  const auto rep = fk_l2_scaling(zero_vector(g16), nullptr, 1, {0.25, 0.5, 1.0}, small_cfg());
  EXPECT_FALSE(rep.defined);
  for (double v : rep.norms) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(fk_l2_scaling(zero_vector(g16), nullptr, 1, {}, small_cfg()), Error);
}

TEST(FitLogLog, RecoversPowerLaw) {
  const auto rep = fit_loglog({1, 2, 4, 8}, {3.0, 3.0 * std::pow(2, 0.25), 3.0 * std::pow(4, 0.25), 3.0 * std::pow(8, 0.25)});
  EXPECT_TRUE(rep.defined);
  EXPECT_NEAR(rep.slope, 0.25, 1e-14);
  EXPECT_FALSE(fit_loglog({1, 2}, {1.0, 0.0}).defined);
}

TEST(MildSolve, ZeroDataConvergesImmediately) {
  const auto sol = mild_solve(zero_vector(g16), nullptr, small_cfg());
  EXPECT_EQ(sol.iterations, 1);
  for (const auto& f : sol.v.fields()) EXPECT_EQ(max_coeff(f), 0.0);
}

TEST(MildSolve, SmallDataContracts) {
  const auto sol = mild_solve(random_field(g16, FieldKind::vector, 12, {.l2_norm = 0.5}), nullptr, small_cfg());
  ASSERT_GE(sol.increments.size(), 3u);
  for (std::size_t i = 1; i + 1 < sol.increments.size(); ++i) EXPECT_LT(sol.increments[i], sol.increments[i - 1]);
  EXPECT_LE(sol.residual, 1e-9 * kato_norm(sol.v, KatoIndex::critical(6)));
  EXPECT_TRUE(sol.v.divergence_free());
}

TEST(MildSolve, LargeDataReportsIncrements) {
  auto cfg = small_cfg();
  cfg.max_iter = 30;
  try {
    mild_solve(random_field(g16, FieldKind::vector, 13, {.slope = -0.5, .l2_norm = 400.0}), nullptr, cfg);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_FALSE(e.increments().empty());
  }
}

TEST(MildSolve, SmallnessBracketStopsAtFirstFailure) {
  auto cfg = small_cfg();
  cfg.max_iter = 30;
  const auto profile = random_field(g16, FieldKind::vector, 13, {.slope = -0.5, .l2_norm = 1.0});
  const auto br = smallness_bracket(profile, nullptr, cfg, 0.5, 12);
  ASSERT_GT(br.last_converged, 0.0);
  ASSERT_GT(br.first_failed, 0.0);
  EXPECT_EQ(br.first_failed, 2.0 * br.last_converged);
  EXPECT_EQ(br.amplitudes.back(), br.first_failed);
  EXPECT_EQ(br.iterations.back(), 0);
  for (std::size_t i = 0; i + 1 < br.iterations.size(); ++i) EXPECT_GT(br.iterations[i], 0);
  // iteration counts grow with the amplitude
  for (std::size_t i = 1; i + 1 < br.iterations.size(); ++i) EXPECT_GE(br.iterations[i], br.iterations[i - 1]);
  EXPECT_THROW(smallness_bracket(profile, nullptr, cfg, 0.0, 3), Error);
}

TEST(Energy, ExactIterateHasZeroResidual) {
  const auto u0 = random_field(g16, FieldKind::vector, 14, {.l2_norm = 0.5});
  const auto b = picard_bundle(u0, nullptr, small_cfg(1));
  const auto rep = energy_residual(b.iterate(1), b);
  for (double r : rep.residual) EXPECT_EQ(r, 0.0);
  EXPECT_EQ(rep.max_relative(), 0.0);
}

TEST(Energy, MildSolutionBalancesAndPerturbationDoesNot) {
  const auto u0 = random_field(g16, FieldKind::vector, 15, {.l2_norm = 0.5});
  auto cfg = small_cfg(1);
  cfg.octaves = 10;
  cfg.nodes_per_block = 8;
  const auto sol = mild_solve(u0, nullptr, cfg);
  const auto b = picard_bundle(u0, nullptr, cfg);
  EXPECT_LE(energy_residual(sol.v, b).max_relative(), 1e-6);
  const auto bump = constant_trajectory(random_field(g16, FieldKind::vector, 16, {.l2_norm = 0.05}), cfg.time_grid());
  EXPECT_GT(energy_residual(axpy(1.0, bump, sol.v), b).max_relative(), 1e-3);
}

TEST(SplitPicard, LeadingDifferenceIsTheSplitOffPart) {
  const GridSpec g(32, kTwoPi);
  const auto u0 = random_field(g, FieldKind::vector, 17, {.slope = -0.5});
  const auto d = split_picard_diff(u0, nullptr, 1e-3, 1, small_cfg());
  EXPECT_GT(d.report.p0_tilde_linf_l2, 0.0);
  EXPECT_LE(d.report.e0_identity, 1e-12);
  EXPECT_TRUE(d.report.initial.pass());
  EXPECT_GT(d.report.ratio, 0.0);
}

TEST(SplitPicard, TrivialSplitLeavesNoDifference) {
  const auto u0 = random_field(g16, FieldKind::vector, 18);
  const auto d = split_picard_diff(u0, nullptr, 1e6, 1, small_cfg());
  EXPECT_EQ(d.report.p0_tilde_linf_l2, 0.0);
  EXPECT_LE(d.report.e_linf_l2, 1e-12 * linf_l2(heat_trajectory(u0, small_cfg().time_grid()), 1.0));
  EXPECT_THROW(split_picard_diff(u0, nullptr, 0.0, 1, small_cfg()), Error);
}
