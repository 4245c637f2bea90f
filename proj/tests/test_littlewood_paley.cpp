#include <gtest/gtest.h>

#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/littlewood_paley.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "test_util.hpp"

using namespace bnslab;
using namespace bnslab::testing;

namespace {

const GridSpec g32(32, kTwoPi);

SpectralField cos_x(const GridSpec& g, double amp = 1.0) {
  SpectralField f(g, FieldKind::scalar);
  f.component(0)[mode(g, 1, 0, 0)] = 0.5 * amp;
  f.component(0)[mode(g, -1, 0, 0)] = 0.5 * amp;
  return f;
}

}  // namespace

TEST(Partition, SumsToOneOnSeveralGrids) {
  for (const auto& g : {GridSpec(32, kTwoPi), GridSpec(16, 1.0), GridSpec(8, 3.0), GridSpec(64, kTwoPi)})
    EXPECT_LE(DyadicPartition(g).partition_residual(), 1e-10) << g.n() << " " << g.box_len();
}

TEST(Partition, ProfileSupportedOnAnnulus) {
  for (double r = 0.0; r <= 0.75; r += 0.01) EXPECT_EQ(DyadicPartition::profile(r), 0.0) << r;
  for (double r = 8.0 / 3.0; r < 10.0; r += 0.05) EXPECT_EQ(DyadicPartition::profile(r), 0.0) << r;
  for (double r = 0.8; r < 2.6; r += 0.01) EXPECT_GT(DyadicPartition::profile(r), 0.0) << r;
  EXPECT_EQ(DyadicPartition::cutoff(0.5), 1.0);
  EXPECT_EQ(DyadicPartition::cutoff(1.5), 0.0);
}

TEST(Partition, ShellsTwoApartAreDisjoint) {
  const DyadicPartition& part = dyadic_partition(g32);
  for (int j = part.j_min(); j + 2 <= part.j_max(); ++j) {
    const auto& a = part.table(j);
    const auto& b = part.table(j + 2);
    for (std::size_t m = 0; m < a.size(); ++m) ASSERT_EQ(a[m] * b[m], 0.0) << j;
  }
}

TEST(Partition, FaultInjectionBreaksResidual) {
  EXPECT_GT(DyadicPartition(g32, 1e-3).partition_residual(), 5e-4);
}

TEST(LpProject, SingleModePicksProfileValue) {
  const auto f = cos_x(g32);
  const auto d0 = lp_project(f, 0);
  const double phi1 = DyadicPartition::profile(1.0);
  EXPECT_GT(phi1, 0.0);
  EXPECT_NEAR(d0.component(0)[mode(g32, 1, 0, 0)].real(), 0.5 * phi1, 1e-15);
  EXPECT_EQ(max_coeff(lp_project(f, 5)), 0.0);
}

TEST(LpProject, ShellsSumToField) {
  const auto u = random_field(g32, FieldKind::vector, 3);
  SpectralField acc(g32, FieldKind::vector);
  for (int j = g32.j_min(); j <= g32.j_max(); ++j) acc = axpy(1.0, lp_project(u, j), acc);
  EXPECT_LE(relative_l2_error(acc, u), 1e-12);
}

TEST(LpProject, RejectsUnresolvableShell) {
  EXPECT_THROW(lp_project(cos_x(g32), g32.j_max() + 3), Error);
  EXPECT_THROW(lp_project(cos_x(g32), g32.j_min() - 3), Error);
}

TEST(Besov, UnitShellFieldLiesBetweenThirdAndOne) {
  for (double p : {2.0, 4.0, inf}) {
    auto f = cos_x(g32);
    f = scaled(f, 1.0 / sampled_lp(f.to_physical(), p));
    const double v = besov_norm(f, {0.0, p, inf}).value;
    EXPECT_GE(v, 1.0 / 3.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(Besov, ZeroFieldHasZeroNorm) {
  EXPECT_EQ(besov_norm(SpectralField(g32, FieldKind::vector), BesovIndex::critical(6)).value, 0.0);
}

TEST(Besov, CriticalNormInvariantUnderDyadicRescaling) {
  const auto u = random_field(g32, FieldKind::vector, 5);
  for (double p : {2.0, 4.0, 6.0})
    for (double q : {2.0, inf}) {
      const double a = besov_norm(u, BesovIndex::critical(p, q)).value;
      const double b = besov_norm(rescale_dyadic(u), BesovIndex::critical(p, q)).value;
      EXPECT_NEAR(b, a, 1e-12 * a) << p << " " << q;
    }
}

TEST(Besov, DecreasesInSummability) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto u = random_field(g32, FieldKind::vector, seed, {.slope = -1.0});
    const double n1 = besov_norm(u, {-0.5, 6.0, 1.0}).value;
    const double n2 = besov_norm(u, {-0.5, 6.0, 2.0}).value;
    const double ni = besov_norm(u, {-0.5, 6.0, inf}).value;
    EXPECT_GE(n1, n2);
    EXPECT_GE(n2, ni);
  }
}

TEST(Besov, L2SquareSumBracketsEnergy) {
  // sum_j phi_j^2 lies in [1/2, 1] because at most two profiles overlap and they sum to one.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto u = random_field(g32, FieldKind::vector, seed, {.slope = -0.8});
    const double b = besov_norm(u, {0.0, 2.0, 2.0}).value;
    const double l2 = sampled_lp(u.to_physical(), 2.0);
    EXPECT_LE(b, l2 * (1 + 1e-12));
    EXPECT_GE(b, l2 / std::sqrt(2.0) * (1 - 1e-12));
  }
}

TEST(Besov, AggregateMatchesHandSum) {
  const auto u = random_field(g32, FieldKind::vector, 8);
  const auto shells = shell_norms(u, 4.0);
  double sum = 0.0, sup = 0.0;
  for (const auto& sh : shells) {
    EXPECT_NEAR(sh.norm, sampled_lp(lp_project(u, sh.j).to_physical(), 4.0), 1e-12 * (sh.norm + 1e-300));
    sum += std::pow(2.0, -0.25 * sh.j) * sh.norm;
    sup = std::max(sup, std::pow(2.0, -0.25 * sh.j) * sh.norm);
  }
  EXPECT_NEAR(aggregate(shells, -0.25, 1.0), sum, 1e-13 * sum);
  EXPECT_NEAR(aggregate(shells, -0.25, inf), sup, 1e-13 * sup);
}

TEST(Retraction, CoretractionInvertsIt) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto u = random_field(g32, FieldKind::vector, seed);
    EXPECT_LE(relative_l2_error(coretraction(retraction(u)), u), 1e-12);
  }
}

TEST(Retraction, ZeroFieldGivesZeroSequence) {
  const auto seq = retraction(SpectralField(g32, FieldKind::vector));
  for (const auto& piece : seq.pieces)
    for (double x : piece.data()) ASSERT_EQ(x, 0.0);
}

TEST(Retraction, SingleModeOccupiesAdjacentShells) {
  const auto seq = retraction(cos_x(g32));
  for (int j = seq.j_min; j <= seq.j_max(); ++j) {
    const double n = sampled_lp(seq.at(j), 2.0);
    if (j < -1 || j > 1) {
      EXPECT_EQ(n, 0.0) << j;
    }
  }
  EXPECT_GT(sampled_lp(seq.at(0), 2.0), 0.0);
}

TEST(Retraction, CoretractionOfOnePieceStaysInFattenedShell) {
  auto seq = DyadicSequence::zeros(g32, FieldKind::vector, g32.j_min(), g32.j_max());
  seq.at(2) = random_field(g32, FieldKind::vector, 4, {.k_max = 15, .leray = false}).to_physical();
  const auto out = coretraction(seq);
  const double lo = 0.75 * 2.0, hi = 8.0 / 3.0 * 8.0;
  double outside = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t m = 0; m < g32.points(); ++m) {
      const double r = std::sqrt(g32.xi2(m));
      if (r <= lo || r >= hi) {
        outside = std::max(outside, std::abs(out.component(c)[m]));
      }
    }
  EXPECT_EQ(outside, 0.0);
  EXPECT_GT(max_coeff(out), 0.0);
}

TEST(Retraction, SequenceNormMatchesPieceSums) {
  const auto seq = retraction(random_field(g32, FieldKind::vector, 6));
  double ref = 0.0;
  for (int j = seq.j_min; j <= seq.j_max(); ++j) ref += std::pow(2.0, 0.5 * j) * sampled_lp(seq.at(j), 3.0);
  EXPECT_NEAR(sequence_norm(seq, 0.5, 3.0, 1.0), ref, 1e-12 * ref);
}

TEST(HeatBesov, ZeroField) { EXPECT_EQ(heat_besov_norm(SpectralField(g32, FieldKind::vector), -0.5, 6.0), 0.0); }

TEST(HeatBesov, SingleModeAttainsClosedFormOptimum) {
  // sup_t t^{1/4} e^{-t} = (1/4)^{1/4} e^{-1/4}.
  const double exact = std::pow(0.25, 0.25) * std::exp(-0.25);
  EXPECT_NEAR(heat_besov_norm(cos_x(g32), -0.5, inf), exact, 1e-3);
  const double fine = heat_besov_norm(cos_x(g32), -0.5, inf, 1024);
  EXPECT_LE(fine, exact * (1 + 1e-12));
  EXPECT_NEAR(fine, exact, 1e-5);
}

TEST(HeatBesov, RejectsNonnegativeRegularity) {
  EXPECT_THROW(heat_besov_norm(cos_x(g32), 0.0, 2.0), Error);
  EXPECT_THROW(heat_besov_norm(cos_x(g32), 0.3, 2.0), Error);
}

TEST(HeatBesov, RatioToBesovStaysInNarrowBand) {
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto u = random_field(g32, FieldKind::vector, seed);
    const double r = heat_besov_norm(u, -0.5, 6.0) / besov_norm(u, BesovIndex::critical(6.0)).value;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 3.0);
}
