#include <gtest/gtest.h>

#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/harness.hpp"
#include "bnslab/random_fields.hpp"
#include "bnslab/spectral_ops.hpp"
#include "bnslab/splitting.hpp"
#include "test_util.hpp"

using namespace bnslab;
using namespace bnslab::testing;

namespace {

const GridSpec g16(16, kTwoPi);
const GridSpec g32(32, kTwoPi);

// Random pieces on an arbitrary shell range; amplitudes vary over several decades.
DyadicSequence random_sequence(const GridSpec& g, int j_min, int j_max, std::uint64_t seed) {
  auto seq = DyadicSequence::zeros(g, FieldKind::vector, j_min, j_max);
  for (int j = j_min; j <= j_max; ++j) {
    const double amp = std::exp(std::sin(1.7 * j + seed) * 3.0);
    seq.at(j) = random_field(g, FieldKind::vector, seed * 1000 + static_cast<std::uint64_t>(j + 100),
                             {.slope = -1.0, .leray = false, .l2_norm = amp})
                    .to_physical();
  }
  return seq;
}

bool all_zero(const DyadicSequence& s) {
  for (const auto& piece : s.pieces)
    for (double x : piece.data())
      if (x != 0.0) return false;
  return true;
}

bool pieces_sum_to(const std::vector<const DyadicSequence*>& parts, const DyadicSequence& seq) {
  for (std::size_t i = 0; i < seq.pieces.size(); ++i)
    for (std::size_t x = 0; x < seq.pieces[i].data().size(); ++x) {
      double acc = 0.0;
      for (const auto* p : parts) acc += p->pieces[i].data()[x];
      if (acc != seq.pieces[i].data()[x]) return false;
    }
  return true;
}

// sum_j 2^{js} ||seq_j||_p, or the sup for q = inf, from sampled norms.
double ell_norm(const DyadicSequence& seq, double s, double p, double q) {
  double acc = 0.0;
  for (int j = seq.j_min; j <= seq.j_max(); ++j) {
    const double v = std::pow(2.0, j * s) * sampled_lp(seq.at(j), p);
    acc = std::isinf(q) ? std::max(acc, v) : acc + std::pow(v, q);
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

const DiagonalParams kEqualQ{0.0, 4.0, inf, 0.3, 2.0, inf, -0.15, 8.0, inf};

}  // namespace

TEST(HorizontalSplit, SingleLowShellStaysInHighRegularityPiece) {
  auto seq = DyadicSequence::zeros(g16, FieldKind::vector, -1, 4);
  seq.at(0) = random_field(g16, FieldKind::vector, 1).to_physical();
  const auto a = horizontal_split(seq, 4.0, 0.0, -0.5, 0.5, 2.0);
  EXPECT_EQ(a.kappa, 1);
  EXPECT_TRUE(all_zero(a.f));
  EXPECT_EQ(a.g.at(0).data(), seq.at(0).data());
  const auto b = horizontal_split(seq, 4.0, 0.0, -0.5, 0.5, 0.5);
  EXPECT_EQ(b.kappa, -1);
  EXPECT_TRUE(all_zero(b.g));
  EXPECT_EQ(b.f.at(0).data(), seq.at(0).data());
}

TEST(HorizontalSplit, BoundsHoldOnTwentyShellSequences) {
  const double p = 3.0, s = -0.2, s0 = -0.7, s1 = 0.4;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto seq = random_sequence(g16, -5, 14, seed);
    for (double K : {0.3, 1.0, 8.0, 100.0}) {
      const auto h = horizontal_split(seq, p, s, s0, s1, K);
      EXPECT_TRUE(h.certificate.pass());
      EXPECT_TRUE(pieces_sum_to({&h.f, &h.g}, seq));
      const double sup = ell_norm(seq, s, p, inf);
      const double bound_f = std::pow(K, s0 - s) / (1.0 - std::pow(2.0, s0 - s)) * sup;
      const double bound_g = std::pow(K, s1 - s) / (1.0 - std::pow(2.0, s - s1)) * sup;
      EXPECT_LE(ell_norm(h.f, s0, p, 1.0), bound_f * (1 + 1e-12)) << K;
      EXPECT_LE(ell_norm(h.g, s1, p, 1.0), bound_g * (1 + 1e-12)) << K;
      EXPECT_LE(ell_norm(h.f, s, p, inf), sup);
      EXPECT_LE(ell_norm(h.g, s, p, inf), sup);
    }
  }
}

TEST(HorizontalSplit, RejectsRegularityOutsideTheBracket) {
  const auto seq = random_sequence(g16, -1, 3, 2);
  EXPECT_THROW(horizontal_split(seq, 4.0, 1.0, -0.5, 0.5, 2.0), Error);
  EXPECT_THROW(horizontal_split(seq, 4.0, 0.0, 0.0, 0.5, 2.0), Error);
  EXPECT_THROW(horizontal_split(seq, 4.0, 0.0, -0.5, 0.5, 0.0), Error);
}

TEST(DiagonalSplit, ExtremeLevelsSendEverythingToOneSide) {
  const auto seq = random_sequence(g16, -2, 5, 3);
  const auto big = diagonal_split(seq, kEqualQ, 1e12);
  EXPECT_TRUE(all_zero(big.g_tilde));
  EXPECT_TRUE(pieces_sum_to({&big.g_bar}, seq));
  const auto tiny = diagonal_split(seq, kEqualQ, 1e-12);
  EXPECT_TRUE(all_zero(tiny.g_bar));
  EXPECT_TRUE(pieces_sum_to({&tiny.g_tilde}, seq));
}

TEST(DiagonalSplit, ShellwiseChebyshevBoundsWithEqualSummability) {
  const auto& P = kEqualQ;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto seq = random_sequence(g16, -3, 8, seed);
    const double N = std::pow(10.0, -1.0 + 0.15 * seed);
    const auto d = diagonal_split(seq, P, N);
    EXPECT_TRUE(d.certificate.pass()) << seed;
    EXPECT_TRUE(pieces_sum_to({&d.g_tilde, &d.g_bar}, seq));
    for (int j = seq.j_min; j <= seq.j_max(); ++j) {
      const double src = std::pow(2.0, j * P.sigma) * sampled_lp(seq.at(j), P.p);
      const double t = std::pow(2.0, j * P.s_tilde) * sampled_lp(d.g_tilde.at(j), P.p_tilde);
      const double b = std::pow(2.0, j * P.s_bar) * sampled_lp(d.g_bar.at(j), P.p_bar);
      EXPECT_LE(t, std::pow(N, 1.0 - P.p / P.p_tilde) * src * (1 + 1e-10)) << seed << " " << j;
      EXPECT_LE(b, std::pow(N, 1.0 - P.p / P.p_bar) * src * (1 + 1e-10)) << seed << " " << j;
      EXPECT_LE(sampled_lp(d.g_tilde.at(j), P.p), sampled_lp(seq.at(j), P.p));
      EXPECT_LE(sampled_lp(d.g_bar.at(j), P.p), sampled_lp(seq.at(j), P.p));
    }
  }
}

TEST(DiagonalSplit, GeneralFiniteSummability) {
  // theta = 1/3: 1/2 = (1/3)(1) + (2/3)(1/4).
  const DiagonalParams P{0.0, 4.0, 2.0, 0.3, 2.0, 1.0, -0.15, 8.0, 4.0};
  EXPECT_NO_THROW(P.validate());
  EXPECT_NEAR(P.theta(), 1.0 / 3.0, 1e-15);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto seq = random_sequence(g16, -2, 6, seed);
    const auto d = diagonal_split(seq, P, 0.5 + seed);
    EXPECT_TRUE(d.certificate.pass()) << seed;
    EXPECT_TRUE(pieces_sum_to({&d.g_tilde, &d.g_bar}, seq));
  }
}

TEST(DiagonalSplit, RejectsOffSegmentParameters) {
  DiagonalParams P = kEqualQ;
  P.sigma = 0.1;
  try {
    P.validate();
    FAIL() << "expected colinearity violation";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("residuals"), std::string::npos);
  }
  DiagonalParams Q = kEqualQ;
  Q.p = 1.5;
  EXPECT_THROW(Q.validate(), Error);
  DiagonalParams mixed = kEqualQ;
  mixed.q_tilde = 1.0;
  EXPECT_THROW(mixed.q_ratio_tilde(), Error);
}

TEST(NondiagonalSplit, ZeroSequenceGivesZeroPieces) {
  const NondiagonalParams P{0.0, 4.0, 0.5, 2.0, -0.3, 8.0, 0.2};
  const auto seq = DyadicSequence::zeros(g16, FieldKind::vector, -1, 4);
  const auto d = nondiagonal_split(seq, P, 4.0, 2.0);
  EXPECT_TRUE(all_zero(d.f));
  EXPECT_TRUE(all_zero(d.g_tilde));
  EXPECT_TRUE(all_zero(d.g_bar));
  EXPECT_TRUE(d.certificate.pass());
}

TEST(NondiagonalSplit, RandomSequencesSatisfyAllBounds) {
  const NondiagonalParams P{0.0, 4.0, 0.5, 2.0, -0.3, 8.0, 0.2};
  EXPECT_NEAR(P.s1(), (1.0 / 3.0) * 0.5 + (2.0 / 3.0) * -0.3, 1e-15);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto seq = random_sequence(g16, -4, 10, seed);
    const auto d = nondiagonal_split(seq, P, 0.5 * seed, 0.3 * seed);
    EXPECT_TRUE(d.certificate.pass()) << seed;
    EXPECT_TRUE(pieces_sum_to({&d.f, &d.g_tilde, &d.g_bar}, seq));
  }
}

TEST(NondiagonalSplit, SingleShellLandsInExactlyOnePartOfTheCut) {
  const NondiagonalParams P{0.0, 4.0, 0.5, 2.0, -0.3, 8.0, 0.2};
  auto seq = DyadicSequence::zeros(g16, FieldKind::vector, -1, 4);
  seq.at(2) = random_field(g16, FieldKind::vector, 5).to_physical();
  for (double K : {1.0, 16.0}) {
    const auto d = nondiagonal_split(seq, P, K, 1.0);
    const bool f_has = !all_zero(d.f);
    const bool g_has = !all_zero(d.g_tilde) || !all_zero(d.g_bar);
    EXPECT_NE(f_has, g_has) << K;
  }
}

TEST(BesovSplit, ZeroFieldAndReconstruction) {
  const auto P = InitialDataParams::of(6.0).besov();
  const auto z = besov_split(SpectralField(g32, FieldKind::vector), P, 2.0);
  EXPECT_EQ(max_coeff(z.u_tilde), 0.0);
  EXPECT_EQ(max_coeff(z.u_bar), 0.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto u = random_field(g32, FieldKind::vector, seed, {.slope = -0.3});
    const auto b = besov_split(u, P, 1e-2);
    EXPECT_TRUE(b.certificate.pass());
    EXPECT_LE(relative_l2_error(axpy(1.0, b.u_tilde, b.u_bar), u), 1e-10);
  }
}

TEST(BesovSplit, ExponentsBalanceTheTwoBarTerms) {
  const auto P = InitialDataParams::of(6.0).besov();
  // K = N^e with e (s0 - s) = e (s1 - s) + 1 - p / p_bar.
  const double e = (1.0 - P.p / P.p_bar) / (P.s0 - P.s1);
  EXPECT_NEAR(std::log(P.K(10.0)) / std::log(10.0), e, 1e-12);
  EXPECT_NEAR(e, 40.0 / 9.0, 1e-12);
  EXPECT_NEAR(P.bar_exponent(), e * (P.s0 - P.s), 1e-12);
  EXPECT_NEAR(P.tilde_exponent(), e * (P.s1 - P.s) + 1.0 - P.p / P.p_tilde, 1e-12);
}

TEST(BesovSplit, RejectsTargetsOutsideAdmissibleTriangle) {
  EXPECT_THROW(BesovSplitParams::make(-0.5, 6.0, 0.0, 2.0, 0.5, 12.0), Error);
  EXPECT_THROW(BesovSplitParams::make(-0.5, 6.0, 0.0, 2.0, -0.6, 4.0), Error);
}

TEST(InitialDataSplit, ExponentsAtPSix) {
  const auto d = InitialDataParams::of(6.0);
  EXPECT_DOUBLE_EQ(d.s_p, -0.5);
  EXPECT_DOUBLE_EQ(d.p2, 12.0);
  EXPECT_NEAR(d.s_dot, -5.0 / 8.0, 1e-15);
  EXPECT_NEAR(d.s_bar, -11.0 / 16.0, 1e-15);
  EXPECT_NEAR(d.s0, -7.0 / 16.0, 1e-15);
  EXPECT_NEAR(d.s1, -11.0 / 20.0, 1e-15);
  EXPECT_NEAR(d.gamma1, 5.0 / 18.0, 1e-12);
  EXPECT_NEAR(d.gamma2, 20.0 / 9.0, 1e-12);
  EXPECT_NEAR(d.delta2, 1.0 / 16.0, 1e-15);
}

TEST(InitialDataSplit, ZeroDataAndInvalidInput) {
  SpectralField z(g32, FieldKind::vector);
  const auto s = split_initial_data(z, 6.0, 1.0);
  EXPECT_EQ(max_coeff(s.u_tilde), 0.0);
  EXPECT_EQ(max_coeff(s.u_bar), 0.0);
  EXPECT_THROW(split_initial_data(z, 3.0, 1.0), Error);
  EXPECT_THROW(split_initial_data(random_field(g32, FieldKind::vector, 1, {.leray = false}), 6.0, 1.0), Error);
}

TEST(InitialDataSplit, PiecesAreDivergenceFreeAndCertified) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto u0 = random_field(g32, FieldKind::vector, seed, {.slope = -0.3});
    const auto s = split_initial_data(u0, 6.0, 1e-3);
    EXPECT_TRUE(s.certificate.pass());
    EXPECT_TRUE(s.u_tilde.divergence_free());
    EXPECT_TRUE(s.u_bar.divergence_free());
    EXPECT_LE(s.u_tilde.max_divergence(), 1e-12 * (max_coeff(s.u_tilde) + 1e-300));
    EXPECT_LE(relative_l2_error(axpy(1.0, s.u_tilde, s.u_bar), u0), 1e-10);
  }
}

TEST(ForcingSplit, ExponentsAtPSix) {
  const auto f = ForcingSplitParams::of(6.0);
  EXPECT_DOUBLE_EQ(f.sigma, -1.5);
  EXPECT_NEAR(f.s_bar, -1.5 - 11.0 / 48.0, 1e-14);
  EXPECT_NEAR(f.delta3, 1.0 / 48.0, 1e-14);
  EXPECT_DOUBLE_EQ(f.p_bar, 12.0);
}

TEST(ForcingSplit, ZeroForcing) {
  const auto F = constant_trajectory(SpectralField(g16, FieldKind::tensor), TimeGrid(1.0, 4, 3));
  const auto s = split_forcing(F, 6.0, 1.0);
  for (std::size_t i = 0; i < F.size(); ++i) {
    EXPECT_EQ(max_coeff(s.F_tilde.field(i)), 0.0);
    EXPECT_EQ(max_coeff(s.F_bar.field(i)), 0.0);
  }
  EXPECT_TRUE(s.certificate.pass());
}

TEST(ForcingSplit, RandomForcingIsCertified) {
  const TimeGrid tg(1.0, 4, 4);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto F = seeded_forcing(g16, tg, seed, 1.0);
    for (double N : {1e-3, 1.0}) {
      const auto s = split_forcing(F, 6.0, N);
      EXPECT_TRUE(s.certificate.pass()) << seed << " " << N;
      EXPECT_LE(relative_error(axpy(1.0, s.F_tilde, s.F_bar), F), 1e-14);
    }
  }
}

TEST(ForcingSplit, RejectsFreeFormTimes) {
  Trajectory F(g16, FieldKind::tensor, std::vector<double>{0.25, 0.5, 1.0}, 1.0);
  EXPECT_THROW(split_forcing(F, 6.0, 1.0), Error);
}

TEST(SplitConstants, CoretractionAndLerayBoundsHold) {
  const auto& sc = split_constants(g32);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto seq = random_sequence(g32, g32.j_min(), g32.j_max(), seed);
    const auto S = coretraction(seq);
    for (double s : {0.0, -0.5})
      for (double p : {2.0, 6.0}) {
        EXPECT_LE(besov_norm(S, {s, p, 1.0}).value, sc.ell1(s) * ell_norm(seq, s, p, 1.0) * (1 + 1e-12));
        EXPECT_LE(besov_norm(S, {s, p, inf}).value, sc.ellinf(s) * ell_norm(seq, s, p, inf) * (1 + 1e-12));
      }
    const double s_bar = -11.0 / 16.0, s0 = s_bar + 3.0 / 6.0 - 3.0 / 12.0;
    EXPECT_LE(besov_norm(S, {s_bar, 12.0, 1.0}).value,
              sc.embedding(s_bar, s0, 6.0, 12.0) * ell_norm(seq, s0, 6.0, 1.0) * (1 + 1e-12));
    const auto u = random_field(g32, FieldKind::vector, seed, {.leray = false});
    EXPECT_LE(besov_norm(leray_project(u), {-0.5, 6.0, inf}).value,
              sc.leray() * besov_norm(u, {-0.5, 6.0, inf}).value * (1 + 1e-12));
  }
  EXPECT_THROW(sc.embedding(-0.5, 0.0, 6.0, 4.0), Error);
}
