#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bnslab/littlewood_paley.hpp"
#include "bnslab/trajectory.hpp"

namespace bnslab {

/// One inequality of a certificate: measured <= bound (up to rounding slack).
struct SplitCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SplitCertificate {
  std::string lemma_id;
  std::vector<std::pair<std::string, double>> params;
  std::vector<SplitCheck> checks;

  bool pass() const;
  /// Adds measured <= bound with relative slack `rel` (and absolute slack rel * bound floor).
  void check(const std::string& name, double measured, double bound, double rel = 1e-12);
  void param(const std::string& name, double value) { params.emplace_back(name, value); }
  /// Appends another certificate's checks with a name prefix.
  void absorb(const SplitCertificate& other, const std::string& prefix);
  const SplitCheck* find(const std::string& name) const;
};

// ---- sequence-space splittings -------------------------------------------------------------

struct HorizontalSplit {
  DyadicSequence f;  // in l^{s0}_1 L^p
  DyadicSequence g;  // in l^{s1}_1 L^p
  int kappa = 0;
  SplitCertificate certificate;
};

/// Cuts at kappa = floor(log2 K): the piece whose target regularity is below s keeps the
/// shells j > kappa, the other keeps j <= kappa.
HorizontalSplit horizontal_split(const DyadicSequence& seq, double p, double s, double s0, double s1, double K);

/// Source (sigma, p, q) on the open segment from (s_tilde, p_tilde, q_tilde) to (s_bar, p_bar, q_bar),
/// compared in the coordinates (s, 1/p, 1/q).
struct DiagonalParams {
  double sigma = 0.0, p = 2.0, q = 1.0;
  double s_tilde = 0.0, p_tilde = 1.0, q_tilde = 1.0;
  double s_bar = 0.0, p_bar = 4.0, q_bar = 1.0;

  /// Throws unless p_tilde < p < p_bar and the three points are colinear (residual <= 1e-12).
  void validate() const;
  double theta() const;
  /// q / q_tilde, with 1 when the two coincide (including both infinite).
  double q_ratio_tilde() const;
};

struct DiagonalSplit {
  DyadicSequence g_tilde;  // large amplitudes
  DyadicSequence g_bar;    // small amplitudes
  std::vector<double> thresholds;  // per shell, inf where the shell vanishes
  SplitCertificate certificate;
};

/// Per-shell pointwise threshold |g_j| > c N lambda_j ||g_j||_p. Equal summabilities give
/// lambda_j^{1 - p/p_tilde} = 2^{j (sigma - s_tilde)} and c = 1.
DiagonalSplit diagonal_split(const DyadicSequence& seq, const DiagonalParams& params, double N);

struct NondiagonalParams {
  double s = 0.0, p = 2.0;
  double s_tilde = 0.0, p_tilde = 1.0;
  double s_bar = 0.0, p_bar = 4.0;
  double s0 = 0.0;

  /// (s1, 1/p) on the segment joining (s_tilde, 1/p_tilde) and (s_bar, 1/p_bar).
  double s1() const;
  void validate() const;
};

struct NondiagonalSplit {
  DyadicSequence f, g_tilde, g_bar;
  SplitCertificate certificate;
};

/// Horizontal cut at K, then the diagonal threshold at N with sigma = s1 and q = 1.
NondiagonalSplit nondiagonal_split(const DyadicSequence& seq, const NondiagonalParams& params, double K, double N);

// ---- Besov-space splitting -----------------------------------------------------------------

struct BesovSplitParams {
  double s = 0.0, p = 2.0;
  double s_tilde = 0.0, p_tilde = 1.0;
  double s_bar = 0.0, p_bar = 4.0;
  double s0 = 0.0, s1 = 0.0;  // derived

  /// Checks that (s_bar, 1/p_bar) lies inside the open triangle bounded by the line alpha through
  /// (s, 1/p) and (s_tilde, 1/p_tilde), the Sobolev line beta of slope 1/3 through (s, 1/p), and 1/p = 0.
  static BesovSplitParams make(double s, double p, double s_tilde, double p_tilde, double s_bar, double p_bar);
  NondiagonalParams nondiagonal() const { return {s, p, s_tilde, p_tilde, s_bar, p_bar, s0}; }
  double K(double N) const;
  /// Predicted N-powers of the two target norms.
  double tilde_exponent() const;
  double bar_exponent() const;
};

struct BesovSplit {
  SpectralField u_tilde;
  SpectralField u_bar;
  double K = 0.0;
  SplitCertificate certificate;
};

BesovSplit besov_split(const SpectralField& u, const BesovSplitParams& params, double N);

/// Exponents of the critical initial-data split for a given p > 3:
/// p_tilde = 2, s_tilde = 0, p_bar = p2 = 2p, s_bar = (s_{2p} + s_dot) / 2.
struct InitialDataParams {
  double p = 6.0;
  double s_p = 0.0, p2 = 12.0, s_p2 = 0.0;
  double s_dot = 0.0, s_bar = 0.0, s0 = 0.0, s1 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, delta2 = 0.0;

  static InitialDataParams of(double p);
  BesovSplitParams besov() const;
};

struct InitialDataSplit {
  SpectralField u_tilde;  // finite energy part
  SpectralField u_bar;    // subcritical part
  InitialDataParams params;
  SplitCertificate certificate;
};

/// Besov split followed by Leray projection of both pieces.
InitialDataSplit split_initial_data(const SpectralField& u0, double p, double N);

// ---- forcing splitting ---------------------------------------------------------------------

/// sigma = s_p' = -2 + 3/p, s_tilde = -7/12, p_tilde = 2, p_bar = p3 = 2p, s_bar on the line through
/// (sigma, 1/p) and (s_tilde, 1/2); all summabilities infinite.
struct ForcingSplitParams {
  double p = 6.0;
  double sigma = 0.0, s_tilde = -7.0 / 12.0, p_tilde = 2.0;
  double p_bar = 12.0, s_bar = 0.0, delta3 = 0.0;

  static ForcingSplitParams of(double p);
  /// lambda_j for the dyadic time block labelled j (rescaled horizon 2).
  double lambda(int j) const;
};

struct ForcingSplit {
  Trajectory F_tilde;
  Trajectory F_bar;
  ForcingSplitParams params;
  SplitCertificate certificate;
};

/// Time-dyadic amplitude split of a tensor forcing on its own time grid. Block b of the grid is
/// labelled j = b - octaves after the time rescaling t -> 2t/T; block 0 holds every j <= -octaves.
ForcingSplit split_forcing(const Trajectory& F, double p, double N);

// ---- implementation constants --------------------------------------------------------------

/// Operator bounds of the co-retraction, Bernstein embedding and Leray projection on a grid,
/// from L^r norms of periodic shell kernels (discrete Young inequality).
class SplitConstants {
 public:
  explicit SplitConstants(const GridSpec& grid);
  /// ||S seq||_{B^s_{p,1}} <= ell1(s) ||seq||_{l^s_1 L^p}.
  double ell1(double s) const;
  /// ||S seq||_{B^s_{p,inf}} <= ellinf(s) ||seq||_{l^s_inf L^p}.
  double ellinf(double s) const;
  /// ||S seq||_{B^{s_bar}_{p_bar,1}} <= embedding(...) ||seq||_{l^{s0}_1 L^p}.
  double embedding(double s_bar, double s0, double p, double p_bar) const;
  /// ||P u||_{B^s_{p,q}} <= leray() ||u||_{B^s_{p,q}}.
  double leray() const { return leray_; }

 private:
  double kernel_norm(int k, int j, double r) const;

  GridSpec grid_;
  int j_min_, j_max_;
  std::vector<double> l1_;  // A_{kj} for |k - j| <= 2, row-major over k then d = j - k + 2
  double leray_ = 0.0;
};

const SplitConstants& split_constants(const GridSpec& grid);

}  // namespace bnslab
