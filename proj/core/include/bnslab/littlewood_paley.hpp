#pragma once

#include <limits>
#include <vector>

#include "bnslab/field.hpp"

namespace bnslab {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Regularity s, integrability p, summability q (p, q may be inf).
struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double q = inf;
  /// s_p = -1 + 3/p.
  static double critical_s(double p) { return -1.0 + 3.0 / p; }
  static BesovIndex critical(double p, double q = inf) { return {critical_s(p), p, q}; }
};

struct ShellNorm {
  int j;
  double norm;
};

struct BesovResult {
  double value = 0.0;
  std::vector<ShellNorm> shells;  // unweighted ||Delta_j f||_p
  int j_min = 0;
  int j_max = 0;
};

/// Smooth dyadic partition phi(r) = chi(r/2) - chi(r), chi = 1 on [0,3/4], 0 on [4/3,inf).
class DyadicPartition {
 public:
  /// `profile_defect` multiplies phi by (1 + defect); nonzero values exist only for fault injection.
  explicit DyadicPartition(const GridSpec& grid, double profile_defect = 0.0);

  static double cutoff(double r);
  static double profile(double r);

  const GridSpec& grid() const { return grid_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  /// phi(2^-j |xi|) over the lattice; j may be one shell outside the range (for Delta-tilde).
  const std::vector<double>& table(int j) const;
  /// max |sum_j phi(2^-j|xi|) - 1| over nonzero modes whose covering shells are all in range.
  double partition_residual() const;

 private:
  GridSpec grid_;
  int j_min_, j_max_;
  std::vector<std::vector<double>> tables_;  // j_min-1 .. j_max+1
};

/// Shared partition for a grid (built once, immutable).
const DyadicPartition& dyadic_partition(const GridSpec& grid);

/// Delta_j f.
SpectralField lp_project(const SpectralField& f, int j);
/// (j, ||Delta_j f||_p) for every resolvable j.
std::vector<ShellNorm> shell_norms(const SpectralField& f, double p);
/// l^q aggregation of 2^{js} ||Delta_j f||_p.
BesovResult besov_norm(const SpectralField& f, const BesovIndex& idx);
double aggregate(const std::vector<ShellNorm>& shells, double s, double q);

/// Physical-space pieces indexed by dyadic shell j_min .. j_min+size-1.
struct DyadicSequence {
  GridSpec grid;
  FieldKind kind;
  int j_min;
  std::vector<PhysicalField> pieces;

  int j_max() const { return j_min + static_cast<int>(pieces.size()) - 1; }
  PhysicalField& at(int j) { return pieces.at(j - j_min); }
  const PhysicalField& at(int j) const { return pieces.at(j - j_min); }
  static DyadicSequence zeros(const GridSpec& grid, FieldKind kind, int j_min, int j_max);
};

/// R f = (Delta_j f)_j.
DyadicSequence retraction(const SpectralField& f);
/// S seq = sum_j Delta-tilde_j seq_j, Delta-tilde_j = Delta_{j-1} + Delta_j + Delta_{j+1}.
SpectralField coretraction(const DyadicSequence& seq);
/// l^s_q L^p norm of a sequence.
double sequence_norm(const DyadicSequence& seq, double s, double p, double q);
std::vector<double> piece_norms(const DyadicSequence& seq, double p);

/// 64 log-spaced times from (2^-j_max/4)^2 to (2^-j_min*4)^2.
std::vector<double> heat_time_grid(const GridSpec& grid, int samples = 64);
/// max_t t^{-s/2} ||S(t) f||_p over heat_time_grid; s < 0.
double heat_besov_norm(const SpectralField& f, double s, double p, int samples = 64);

}  // namespace bnslab
