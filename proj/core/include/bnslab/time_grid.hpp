#pragma once

#include <cstddef>
#include <vector>

namespace bnslab {

/// Dyadic time blocks [0, T 2^-m], [T 2^-m, T 2^{1-m}], ..., [T/2, T] (m = octaves), each carrying
/// the same M Chebyshev (first-kind) interior nodes. Functions of t are represented by their
/// piecewise polynomial interpolants; all time integrals are exact for that interpolant.
class TimeGrid {
 public:
  TimeGrid(double horizon, int octaves, int nodes_per_block);

  double horizon() const { return horizon_; }
  int octaves() const { return octaves_; }
  int nodes_per_block() const { return m_; }
  int blocks() const { return octaves_ + 1; }
  double block_start(int b) const;
  double block_width(int b) const;
  double block_end(int b) const { return block_start(b) + block_width(b); }
  /// Block holding t in ]0, T]; boundaries belong to the earlier block.
  int block_containing(double t) const;

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  int block_of(std::size_t i) const { return static_cast<int>(i / m_); }

  /// Reference nodes in ]0,1[, ascending.
  const std::vector<double>& sigma() const { return sigma_; }
  /// Lagrange basis values l_m(s) on the reference nodes.
  std::vector<double> lagrange(double s) const;

  /// W_m = int_0^{s} exp(-z (s - r)) l_m(r) dr, for s in [0,1], z >= 0.
  std::vector<double> exp_weights(double s, double z) const;
  /// exp_weights for many z at one s; row r holds the M weights for zs[r].
  std::vector<double> exp_weights_batch(double s, const std::vector<double>& zs) const;

  /// Node weights w with sum_i w_i f(t_i) = int_0^{upto} of the interpolant of f.
  std::vector<double> integration_weights(double upto) const;
  /// int_0^{upto} of the interpolant of `values` (one per node).
  double integrate(const std::vector<double>& values, double upto) const;
  double integrate(const std::vector<double>& values) const { return integrate(values, horizon_); }
  /// int_0^{t_i} for every node.
  std::vector<double> cumulative(const std::vector<double>& values) const;
  /// Interpolant at arbitrary t in ]0,T].
  double interpolate(const std::vector<double>& values, double t) const;

  TimeGrid scaled(double factor) const { return TimeGrid(horizon_ * factor, octaves_, m_); }
  bool operator==(const TimeGrid& o) const {
    return horizon_ == o.horizon_ && octaves_ == o.octaves_ && m_ == o.m_;
  }

 private:
  std::vector<double> taylor_coefficients(double s) const;

  double horizon_;
  int octaves_;
  int m_;
  std::vector<double> sigma_;
  std::vector<double> bary_;
  std::vector<double> times_;
  std::vector<double> full_weights_;  // int_0^1 l_m
};

}  // namespace bnslab
