#pragma once

#include <array>
#include <cstddef>

namespace bnslab {

/// Periodic cube [0,L)^3 sampled with n points per axis.
/// Linear mode/point index is (iz*n + iy)*n + ix, x fastest.
class GridSpec {
 public:
  GridSpec(int n_per_dim, double box_len);

  int n() const { return n_; }
  double box_len() const { return box_len_; }
  static constexpr int dim = 3;
  double freq_spacing() const { return kappa_; }
  int nyquist() const { return n_ / 2; }
  std::size_t points() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double cell_volume() const;
  double volume() const { return box_len_ * box_len_ * box_len_; }

  /// First and last dyadic shell whose open annulus ]3/4 2^j, 8/3 2^j[ meets a nonzero lattice |xi|.
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }

  /// Signed lattice index of a 1-D position; the Nyquist index maps to -n/2.
  int wavenumber(int idx) const { return idx <= n_ / 2 - 1 ? idx : idx - n_; }
  /// Same, but zero at the Nyquist index (used by odd multipliers and projections).
  int deriv_wavenumber(int idx) const { return idx == n_ / 2 ? 0 : wavenumber(idx); }

  std::array<int, 3> mode_index(std::size_t m) const {
    const int ix = static_cast<int>(m % n_);
    const int iy = static_cast<int>((m / n_) % n_);
    const int iz = static_cast<int>(m / (static_cast<std::size_t>(n_) * n_));
    return {wavenumber(ix), wavenumber(iy), wavenumber(iz)};
  }
  std::array<int, 3> deriv_index(std::size_t m) const {
    const int ix = static_cast<int>(m % n_);
    const int iy = static_cast<int>((m / n_) % n_);
    const int iz = static_cast<int>(m / (static_cast<std::size_t>(n_) * n_));
    return {deriv_wavenumber(ix), deriv_wavenumber(iy), deriv_wavenumber(iz)};
  }
  /// Integer |k|^2 of mode m (full lattice, Nyquist included).
  int k2(std::size_t m) const {
    const auto k = mode_index(m);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  }
  /// |xi|^2 = kappa^2 |k|^2.
  double xi2(std::size_t m) const { return kappa_ * kappa_ * k2(m); }

  /// Retained by the two-thirds rule: every |k_i| <= n/3.
  bool dealias_keep(std::size_t m) const {
    const auto k = mode_index(m);
    const int c = n_ / 3;
    return iabs(k[0]) <= c && iabs(k[1]) <= c && iabs(k[2]) <= c;
  }

  GridSpec halved() const { return GridSpec(n_, box_len_ / 2); }

  bool operator==(const GridSpec& o) const { return n_ == o.n_ && box_len_ == o.box_len_; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

 private:
  static int iabs(int v) { return v < 0 ? -v : v; }
  int n_;
  double box_len_;
  double kappa_;
  int j_min_ = 0;
  int j_max_ = 0;
};

}  // namespace bnslab
