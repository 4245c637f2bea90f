#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

#include "bnslab/grid.hpp"

namespace bnslab {

using cplx = std::complex<double>;

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(Align)));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t(Align)); }
  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const { return true; }
  template <class U>
  bool operator!=(const AlignedAllocator<U, Align>&) const { return false; }
};

using CoeffVector = std::vector<cplx, AlignedAllocator<cplx>>;

/// Scalar (1 component), vector (3) or rank-2 tensor (9, row-major F_ij at 3*i+j).
enum class FieldKind { scalar = 1, vector = 3, tensor = 9 };

inline int components(FieldKind k) { return static_cast<int>(k); }
inline int rank_of(FieldKind k) { return k == FieldKind::scalar ? 0 : (k == FieldKind::vector ? 1 : 2); }

/// Real samples on the uniform grid, component-major, x fastest.
class PhysicalField {
 public:
  PhysicalField(const GridSpec& grid, FieldKind kind);

  const GridSpec& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  int components() const { return bnslab::components(kind_); }
  double* component(int c) { return data_.data() + static_cast<std::size_t>(c) * grid_.points(); }
  const double* component(int c) const { return data_.data() + static_cast<std::size_t>(c) * grid_.points(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Pointwise Euclidean (Frobenius) modulus.
  std::vector<double> modulus() const;

 private:
  GridSpec grid_;
  FieldKind kind_;
  std::vector<double> data_;
};

/// Fourier coefficients u_k with u(x) = sum_k u_k exp(i xi_k . x).
class SpectralField {
 public:
  SpectralField(const GridSpec& grid, FieldKind kind);

  static SpectralField from_physical(const PhysicalField& f);

  const GridSpec& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  int components() const { return bnslab::components(kind_); }
  int rank() const { return rank_of(kind_); }

  cplx* component(int c) { return coeffs_.data() + static_cast<std::size_t>(c) * grid_.points(); }
  const cplx* component(int c) const { return coeffs_.data() + static_cast<std::size_t>(c) * grid_.points(); }
  CoeffVector& coeffs() { return coeffs_; }
  const CoeffVector& coeffs() const { return coeffs_; }

  bool real_valued() const { return real_valued_; }
  bool divergence_free() const { return divergence_free_; }
  void set_real_valued(bool v) { real_valued_ = v; }
  void set_divergence_free(bool v) { divergence_free_ = v; }

  /// Real part of the inverse transform. Throws unless real_valued.
  PhysicalField to_physical() const;
  /// Full complex inverse transform, component-major.
  CoeffVector to_physical_complex() const;

  /// max over modes of |xi_hat . u(xi)| / ||u||_l2 (vector fields only).
  double max_divergence() const;
  /// max |Im u(x)| / max |u(x)| of the inverse transform.
  double imaginary_ratio() const;
  /// Coefficient l2 norm sqrt(sum |u_k|^2).
  double coeff_norm() const;

 private:
  GridSpec grid_;
  FieldKind kind_;
  CoeffVector coeffs_;
  bool real_valued_ = true;
  bool divergence_free_ = false;
};

}  // namespace bnslab
