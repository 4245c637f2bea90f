#pragma once

#include <memory>
#include <vector>

#include "bnslab/field.hpp"
#include "bnslab/time_grid.hpp"

namespace bnslab {

/// Fields sampled at increasing times in ]0,T]. Trajectories built on a TimeGrid carry it and
/// support time quadrature; trajectories with free-form sample times support only sup-type norms.
class Trajectory {
 public:
  Trajectory(const GridSpec& grid, FieldKind kind, const TimeGrid& tgrid);
  Trajectory(const GridSpec& grid, FieldKind kind, std::vector<double> times, double horizon);

  const GridSpec& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  std::size_t size() const { return fields_.size(); }
  bool empty() const { return fields_.empty(); }
  double horizon() const { return horizon_; }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }

  SpectralField& field(std::size_t i) { return fields_[i]; }
  const SpectralField& field(std::size_t i) const { return fields_[i]; }
  std::vector<SpectralField>& fields() { return fields_; }
  const std::vector<SpectralField>& fields() const { return fields_; }

  bool has_time_grid() const { return static_cast<bool>(tgrid_); }
  /// Throws when the trajectory has free-form times.
  const TimeGrid& time_grid() const;

  /// Re-checks shared grid/kind and sorted times; throws on violation.
  void validate() const;
  /// True when every field is flagged divergence-free.
  bool divergence_free() const;

 private:
  GridSpec grid_;
  FieldKind kind_;
  double horizon_;
  std::vector<double> times_;
  std::vector<SpectralField> fields_;
  std::shared_ptr<const TimeGrid> tgrid_;
};

/// S(t) u0 at every node.
Trajectory heat_trajectory(const SpectralField& u0, const TimeGrid& tgrid);
/// Same field at every node.
Trajectory constant_trajectory(const SpectralField& f, const TimeGrid& tgrid);
/// a*x + y node by node.
Trajectory axpy(double a, const Trajectory& x, const Trajectory& y);
Trajectory scaled(const Trajectory& x, double a);
/// (x,t) -> (2x, 4t): times / 4, box / 2, amplitudes times `amplitude`.
Trajectory rescale_dyadic(const Trajectory& x, double amplitude);
/// max_i ||x_i - y_i||_2 / max_i ||y_i||_2.
double relative_error(const Trajectory& x, const Trajectory& y);

}  // namespace bnslab
