#include "bnslab/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "bnslab/error.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

Trajectory::Trajectory(const GridSpec& grid, FieldKind kind, const TimeGrid& tgrid)
    : grid_(grid),
      kind_(kind),
      horizon_(tgrid.horizon()),
      times_(tgrid.times()),
      fields_(tgrid.size(), SpectralField(grid, kind)),
      tgrid_(std::make_shared<const TimeGrid>(tgrid)) {}

Trajectory::Trajectory(const GridSpec& grid, FieldKind kind, std::vector<double> times, double horizon)
    : grid_(grid), kind_(kind), horizon_(horizon), times_(std::move(times)), fields_(times_.size(), SpectralField(grid, kind)) {
  if (times_.empty()) throw Error("trajectory: at least one sample time is required");
  validate();
}

const TimeGrid& Trajectory::time_grid() const {
  if (!tgrid_) throw Error("trajectory: operation needs a dyadic time grid (free-form sample times given)");
  return *tgrid_;
}

void Trajectory::validate() const {
  if (times_.size() != fields_.size()) throw Error("trajectory: time count does not match field count");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > 0.0) || times_[i] > horizon_) throw Error("trajectory: sample time outside ]0, T]");
    if (i > 0 && !(times_[i] > times_[i - 1])) throw Error("trajectory: sample times must be strictly increasing");
    if (fields_[i].grid() != grid_ || fields_[i].kind() != kind_)
      throw Error("trajectory: all fields must share grid and kind");
  }
}

bool Trajectory::divergence_free() const {
  return std::all_of(fields_.begin(), fields_.end(), [](const SpectralField& f) { return f.divergence_free(); });
}

Trajectory heat_trajectory(const SpectralField& u0, const TimeGrid& tgrid) {
  Trajectory out(u0.grid(), u0.kind(), tgrid);
  for (std::size_t i = 0; i < tgrid.size(); ++i) out.field(i) = heat_apply(u0, tgrid.time(i));
  return out;
}

Trajectory constant_trajectory(const SpectralField& f, const TimeGrid& tgrid) {
  Trajectory out(f.grid(), f.kind(), tgrid);
  for (auto& x : out.fields()) x = f;
  return out;
}

namespace {
void require_compatible(const Trajectory& x, const Trajectory& y) {
  if (x.grid() != y.grid() || x.kind() != y.kind()) throw Error("trajectory: grid or kind mismatch");
  if (x.times() != y.times()) throw Error("trajectory: time grids differ");
}
}  // namespace

Trajectory axpy(double a, const Trajectory& x, const Trajectory& y) {
  require_compatible(x, y);
  Trajectory out(y);
  for (std::size_t i = 0; i < y.size(); ++i) out.field(i) = axpy(a, x.field(i), y.field(i));
  return out;
}

Trajectory scaled(const Trajectory& x, double a) {
  Trajectory out(x);
  for (auto& f : out.fields()) f = scaled(f, a);
  return out;
}

Trajectory rescale_dyadic(const Trajectory& x, double amplitude) {
  const GridSpec half = x.grid().halved();
  if (x.has_time_grid()) {
    Trajectory out(half, x.kind(), x.time_grid().scaled(0.25));
    for (std::size_t i = 0; i < x.size(); ++i) out.field(i) = rescale_dyadic(x.field(i), amplitude);
    return out;
  }
  std::vector<double> t = x.times();
  for (auto& v : t) v *= 0.25;
  Trajectory out(half, x.kind(), t, x.horizon() * 0.25);
  for (std::size_t i = 0; i < x.size(); ++i) out.field(i) = rescale_dyadic(x.field(i), amplitude);
  return out;
}

double relative_error(const Trajectory& x, const Trajectory& y) {
  require_compatible(x, y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num = std::max(num, plancherel_l2(axpy(-1.0, y.field(i), x.field(i))));
    den = std::max(den, plancherel_l2(y.field(i)));
  }
  return den == 0.0 ? num : num / den;
}

}  // namespace bnslab
