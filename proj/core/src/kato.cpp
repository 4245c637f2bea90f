#include "bnslab/kato.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "bnslab/error.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

double kato_norm(const Trajectory& traj, const KatoIndex& idx) {
  if (traj.empty()) throw Error("kato_norm: empty trajectory");
  double best = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    best = std::max(best, std::pow(traj.time(i), -idx.s / 2.0) * lp_norm(traj.field(i), idx.p));
  return best;
}

double fspace_norm(const Trajectory& traj, double q) { return kato_norm(traj, KatoIndex::forcing(q)); }

CarlesonScan CarlesonScan::dyadic(double horizon, int count, int centers_per_axis) {
  CarlesonScan scan;
  scan.centers_per_axis = centers_per_axis;
  for (int m = 0; m < count; ++m) scan.radii.push_back(std::ldexp(std::sqrt(horizon), -m));
  return scan;
}

CarlesonResult carleson_norm(const Trajectory& traj, const CarlesonScan& scan) {
  if (traj.empty()) throw Error("carleson_norm: empty trajectory");
  if (traj.kind() != FieldKind::vector) throw Error("carleson_norm: vector trajectory required");
  if (scan.radii.size() < 3) throw Error("carleson_norm: at least 3 radii are required");
  const GridSpec& g = traj.grid();
  const TimeGrid& tg = traj.time_grid();
  const double rootT = std::sqrt(traj.horizon());
  for (double R : scan.radii) {
    if (!(R > 0.0) || R > rootT * (1 + 1e-12)) throw Error("carleson_norm: radii must lie in ]0, sqrt(T)]");
    if (R > g.box_len() / 2) throw Error("carleson_norm: radius exceeds half the box length (ball wraps)");
  }
  const int n = g.n();
  const std::size_t np = g.points();
  const std::size_t nr = scan.radii.size();

  std::vector<std::vector<double>> wts;
  for (double R : scan.radii) wts.push_back(tg.integration_weights(R * R));
  std::vector<std::vector<double>> energy(nr, std::vector<double>(np, 0.0));

  CarlesonResult res;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    bool needed = false;
    for (std::size_t r = 0; r < nr; ++r) needed = needed || wts[r][i] != 0.0;
    const PhysicalField phys = traj.field(i).to_physical();
    const auto mod = phys.modulus();
    res.sup_term = std::max(res.sup_term, std::sqrt(traj.time(i)) * *std::max_element(mod.begin(), mod.end()));
    if (!needed) continue;
    for (std::size_t r = 0; r < nr; ++r) {
      const double w = wts[r][i];
      if (w == 0.0) continue;
      for (std::size_t x = 0; x < np; ++x) energy[r][x] += w * mod[x] * mod[x];
    }
  }

  const double h = g.box_len() / n;
  const int stride = std::max(1, n / scan.centers_per_axis);
  for (std::size_t r = 0; r < nr; ++r) {
    const double R = scan.radii[r];
    const int reach = static_cast<int>(std::ceil(R / h));
    std::vector<std::array<int, 3>> offsets;
    for (int dz = -reach; dz <= reach; ++dz)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx)
          if (h * h * (dx * dx + dy * dy + dz * dz) < R * R) offsets.push_back({dx, dy, dz});
    double best = 0.0;
    for (int cz = 0; cz < n; cz += stride)
      for (int cy = 0; cy < n; cy += stride)
        for (int cx = 0; cx < n; cx += stride) {
          double acc = 0.0;
          for (const auto& o : offsets) {
            const int x = (cx + o[0] + n) % n, y = (cy + o[1] + n) % n, z = (cz + o[2] + n) % n;
            acc += energy[r][(static_cast<std::size_t>(z) * n + y) * n + x];
          }
          best = std::max(best, std::pow(R, -1.5) * std::sqrt(acc * g.cell_volume()));
        }
    res.ball_by_radius.push_back(best);
    res.ball_term = std::max(res.ball_term, best);
  }
  res.total = res.ball_term + res.sup_term;
  return res;
}

namespace {

KatoIndex interpolate_index(const KatoIndex& a, const KatoIndex& b, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw Error("interp_check: theta must lie in ]0,1[");
  if (!(a.p >= 1.0 && b.p >= 1.0)) throw Error("interp_check: integrability indices must be >= 1");
  const double inv = theta / a.p + (1.0 - theta) / b.p;
  return {theta * a.s + (1.0 - theta) * b.s, 1.0 / inv};
}

}  // namespace

InterpolationReport interp_check(const Trajectory& traj, const KatoIndex& a, const KatoIndex& b, double theta) {
  InterpolationReport rep;
  rep.target = interpolate_index(a, b, theta);
  rep.lhs = kato_norm(traj, rep.target);
  rep.rhs = std::pow(kato_norm(traj, a), theta) * std::pow(kato_norm(traj, b), 1.0 - theta);
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-9);
  return rep;
}

InterpolationReport interp_check(const Trajectory& traj, const KatoIndex& a, const KatoIndex& b, double theta,
                                 const KatoIndex& target) {
  const KatoIndex want = interpolate_index(a, b, theta);
  if (std::abs(want.s - target.s) > 1e-12 || std::abs(1.0 / want.p - 1.0 / target.p) > 1e-12)
    throw Error("interp_check: target index is not the theta-interpolant of the endpoints");
  return interp_check(traj, a, b, theta);
}

double spacetime_norm(const Trajectory& traj, double q, double p, double upto) {
  if (traj.empty()) throw Error("spacetime_norm: empty trajectory");
  if (std::isinf(q)) {
    double best = 0.0;
    for (std::size_t i = 0; i < traj.size() && traj.time(i) <= upto; ++i)
      best = std::max(best, p == 2.0 ? plancherel_l2(traj.field(i)) : lp_norm(traj.field(i), p));
    return best;
  }
  const TimeGrid& tg = traj.time_grid();
  const auto w = tg.integration_weights(upto);
  double acc = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (w[i] == 0.0) continue;
    const double v = p == 2.0 ? plancherel_l2(traj.field(i)) : lp_norm(traj.field(i), p);
    acc += w[i] * std::pow(v, q);
  }
  return std::pow(std::max(acc, 0.0), 1.0 / q);
}

double spacetime_l2(const Trajectory& traj, double upto) { return spacetime_norm(traj, 2.0, 2.0, upto); }

double linf_l2(const Trajectory& traj, double upto) { return spacetime_norm(traj, std::numeric_limits<double>::infinity(), 2.0, upto); }

}  // namespace bnslab
