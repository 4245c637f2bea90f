#pragma once

#include <vector>

#include "bnslab/trajectory.hpp"

namespace bnslab {

/// Weight exponent s and integrability p of sup_t t^{-s/2} ||u(t)||_p.
struct KatoIndex {
  double s = 0.0;
  double p = 2.0;
  /// (s_p, p) with s_p = -1 + 3/p.
  static KatoIndex critical(double p) { return {-1.0 + 3.0 / p, p}; }
  /// (s_p', p) with s_p' = -2 + 3/p, the forcing scale.
  static KatoIndex forcing(double p) { return {-2.0 + 3.0 / p, p}; }
};

/// max over samples of t^{-s/2} ||u(t)||_p.
double kato_norm(const Trajectory& traj, const KatoIndex& idx);
/// Forcing norm with weight t^{1 - 3/(2q)}.
double fspace_norm(const Trajectory& traj, double q);

struct CarlesonScan {
  int centers_per_axis = 8;
  std::vector<double> radii;
  /// Radii 2^-m sqrt(T), m = 0 .. count-1.
  static CarlesonScan dyadic(double horizon, int count = 6, int centers_per_axis = 8);
};

struct CarlesonResult {
  double ball_term = 0.0;  // max_{x,R} R^{-3/2} ||u||_{L^2(B(x,R) x ]0,R^2[)}
  double sup_term = 0.0;   // max_t t^{1/2} ||u(t)||_inf
  double total = 0.0;
  std::vector<double> ball_by_radius;  // max over centers, per radius
};

CarlesonResult carleson_norm(const Trajectory& traj, const CarlesonScan& scan);

struct InterpolationReport {
  KatoIndex target;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Checks ||u||_{K^s_p} <= ||u||_{K^{s1}_{p1}}^theta ||u||_{K^{s2}_{p2}}^{1-theta} with the
/// interpolated (s, p); theta must lie in ]0,1[.
InterpolationReport interp_check(const Trajectory& traj, const KatoIndex& a, const KatoIndex& b, double theta);
/// Same, with the caller's target index checked against the interpolation arithmetic.
InterpolationReport interp_check(const Trajectory& traj, const KatoIndex& a, const KatoIndex& b, double theta,
                                 const KatoIndex& target);

/// (int_0^{upto} ||u(t)||_p^q dt)^{1/q}; q = inf gives the max over samples with t <= upto.
double spacetime_norm(const Trajectory& traj, double q, double p, double upto);
/// ||u||_{L^2(Q_upto)} using coefficient-side L^2 norms.
double spacetime_l2(const Trajectory& traj, double upto);
/// max over samples with t <= upto of ||u(t)||_2.
double linf_l2(const Trajectory& traj, double upto);

}  // namespace bnslab
