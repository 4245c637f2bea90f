#pragma once

#include <functional>
#include <vector>

#include "bnslab/kato.hpp"
#include "bnslab/trajectory.hpp"

namespace bnslab {

/// Leray-projected divergence of the forcing at time node i (a vector field).
using SourceFn = std::function<SpectralField(std::size_t)>;

/// L(G)(t) = int_0^t S(t - s) G(s) ds at every node of `tgrid`, where G is given node-wise and
/// represented in time by its per-block polynomial interpolant.
Trajectory duhamel_from_sources(const GridSpec& grid, const TimeGrid& tgrid, const SourceFn& source);
/// L(F) = int_0^t S(t - s) P div F(s) ds on F's own time grid.
Trajectory duhamel_L(const Trajectory& F);
/// L(F) at one time t in ]0, T]; throws beyond F's horizon.
SpectralField duhamel_at(const Trajectory& F, double t);
/// B(u, v) = L(u (x) v); the tensor is formed node by node and never stored.
Trajectory bilinear_B(const Trajectory& u, const Trajectory& v);

struct PicardConfig {
  int k = 1;
  double T = 1.0;
  int octaves = 12;
  int nodes_per_block = 10;
  double p = 6.0;          // integrability of the Kato norm used for increments and reports
  double tol = 1e-10;      // stopping tolerance on the K_p increment
  int max_iter = 50;

  TimeGrid time_grid() const { return TimeGrid(T, octaves, nodes_per_block); }
  void validate() const;
};

struct LevelNorms {
  int level = 0;
  double kato = 0.0;        // sup_t t^{-s_p/2} ||P_l||_p
  double linf_l2 = 0.0;     // sup_t ||P_l||_2
  double forcing_l2 = 0.0;  // ||F_l||_{L^2(Q_T)}
};

/// Iterates P_0..P_k with P_{l+1} = P_0 - B(P_l, P_l); forcing tensors are formed on demand.
class PicardBundle {
 public:
  PicardBundle(std::vector<Trajectory> iterates, std::vector<LevelNorms> norms)
      : iterates_(std::move(iterates)), norms_(std::move(norms)) {}

  int k() const { return static_cast<int>(iterates_.size()) - 1; }
  const Trajectory& iterate(int l) const { return iterates_.at(static_cast<std::size_t>(l)); }
  /// F_l = P_l (x) P_l - P_{l-1} (x) P_{l-1} at node i, with P_{-1} = 0.
  SpectralField forcing_at(int l, std::size_t i) const;
  Trajectory forcing(int l) const;
  const std::vector<LevelNorms>& norms() const { return norms_; }
  void set_norms(std::vector<LevelNorms> norms) { norms_ = std::move(norms); }

 private:
  std::vector<Trajectory> iterates_;
  std::vector<LevelNorms> norms_;
};

/// P_0 = S(t) u0 + L(F); F may be null (zero forcing).
Trajectory picard_zero(const SpectralField& u0, const Trajectory* F, const TimeGrid& tgrid);
PicardBundle picard_bundle(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg);

/// ceil(p/2) - 2 for p > 3.
int k_of_p(double p);

struct SlopeReport {
  std::vector<double> horizons;
  std::vector<double> norms;
  std::vector<double> constants;  // norm / T^{1/4}
  double slope = 0.0;
  bool defined = false;
};

/// Least-squares slope of log y against log x; undefined when any y <= 0 or fewer than 2 points.
SlopeReport fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys);
/// ||F_k||_{L^2(Q_T)} for each T in `horizons` from one bundle on the largest horizon.
SlopeReport fk_l2_scaling(const SpectralField& u0, const Trajectory* F, int k, const std::vector<double>& horizons,
                          const PicardConfig& cfg);

struct MildSolution {
  Trajectory v;
  Trajectory p0;
  std::vector<double> increments;
  double residual = 0.0;  // ||v - P_0 + B(v,v)||_{K_p}
  int iterations = 0;
};

/// v <- P_0 - B(v, v) from v = P_0 until the K_p increment drops below cfg.tol.
/// Throws ConvergenceError after cfg.max_iter iterations or once the increments blow up.
MildSolution mild_solve(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg);

/// Amplitudes a0, 2 a0, 4 a0, ... applied to a fixed profile until mild_solve first fails.
struct SmallnessBracket {
  std::vector<double> amplitudes;
  std::vector<int> iterations;   // 0 where the solve failed
  double last_converged = 0.0;   // 0 when even a0 fails
  double first_failed = 0.0;     // 0 when every amplitude converged
};

/// Empirical smallness bracket for the data profile `u0` (forcing F, if any, is not scaled).
SmallnessBracket smallness_bracket(const SpectralField& u0, const Trajectory* F, const PicardConfig& cfg, double a0,
                                   int max_doublings);

struct EnergyReport {
  std::vector<double> times;
  std::vector<double> residual;  // ||u(t)||^2 + 2 int |grad u|^2 - 2 int (P_k (x) u + F_k) : grad u
  std::vector<double> kinetic;   // ||u(t)||^2
  double scale = 0.0;            // max_t of the summed magnitudes of all terms
  double max_relative() const;   // max_t residual / scale (0 when scale = 0)
};

/// Global energy balance of u = v - P_k from the initial time, u(0) = 0.
EnergyReport energy_residual(const Trajectory& v, const PicardBundle& bundle);

}  // namespace bnslab
