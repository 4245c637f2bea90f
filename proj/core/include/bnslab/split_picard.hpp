#pragma once

#include "bnslab/splitting.hpp"
#include "bnslab/stokes_picard.hpp"

namespace bnslab {

struct SplitPicardReport {
  double N = 0.0;
  int k = 0;
  double e_linf_l2 = 0.0;        // sup_t ||E_k||_2
  double g_l2 = 0.0;             // ||G_k||_{L^2(Q_T)}
  double p0_tilde_linf_l2 = 0.0; // sup_t ||S u0_tilde + L(F_tilde)||_2
  double ratio = 0.0;            // e_linf_l2 / p0_tilde_linf_l2 (0 when both vanish)
  double e0_identity = 0.0;      // max_t ||E_0 - P0_tilde||_2 / max_t ||P0_tilde||_2
  SplitCertificate initial;
  SplitCertificate forcing;      // empty when F is absent
};

struct SplitPicardDiff {
  Trajectory E;  // P_k(u0, F) - P_k(u0_bar, F_bar)
  Trajectory G;  // P_k (x) P_k - P_k_bar (x) P_k_bar
  SplitPicardReport report;
};

/// Splits (u0, F) at level N and compares the Picard bundles of the full and the subcritical data.
/// F may be null; otherwise it must live on cfg.time_grid().
SplitPicardDiff split_picard_diff(const SpectralField& u0, const Trajectory* F, double N, int k, const PicardConfig& cfg);

}  // namespace bnslab
