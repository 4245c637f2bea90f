#include "bnslab/split_picard.hpp"

#include <algorithm>
#include <optional>

#include "bnslab/error.hpp"
#include "bnslab/spectral_ops.hpp"

namespace bnslab {

SplitPicardDiff split_picard_diff(const SpectralField& u0, const Trajectory* F, double N, int k, const PicardConfig& cfg) {
  if (!(N > 0.0)) throw Error("split_picard_diff: N must be positive");
  if (k < 0) throw Error("split_picard_diff: k must be nonnegative");
  PicardConfig c = cfg;
  c.k = k;
  c.validate();
  const TimeGrid tg = c.time_grid();

  const InitialDataSplit init = split_initial_data(u0, c.p, N);
  std::optional<ForcingSplit> force;
  if (F) force = split_forcing(*F, c.p, N);

  const PicardBundle full = picard_bundle(u0, F, c);
  const PicardBundle sub = picard_bundle(init.u_bar, force ? &force->F_bar : nullptr, c);
  const Trajectory p0_tilde = picard_zero(init.u_tilde, force ? &force->F_tilde : nullptr, tg);

  SplitPicardDiff out{axpy(-1.0, sub.iterate(k), full.iterate(k)), Trajectory(u0.grid(), FieldKind::tensor, tg), {}};
  const Trajectory& P = full.iterate(k);
  const Trajectory& Pb = sub.iterate(k);
  for (std::size_t i = 0; i < tg.size(); ++i)
    out.G.field(i) = axpy(-1.0, tensor_product(Pb.field(i), Pb.field(i)), tensor_product(P.field(i), P.field(i)));

  auto& r = out.report;
  r.N = N;
  r.k = k;
  r.e_linf_l2 = linf_l2(out.E, tg.horizon());
  r.g_l2 = spacetime_l2(out.G, tg.horizon());
  r.p0_tilde_linf_l2 = linf_l2(p0_tilde, tg.horizon());
  r.ratio = r.p0_tilde_linf_l2 > 0.0 ? r.e_linf_l2 / r.p0_tilde_linf_l2 : 0.0;
  const Trajectory e0 = axpy(-1.0, sub.iterate(0), full.iterate(0));
  r.e0_identity = relative_error(e0, p0_tilde);
  r.initial = init.certificate;
  if (force) r.forcing = force->certificate;
  return out;
}

}  // namespace bnslab
