#pragma once

#include "bnslab/field.hpp"

namespace bnslab {

/// In-place forward DFT of `howmany` contiguous n^3 blocks, scaled by 1/n^3.
void fft_forward(const GridSpec& grid, int howmany, cplx* data);
/// In-place unscaled inverse DFT (synthesis of sum_k u_k e^{i k x}).
void fft_backward(const GridSpec& grid, int howmany, cplx* data);

}  // namespace bnslab
