#pragma once

#include <cstdint>

#include "bnslab/field.hpp"

namespace bnslab {

struct RandomFieldSpec {
  double slope = -2.0;   // |u_k| ~ |k|^slope
  double k_min = 1.0;    // lattice units
  double k_max = 0.0;    // lattice units; 0 means n/3
  bool leray = true;     // project vector fields
  double l2_norm = 1.0;  // rescaled to this L^2 norm; <= 0 leaves it raw
};

/// Seeded Gaussian coefficients with a power-law spectrum, band-limited and mean-zero.
SpectralField random_field(const GridSpec& grid, FieldKind kind, std::uint64_t seed,
                           const RandomFieldSpec& spec = {});

/// Band-limited, divergence-free profile concentrated near a random point: coefficients
/// |k|^slope * e^{-i xi.x0} * (e + 0.3 w_k), so the phases are coherent rather than random.
SpectralField concentrated_field(const GridSpec& grid, std::uint64_t seed, const RandomFieldSpec& spec = {});

}  // namespace bnslab
