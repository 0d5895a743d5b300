#pragma once

#include <array>
#include <cstddef>

#include "cpr/types.hpp"

namespace cpr {

/// Coefficients of the four interferometric masks.  Each mask is a delta
/// spike at index 0 plus a flat background:
///   p_s[0] = a_s + b_s,   p_s[k] = b_s for k >= 1.
/// The pair (a_s, b_s) cycles through (alpha, beta), (beta, alpha),
/// (alpha, -beta), (-beta, alpha), where
///   alpha = sqrt((1 - 1/sqrt(3)) / 2)                    (real)
///   beta  = exp(-i 5 pi / 4) * sqrt((1 + 1/sqrt(3)) / 2)
/// This choice makes the four intensity patterns algebraically invertible:
/// |alpha|^2 + |beta|^2 = 1, alpha^2 - |beta|^2 = -1/sqrt(3) and
/// alpha * |beta| = 1/sqrt(6), so sums and differences of the four patterns
/// isolate the magnitudes and the cross terms exactly.
struct MaskConstants {
  double alpha;
  Complex beta;
  std::array<Complex, 4> a;  // spike coefficient per mask
  std::array<Complex, 4> b;  // background coefficient per mask
};

const MaskConstants& mask_constants();

/// The four mask transmittance vectors over C^n.
struct MaskSet {
  std::size_t n = 0;
  std::array<ComplexSignal, 4> p;
};

/// Requires n >= 1.
MaskSet build_masks(std::size_t n);

}  // namespace cpr
