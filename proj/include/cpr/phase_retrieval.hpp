#pragma once

#include "cpr/measurement.hpp"
#include "cpr/types.hpp"

namespace cpr {

struct PhaseRetrievalOptions {
  /// The anchor magnitude estimate u is compared against this fraction of
  /// the mean intensity; at or below it the data is declared inconsistent
  /// with a nonvanishing anchor entry and ModelViolation is thrown.
  double anchor_rel_tol = 1e-12;

  /// When set, the magnitudes |y[l+1]| are rescaled to the energy estimates
  /// sqrt(v_l) instead of |z_l| / y[0].  Identical in exact arithmetic;
  /// under noise the two differ and either can be preferred.
  bool renormalize_magnitudes = false;
};

struct PhaseRetrievalResult {
  /// Recovered sketch, length L+1, global phase fixed so y[0] is real >= 0.
  ComplexSignal y;

  /// Relative Euclidean mismatch between the input intensities and the
  /// intensities re-measured from y; rounding-level for consistent data.
  double residual = 0.0;

  /// True when a negative energy estimate had to be clamped to zero
  /// (can only happen on noisy or inconsistent data).
  bool clamped = false;
};

/// Algebraic inversion of the four-mask intensity patterns.
///
/// For each block l the four intensities are linear images of
/// (|y0|^2, |y_{l+1}|^2, Re z_l, Im z_l) with z_l = y0 * conj(y_{l+1});
/// the mask constants make that 4x4 system invertible in closed form:
///
///   P = (b1 + b3)/2,  Q = (b2 + b4)/2
///   |y0|^2      = sqrt(3) * (|beta|^2 Q - alpha^2 P)    (averaged over l)
///   |y_{l+1}|^2 = sqrt(3) * (|beta|^2 P - alpha^2 Q)
///   Re z_l = -sqrt(3) * ((b1 - b3) + (b2 - b4)) / 4
///   Im z_l = +sqrt(3) * ((b1 - b3) - (b2 - b4)) / 4
///
/// and y_{l+1} = conj(z_l) / y0 once y0 = sqrt(|y0|^2) is fixed real.
/// The output equals the true sketch up to one global phase, exactly on
/// consistent data.  Throws ModelViolation when the anchor energy estimate
/// is not positive (see PhaseRetrievalOptions::anchor_rel_tol).
PhaseRetrievalResult recover_phases(const IntensityMeasurements& m,
                                    const PhaseRetrievalOptions& opts = {});

/// The two halves of a recovered Fourier sketch: the anchor rescaled to the
/// signal entry x[0] = y[0] * sqrt(n), and the sampled spectrum values.
struct SplitResult {
  Complex first_entry;
  ComplexSignal spectrum;
};

SplitResult split_result(const PhaseRetrievalResult& r, std::size_t n);

}  // namespace cpr
