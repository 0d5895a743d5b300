#pragma once

#include <limits>

#include "cpr/l1.hpp"
#include "cpr/phase_retrieval.hpp"

namespace cpr {

/// How the ball radius for the sparse stage is chosen.
enum class EpsilonMode {
  Zero,       ///< equality constraint regardless of recorded noise
  Estimated,  ///< estimate_epsilon from the recorded noise level (0 when noiseless)
  Fixed,      ///< use PipelineOptions::fixed_epsilon verbatim
};

struct PipelineOptions {
  PhaseRetrievalOptions stage1;
  SolverOptions solver;

  EpsilonMode epsilon_mode = EpsilonMode::Estimated;
  double fixed_epsilon = 0.0;
  double epsilon_confidence = 0.9;

  /// Fourier mode only: also constrain the anchor row e_0/sqrt(n) to the
  /// recovered anchor value, instead of using the sampled spectrum alone.
  /// Costs the closed-form projection (the row set is no longer
  /// orthonormal) and is off by default.
  bool append_anchor_row = false;

  /// Aligned relative MSE at or below this counts as a successful recovery.
  double success_threshold = 1e-5;
};

struct RecoveryOutcome {
  ComplexSignal estimate;

  /// Filled by score_outcome once the ground truth is known.
  double aligned_mse = std::numeric_limits<double>::quiet_NaN();
  bool success = false;

  double stage1_residual = 0.0;
  bool stage1_clamped = false;
  double epsilon = 0.0;  ///< ball radius actually used
  SolverReport solver;
};

/// Runs both stages on a set of intensity measurements: algebraic phase
/// recovery of the sketch, then l1 recovery of the signal through the
/// sketch operator rebuilt from the measurement provenance.
/// Throws ModelViolation (anchor vanishes), std::invalid_argument
/// (malformed measurements/options).  Solver non-convergence is reported in
/// the outcome, never thrown.
RecoveryOutcome recover(const IntensityMeasurements& m, const PipelineOptions& opts = {});

/// Best global-phase alignment of `estimate` onto `truth`:
/// c = <truth, estimate> / |<truth, estimate>| (1 when the inner product
/// vanishes) and mse = ||truth - c estimate||^2 / ||truth||^2.
/// Requires matching sizes and a nonzero truth.
struct PhaseAlignment {
  Complex c;
  double mse;
};
PhaseAlignment align_phase(const ComplexSignal& truth, const ComplexSignal& estimate);

/// Scores an outcome against the ground truth in place.
void score_outcome(RecoveryOutcome& out, const ComplexSignal& truth, double threshold);

}  // namespace cpr
