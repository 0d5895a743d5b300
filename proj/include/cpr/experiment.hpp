#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpr/pipeline.hpp"
#include "cpr/table.hpp"

namespace cpr {

/// Anchor-magnitude policy swept by the noise experiment.
enum class VariantPolicy { Fixed, Random, Both };

const char* to_string(VariantPolicy v);
VariantPolicy variant_policy_from_string(const std::string& name);

/// Shared configuration for the three Monte Carlo experiments.  Every field
/// has a desk-scale default; validation happens inside each run_* entry
/// point since the required fields differ per experiment.
struct ExperimentConfig {
  std::size_t n = 512;
  std::vector<std::size_t> k_grid{12};
  std::vector<std::size_t> m_grid{256};  ///< total measurement counts (4 per block)
  std::size_t trials = 200;

  /// Noise sweep: SNR grid in dB and which anchor variants to run.
  std::vector<double> snr_grid{20.0, 30.0, 40.0, 50.0, 60.0};
  VariantPolicy variants = VariantPolicy::Both;

  /// Success-rate / phase-transition experiments: noiseless by default.
  /// A finite value here adds measurement noise at that SNR.
  double snr_db = std::numeric_limits<double>::quiet_NaN();

  SensingMode mode = SensingMode::Fourier;
  bool fix_first = false;  ///< pin |x[0]| = 1 instead of drawing it randomly

  /// Phase transition: search range for the minimal measurement count, on
  /// the grid m_min, m_min + m_step, ... (all multiples of 4);
  /// m_max = 0 means "up to 4 (n - 1)".
  std::vector<double> targets{0.95};
  std::size_t m_min = 16;
  std::size_t m_max = 0;
  std::size_t m_step = 4;

  double success_threshold = 1e-5;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  ///< 0 = hardware concurrency
  bool record_trials = false;

  /// Bumps `trials` to at least 1000 for paper-scale statistics.
  bool full_scale = false;

  PipelineOptions pipeline = [] {
    PipelineOptions p;
    // Monte Carlo loops cap the solver budget; a trial past this point is
    // counted as a failure rather than ground out.
    p.solver.max_operator_applications = 8000;
    return p;
  }();
};

/// Parses a JSON object with keys mirroring the struct fields (see README);
/// unknown keys are rejected.  Throws std::invalid_argument.
ExperimentConfig config_from_json(const std::string& json_text);

/// Canonical JSON echo of a configuration (includes the library version);
/// suitable for storing next to result tables.
std::string manifest_json(const ExperimentConfig& cfg, const std::string& experiment);

/// One Monte Carlo trial, fully determined by the per-trial seed.
struct TrialRecord {
  std::size_t k = 0;
  std::size_t m = 0;
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  bool fixed_anchor = false;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool model_violation = false;
  bool success = false;
  double aligned_mse = std::numeric_limits<double>::quiet_NaN();
  double stage1_residual = 0.0;
  std::size_t solver_iterations = 0;
  bool solver_converged = false;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  Table aggregate;
  std::optional<Table> trials;    ///< set when record_trials
  bool all_targets_reached = true;  ///< phase transition only
};

/// Success rate over the k x m grid.
/// Aggregate columns: k,m,trials,successes,success_rate,mean_mse
ExperimentResult run_success_rate(const ExperimentConfig& cfg);

/// Minimal measurement count reaching each target success rate, per k,
/// located by bisection over the m grid (trial seeds are independent of
/// the search path, so probes are reproducible in isolation).
/// Aggregate columns: k,target_rate,m_min,reached
ExperimentResult run_phase_transition(const ExperimentConfig& cfg);

/// Aligned MSE versus SNR for fixed and/or random anchor magnitude at the
/// operating point (k_grid[0], m_grid[0]).
/// Aggregate columns: snr_db,variant,trials,success_rate,mean_mse,
///                    mean_mse_db,stderr_mse
ExperimentResult run_noise_sweep(const ExperimentConfig& cfg);

/// Single-trial entry point used by the runners and by tests: draws the
/// signal, sampling set and noise from sub-seeds of `trial_seed`, runs the
/// pipeline and scores it.  A ModelViolation is recorded, not thrown.
TrialRecord run_single_trial(const ExperimentConfig& cfg, std::size_t k, std::size_t m,
                             double snr_db, bool fixed_anchor, std::size_t trial_index,
                             std::uint64_t trial_seed);

}  // namespace cpr
