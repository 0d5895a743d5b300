#include "cpr/pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

RecoveryOutcome recover(const IntensityMeasurements& m, const PipelineOptions& opts) {
  validate(m);
  if (!(opts.epsilon_confidence > 0.0 && opts.epsilon_confidence < 1.0))
    throw std::invalid_argument("recover: epsilon confidence must be in (0, 1)");
  if (!(opts.fixed_epsilon >= 0.0) || !std::isfinite(opts.fixed_epsilon))
    throw std::invalid_argument("recover: fixed epsilon must be finite and nonnegative");
  if (!(opts.success_threshold > 0.0))
    throw std::invalid_argument("recover: success threshold must be positive");

  RecoveryOutcome out;
  const PhaseRetrievalResult sketch = recover_phases(m, opts.stage1);
  out.stage1_residual = sketch.residual;
  out.stage1_clamped = sketch.clamped;

  // Ball radius for the sparse stage.
  switch (opts.epsilon_mode) {
    case EpsilonMode::Zero:
      out.epsilon = 0.0;
      break;
    case EpsilonMode::Fixed:
      out.epsilon = opts.fixed_epsilon;
      break;
    case EpsilonMode::Estimated: {
      const double sigma = std::sqrt(m.sigma2);
      if (sigma == 0.0) {
        out.epsilon = 0.0;
      } else {
        const double u = std::norm(sketch.y[0]);
        double s2 = 0.0;
        for (std::size_t l = 1; l < sketch.y.size(); ++l) s2 += std::norm(sketch.y[l]);
        out.epsilon = estimate_epsilon(m.blocks, sigma, opts.epsilon_confidence, u, s2);
      }
      break;
    }
  }

  const auto make_problem = [&]() -> L1Problem {
    if (m.mode == SensingMode::Fourier) {
      if (opts.append_anchor_row)
        return {SensingOperator::anchored_dft(m.n, m.sampling), sketch.y, out.epsilon};
      return {SensingOperator::partial_dft(m.n, m.sampling),
              ComplexSignal(sketch.y.begin() + 1, sketch.y.end()), out.epsilon};
    }
    const std::size_t rows = m.blocks + 1;
    SensingOperator op = m.mode == SensingMode::Gaussian
                             ? SensingOperator::gaussian(rows, m.n, m.seed)
                             : SensingOperator::bernoulli(rows, m.n, m.seed);
    return {std::move(op), sketch.y, out.epsilon};
  };
  const L1Problem problem = make_problem();

  out.solver = solve_bp(problem, opts.solver);
  out.estimate = out.solver.solution;
  return out;
}

PhaseAlignment align_phase(const ComplexSignal& truth, const ComplexSignal& estimate) {
  if (truth.size() != estimate.size())
    throw std::invalid_argument("align_phase: size mismatch");
  const double tnorm2 = norm2_squared(truth);
  if (!(tnorm2 > 0.0)) throw std::invalid_argument("align_phase: truth must be nonzero");

  const Complex ip = inner(truth, estimate);
  const double mag = std::abs(ip);
  const Complex c = mag > 0.0 ? ip / mag : Complex(1.0, 0.0);

  double err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) err += std::norm(truth[i] - c * estimate[i]);
  return PhaseAlignment{c, err / tnorm2};
}

void score_outcome(RecoveryOutcome& out, const ComplexSignal& truth, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("score_outcome: threshold must be positive");
  const PhaseAlignment a = align_phase(truth, out.estimate);
  out.aligned_mse = a.mse;
  out.success = a.mse <= threshold;
}

}  // namespace cpr
