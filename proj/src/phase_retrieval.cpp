#include "cpr/phase_retrieval.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

PhaseRetrievalResult recover_phases(const IntensityMeasurements& m,
                                    const PhaseRetrievalOptions& opts) {
  validate_values(m);
  if (!(opts.anchor_rel_tol >= 0.0))
    throw std::invalid_argument("recover_phases: anchor_rel_tol must be nonnegative");

  const MaskConstants& c = mask_constants();
  const double alpha2 = c.alpha * c.alpha;
  const double beta2 = std::norm(c.beta);
  const double sqrt3 = std::sqrt(3.0);
  const std::size_t L = m.blocks;

  // Anchor energy |y0|^2: every block gives an estimate; average them.
  // Also track the mean intensity as the natural scale of the data.
  double u = 0.0;
  double scale = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double p = 0.5 * (m.at(0, l) + m.at(2, l));
    const double q = 0.5 * (m.at(1, l) + m.at(3, l));
    u += sqrt3 * (beta2 * q - alpha2 * p);
    scale += m.at(0, l) + m.at(1, l) + m.at(2, l) + m.at(3, l);
  }
  u /= static_cast<double>(L);
  scale /= static_cast<double>(4 * L);

  if (!(u > scale * opts.anchor_rel_tol) || !(u > 0.0))
    throw ModelViolation(
        "recover_phases: anchor energy estimate is not positive; "
        "the signal's first entry appears to vanish");

  PhaseRetrievalResult out;
  out.y.resize(L + 1);
  const double y0 = std::sqrt(u);
  out.y[0] = Complex(y0, 0.0);

  for (std::size_t l = 0; l < L; ++l) {
    const double d13 = m.at(0, l) - m.at(2, l);
    const double d24 = m.at(1, l) - m.at(3, l);
    const Complex z(-sqrt3 * (d13 + d24) / 4.0, sqrt3 * (d13 - d24) / 4.0);
    Complex yl = std::conj(z) / y0;
    if (opts.renormalize_magnitudes) {
      const double p = 0.5 * (m.at(0, l) + m.at(2, l));
      const double q = 0.5 * (m.at(1, l) + m.at(3, l));
      double v = sqrt3 * (beta2 * p - alpha2 * q);
      if (v < 0.0) {
        v = 0.0;
        out.clamped = true;
      }
      const double mag = std::abs(yl);
      yl = mag > 0.0 ? yl * (std::sqrt(v) / mag) : Complex(std::sqrt(v), 0.0);
    }
    out.y[l + 1] = yl;
  }

  // Re-measure and report the relative mismatch as a consistency check.
  const IntensityMeasurements back = measure_vectors(out.y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const double d = back.values[i] - m.values[i];
    num += d * d;
    den += m.values[i] * m.values[i];
  }
  out.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return out;
}

SplitResult split_result(const PhaseRetrievalResult& r, std::size_t n) {
  if (n == 0) throw std::invalid_argument("split_result: dimension must be positive");
  if (r.y.size() < 2) throw std::invalid_argument("split_result: sketch needs at least 2 entries");
  SplitResult s;
  s.first_entry = r.y[0] * std::sqrt(static_cast<double>(n));
  s.spectrum.assign(r.y.begin() + 1, r.y.end());
  return s;
}

}  // namespace cpr
