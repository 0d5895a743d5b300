#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cpr/dft.hpp"
#include "cpr/masks.hpp"
#include "cpr/rng.hpp"
#include "cpr/types.hpp"

namespace cpr {

/// Which linear sketch sits in front of the intensity detector.
enum class SensingMode { Fourier, Gaussian, Bernoulli };

const char* to_string(SensingMode mode);
SensingMode sensing_mode_from_string(const std::string& name);

/// Linear operator A : C^cols -> C^rows with forward and adjoint action.
/// Three flavors:
///   - partial unitary DFT (rows form an orthonormal set, A A* = I),
///   - the same with an extra leading "anchor" row e_0^T / sqrt(n),
///   - dense random matrices (gaussian or bernoulli), regenerated
///     deterministically from a seed.
/// Instances are immutable and cheap to copy (shared storage).
class SensingOperator {
 public:
  /// Row-restricted unitary DFT; `rows` 0-based strictly increasing.
  static SensingOperator partial_dft(std::size_t n, std::vector<std::size_t> rows);

  /// Anchor row first, then the restricted DFT rows: the sketch
  /// y = (x[0]/sqrt(n), (F x)_rows) used by the two-stage pipeline.
  static SensingOperator anchored_dft(std::size_t n, std::vector<std::size_t> rows);

  /// Dense with i.i.d. CN(0, 1/rows) entries.
  static SensingOperator gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed);

  /// Dense with i.i.d. +-1/sqrt(rows) real entries.
  static SensingOperator bernoulli(std::size_t rows, std::size_t cols, std::uint64_t seed);

  SensingMode mode() const { return mode_; }
  std::size_t rows() const { return rows_n_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t seed() const { return seed_; }

  /// True when A A* = I exactly (plain partial DFT).
  bool rows_orthonormal() const { return kind_ == Kind::Dft; }

  /// True for the anchored Fourier sketch.
  bool anchored() const { return kind_ == Kind::AnchoredDft; }

  /// Sampled DFT rows (Fourier kinds only; throws otherwise).
  const std::vector<std::size_t>& dft_rows() const;

  ComplexSignal forward(const ComplexSignal& x) const;
  ComplexSignal adjoint(const ComplexSignal& v) const;

 private:
  enum class Kind { Dft, AnchoredDft, Dense };
  SensingOperator() = default;

  Kind kind_ = Kind::Dft;
  SensingMode mode_ = SensingMode::Fourier;
  std::size_t rows_n_ = 0;
  std::size_t cols_ = 0;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const DftOperator> dft_;
  std::shared_ptr<const std::vector<Complex>> dense_;  // row-major
};

/// The 4 x L nonnegative intensity patterns plus the provenance needed to
/// rebuild the sketch operator they came from.  values[s * blocks + l] is
/// the intensity of mask s at block l.
struct IntensityMeasurements {
  SensingMode mode = SensingMode::Fourier;
  std::size_t n = 0;                  ///< ambient signal dimension
  std::size_t blocks = 0;             ///< L, number of blocks per mask
  std::vector<std::size_t> sampling;  ///< 0-based DFT rows; empty in dense modes
  double sigma2 = 0.0;                ///< per-sample complex noise variance
  std::uint64_t seed = 0;             ///< operator seed (dense modes)
  std::vector<double> values;         ///< 4 * blocks intensities, mask-major

  double at(std::size_t s, std::size_t l) const { return values[s * blocks + l]; }
  double& at(std::size_t s, std::size_t l) { return values[s * blocks + l]; }
};

/// Shape and sign checks only (4*blocks finite nonnegative values); enough
/// for the algebraic stage, which needs no provenance.
void validate_values(const IntensityMeasurements& m);

/// validate_values plus provenance checks (dimension, sampling set); the
/// contract needed to rebuild the sketch operator.  Both throw
/// std::invalid_argument.
void validate(const IntensityMeasurements& m);

/// Intensities of the masked Fourier transforms at the sampled rows:
///   b(s, l) = |F(x . p_s)[sampling[l]] + noise|^2.
/// Noise is i.i.d. circular complex gaussian with variance sigma_nu^2,
/// drawn mask-major from `rng`.  The noiseless overload needs no generator.
IntensityMeasurements measure_fourier(const ComplexSignal& x, const MaskSet& masks,
                                      const std::vector<std::size_t>& sampling,
                                      double sigma_nu, Rng& rng);
IntensityMeasurements measure_fourier(const ComplexSignal& x, const MaskSet& masks,
                                      const std::vector<std::size_t>& sampling);

/// Intensities of two-term projections of an arbitrary sketch y in C^(L+1):
///   b(s, l) = |a_s y[0] + b_s y[l+1]|^2,  l = 0..L-1.
/// For the Fourier sketch y = (x[0]/sqrt(n), (F x)_sampling) this equals the
/// masked path above exactly.  Requires y.size() >= 2; provenance fields of
/// the result are left at their defaults for the caller to stamp.
IntensityMeasurements measure_vectors(const ComplexSignal& y);

/// Sketch-then-project: y = op.forward(x), then measure_vectors(y), with the
/// provenance fields stamped from `op`.  `op` must be an anchored Fourier
/// sketch or a dense operator with at least 2 rows; for anchored sketches
/// the result is identical to measure_fourier on the same sampling set.
IntensityMeasurements measure_operator(const ComplexSignal& x, const SensingOperator& op);

/// Signal-to-noise ratio, in dB, of the four masked Fourier patterns under
/// per-sample noise variance sigma_nu^2:
///   10 log10( sum_s ||(F(x . p_s))_sampling||^2 / (4 L sigma_nu^2) ).
/// Requires sigma_nu > 0 and a signal with positive energy on the samples.
double snr_db(const ComplexSignal& x, const MaskSet& masks,
              const std::vector<std::size_t>& sampling, double sigma_nu);

/// Noise level realizing a target SNR for this signal and sampling set.
double sigma_for_snr(const ComplexSignal& x, const MaskSet& masks,
                     const std::vector<std::size_t>& sampling, double target_snr_db);

}  // namespace cpr
