#include "cpr/measurement.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

const char* to_string(SensingMode mode) {
  switch (mode) {
    case SensingMode::Fourier: return "fourier";
    case SensingMode::Gaussian: return "gaussian";
    case SensingMode::Bernoulli: return "bernoulli";
  }
  return "fourier";
}

SensingMode sensing_mode_from_string(const std::string& name) {
  if (name == "fourier") return SensingMode::Fourier;
  if (name == "gaussian") return SensingMode::Gaussian;
  if (name == "bernoulli") return SensingMode::Bernoulli;
  throw std::invalid_argument("unknown sensing mode: " + name);
}

SensingOperator SensingOperator::partial_dft(std::size_t n, std::vector<std::size_t> rows) {
  SensingOperator op;
  op.kind_ = Kind::Dft;
  op.mode_ = SensingMode::Fourier;
  op.dft_ = std::make_shared<const DftOperator>(n, std::move(rows));
  op.rows_n_ = op.dft_->output_length();
  op.cols_ = n;
  return op;
}

SensingOperator SensingOperator::anchored_dft(std::size_t n, std::vector<std::size_t> rows) {
  SensingOperator op = partial_dft(n, std::move(rows));
  op.kind_ = Kind::AnchoredDft;
  op.rows_n_ += 1;
  return op;
}

namespace {

std::shared_ptr<const std::vector<Complex>> fill_dense(std::size_t rows, std::size_t cols,
                                                       std::uint64_t seed, bool gaussian) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("SensingOperator: empty shape");
  auto data = std::make_shared<std::vector<Complex>>();
  data->reserve(rows * cols);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (std::size_t i = 0; i < rows * cols; ++i) {
    if (gaussian) {
      data->push_back(rng.complex_gaussian() * scale);
    } else {
      data->push_back(Complex(rng.below(2) == 0 ? scale : -scale, 0.0));
    }
  }
  return data;
}

}  // namespace

SensingOperator SensingOperator::gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SensingOperator op;
  op.kind_ = Kind::Dense;
  op.mode_ = SensingMode::Gaussian;
  op.rows_n_ = rows;
  op.cols_ = cols;
  op.seed_ = seed;
  op.dense_ = fill_dense(rows, cols, seed, /*gaussian=*/true);
  return op;
}

SensingOperator SensingOperator::bernoulli(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  SensingOperator op;
  op.kind_ = Kind::Dense;
  op.mode_ = SensingMode::Bernoulli;
  op.rows_n_ = rows;
  op.cols_ = cols;
  op.seed_ = seed;
  op.dense_ = fill_dense(rows, cols, seed, /*gaussian=*/false);
  return op;
}

const std::vector<std::size_t>& SensingOperator::dft_rows() const {
  if (kind_ == Kind::Dense) throw std::invalid_argument("SensingOperator: dense operator has no DFT rows");
  return dft_->rows();
}

ComplexSignal SensingOperator::forward(const ComplexSignal& x) const {
  if (x.size() != cols_) throw std::invalid_argument("SensingOperator::forward: size mismatch");
  switch (kind_) {
    case Kind::Dft:
      return dft_->forward(x);
    case Kind::AnchoredDft: {
      ComplexSignal tail = dft_->forward(x);
      ComplexSignal out;
      out.reserve(tail.size() + 1);
      out.push_back(x[0] / std::sqrt(static_cast<double>(cols_)));
      out.insert(out.end(), tail.begin(), tail.end());
      return out;
    }
    case Kind::Dense: {
      const std::vector<Complex>& a = *dense_;
      ComplexSignal out(rows_n_, Complex(0.0, 0.0));
      for (std::size_t r = 0; r < rows_n_; ++r) {
        Complex acc(0.0, 0.0);
        const Complex* row = a.data() + r * cols_;
        for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * x[c];
        out[r] = acc;
      }
      return out;
    }
  }
  throw std::logic_error("SensingOperator::forward: bad kind");
}

ComplexSignal SensingOperator::adjoint(const ComplexSignal& v) const {
  if (v.size() != rows_n_) throw std::invalid_argument("SensingOperator::adjoint: size mismatch");
  switch (kind_) {
    case Kind::Dft:
      return dft_->adjoint(v);
    case Kind::AnchoredDft: {
      ComplexSignal tail(v.begin() + 1, v.end());
      ComplexSignal out = dft_->adjoint(tail);
      out[0] += v[0] / std::sqrt(static_cast<double>(cols_));
      return out;
    }
    case Kind::Dense: {
      const std::vector<Complex>& a = *dense_;
      ComplexSignal out(cols_, Complex(0.0, 0.0));
      for (std::size_t r = 0; r < rows_n_; ++r) {
        const Complex* row = a.data() + r * cols_;
        const Complex vr = v[r];
        for (std::size_t c = 0; c < cols_; ++c) out[c] += std::conj(row[c]) * vr;
      }
      return out;
    }
  }
  throw std::logic_error("SensingOperator::adjoint: bad kind");
}

void validate_values(const IntensityMeasurements& m) {
  if (m.blocks == 0) throw std::invalid_argument("measurements: blocks must be positive");
  if (m.values.size() != 4 * m.blocks)
    throw std::invalid_argument("measurements: expected 4 * blocks values");
  for (double v : m.values) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("measurements: intensities must be finite and nonnegative");
  }
  if (!(m.sigma2 >= 0.0) || !std::isfinite(m.sigma2))
    throw std::invalid_argument("measurements: noise variance must be finite and nonnegative");
}

void validate(const IntensityMeasurements& m) {
  validate_values(m);
  if (m.mode == SensingMode::Fourier) {
    if (m.n == 0) throw std::invalid_argument("measurements: dimension must be positive");
    if (m.sampling.size() != m.blocks)
      throw std::invalid_argument("measurements: sampling size must equal blocks");
    std::size_t prev = 0;
    bool first = true;
    for (std::size_t r : m.sampling) {
      if (r >= m.n) throw std::invalid_argument("measurements: sampling index out of range");
      if (!first && r <= prev)
        throw std::invalid_argument("measurements: sampling must be strictly increasing");
      prev = r;
      first = false;
    }
  } else {
    if (m.n == 0) throw std::invalid_argument("measurements: dimension must be positive");
    if (!m.sampling.empty())
      throw std::invalid_argument("measurements: dense modes carry no sampling set");
  }
}

IntensityMeasurements measure_fourier(const ComplexSignal& x, const MaskSet& masks,
                                      const std::vector<std::size_t>& sampling,
                                      double sigma_nu, Rng& rng) {
  if (x.empty()) throw std::invalid_argument("measure_fourier: empty signal");
  if (masks.n != x.size()) throw std::invalid_argument("measure_fourier: mask dimension mismatch");
  if (sampling.empty()) throw std::invalid_argument("measure_fourier: empty sampling set");
  if (!(sigma_nu >= 0.0)) throw std::invalid_argument("measure_fourier: negative noise level");

  const DftOperator dft(x.size(), sampling);  // validates the sampling set
  IntensityMeasurements out;
  out.mode = SensingMode::Fourier;
  out.n = x.size();
  out.blocks = sampling.size();
  out.sampling = sampling;
  out.sigma2 = sigma_nu * sigma_nu;
  out.values.resize(4 * out.blocks);

  ComplexSignal masked(x.size());
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) masked[i] = x[i] * masks.p[s][i];
    const ComplexSignal spectrum = dft.forward(masked);
    for (std::size_t l = 0; l < out.blocks; ++l) {
      Complex v = spectrum[l];
      if (sigma_nu > 0.0) v += sigma_nu * rng.complex_gaussian();
      out.at(s, l) = std::norm(v);
    }
  }
  return out;
}

IntensityMeasurements measure_fourier(const ComplexSignal& x, const MaskSet& masks,
                                      const std::vector<std::size_t>& sampling) {
  Rng unused(0);
  return measure_fourier(x, masks, sampling, 0.0, unused);
}

IntensityMeasurements measure_vectors(const ComplexSignal& y) {
  if (y.size() < 2) throw std::invalid_argument("measure_vectors: sketch needs at least 2 entries");
  const MaskConstants& c = mask_constants();
  IntensityMeasurements out;
  out.blocks = y.size() - 1;
  out.values.resize(4 * out.blocks);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t l = 0; l < out.blocks; ++l)
      out.at(s, l) = std::norm(c.a[s] * y[0] + c.b[s] * y[l + 1]);
  return out;
}

IntensityMeasurements measure_operator(const ComplexSignal& x, const SensingOperator& op) {
  if (op.rows() < 2) throw std::invalid_argument("measure_operator: sketch needs at least 2 rows");
  if (op.mode() == SensingMode::Fourier && !op.anchored())
    throw std::invalid_argument("measure_operator: Fourier sketches must carry the anchor row");
  IntensityMeasurements out = measure_vectors(op.forward(x));
  out.mode = op.mode();
  out.n = op.cols();
  out.seed = op.seed();
  if (op.anchored()) out.sampling = op.dft_rows();
  return out;
}

namespace {

double masked_signal_energy(const ComplexSignal& x, const MaskSet& masks,
                            const std::vector<std::size_t>& sampling) {
  const DftOperator dft(x.size(), sampling);
  ComplexSignal masked(x.size());
  double energy = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) masked[i] = x[i] * masks.p[s][i];
    energy += norm2_squared(dft.forward(masked));
  }
  return energy;
}

}  // namespace

double snr_db(const ComplexSignal& x, const MaskSet& masks,
              const std::vector<std::size_t>& sampling, double sigma_nu) {
  if (x.empty() || masks.n != x.size()) throw std::invalid_argument("snr_db: dimension mismatch");
  if (!(sigma_nu > 0.0)) throw std::invalid_argument("snr_db: noise level must be positive");
  const double s = masked_signal_energy(x, masks, sampling);
  if (!(s > 0.0)) throw std::invalid_argument("snr_db: signal has no energy on the sampling set");
  const double e = 4.0 * static_cast<double>(sampling.size()) * sigma_nu * sigma_nu;
  return 10.0 * std::log10(s / e);
}

double sigma_for_snr(const ComplexSignal& x, const MaskSet& masks,
                     const std::vector<std::size_t>& sampling, double target_snr_db) {
  if (x.empty() || masks.n != x.size())
    throw std::invalid_argument("sigma_for_snr: dimension mismatch");
  if (!std::isfinite(target_snr_db)) throw std::invalid_argument("sigma_for_snr: bad target");
  const double s = masked_signal_energy(x, masks, sampling);
  if (!(s > 0.0))
    throw std::invalid_argument("sigma_for_snr: signal has no energy on the sampling set");
  const double e = s / std::pow(10.0, target_snr_db / 10.0);
  return std::sqrt(e / (4.0 * static_cast<double>(sampling.size())));
}

}  // namespace cpr
