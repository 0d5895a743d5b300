#include "cpr/dft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpr {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void validate_rows(std::size_t n, const std::vector<std::size_t>& rows) {
  if (rows.empty()) throw std::invalid_argument("DftOperator: empty sampling set");
  std::size_t prev = 0;
  bool first = true;
  for (std::size_t r : rows) {
    if (r >= n) throw std::invalid_argument("DftOperator: sampling index out of range");
    if (!first && r <= prev) throw std::invalid_argument("DftOperator: sampling set must be strictly increasing");
    prev = r;
    first = false;
  }
}

}  // namespace

DftOperator::DftOperator(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("DftOperator: dimension must be positive");
  pow2_ = is_pow2(n);
  if (pow2_) init_fft_tables();
}

DftOperator::DftOperator(std::size_t n, std::vector<std::size_t> rows) : DftOperator(n) {
  validate_rows(n, rows);
  rows_ = std::move(rows);
  restricted_ = true;
}

void DftOperator::init_fft_tables() {
  twiddle_.resize(n_ / 2);
  for (std::size_t j = 0; j < n_ / 2; ++j) {
    const double t = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
    twiddle_[j] = Complex(std::cos(t), std::sin(t));
  }
  bitrev_.resize(n_);
  std::uint32_t bits = 0;
  while ((std::size_t{1} << bits) < n_) ++bits;
  for (std::size_t i = 0; i < n_; ++i) {
    std::uint32_t r = 0;
    for (std::uint32_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::uint32_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
}

void DftOperator::fft(std::vector<Complex>& a, bool inverse) const {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t step = n / len;
    for (std::size_t blk = 0; blk < n; blk += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex w = twiddle_[j * step];
        if (inverse) w = std::conj(w);
        const Complex u = a[blk + j];
        const Complex v = a[blk + j + len / 2] * w;
        a[blk + j] = u + v;
        a[blk + j + len / 2] = u - v;
      }
    }
  }
}

ComplexSignal DftOperator::full_forward(const ComplexSignal& x, bool inverse) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  if (pow2_) {
    std::vector<Complex> a(x);
    fft(a, inverse);
    for (Complex& v : a) v *= scale;
    return a;
  }
  // Direct evaluation; used only for non-power-of-two sizes.
  ComplexSignal out(n_, Complex(0.0, 0.0));
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t m = 0; m < n_; ++m) {
    Complex acc(0.0, 0.0);
    for (std::size_t k = 0; k < n_; ++k) {
      // Reduce m*k mod n before forming the angle to keep precision at
      // large sizes.
      const std::size_t mk = (m * k) % n_;
      const double t = sign * 2.0 * std::numbers::pi * static_cast<double>(mk) / static_cast<double>(n_);
      acc += x[k] * Complex(std::cos(t), std::sin(t));
    }
    out[m] = acc * scale;
  }
  return out;
}

ComplexSignal DftOperator::forward(const ComplexSignal& x) const {
  if (x.size() != n_) throw std::invalid_argument("DftOperator::forward: size mismatch");
  ComplexSignal full = full_forward(x, /*inverse=*/false);
  if (!restricted_) return full;
  ComplexSignal out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = full[rows_[i]];
  return out;
}

ComplexSignal DftOperator::adjoint(const ComplexSignal& v) const {
  if (v.size() != output_length()) throw std::invalid_argument("DftOperator::adjoint: size mismatch");
  if (!restricted_) return full_forward(v, /*inverse=*/true);
  ComplexSignal scattered(n_, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < rows_.size(); ++i) scattered[rows_[i]] = v[i];
  return full_forward(scattered, /*inverse=*/true);
}

}  // namespace cpr
