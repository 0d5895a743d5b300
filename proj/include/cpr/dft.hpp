#pragma once

#include <cstddef>
#include <vector>

#include "cpr/types.hpp"

namespace cpr {

/// Unitary discrete Fourier transform on C^n with entries
///   F[m][k] = exp(-i 2 pi m k / n) / sqrt(n),   m, k = 0..n-1,
/// optionally restricted to a subset of output rows (a sampling set).
///
/// Power-of-two sizes run through an iterative radix-2 FFT; all other sizes
/// fall back to direct evaluation.  Both paths satisfy the same contracts
/// and agree to rounding error.  Instances are immutable after construction
/// and safe to share across threads.
class DftOperator {
 public:
  /// Full transform: n rows.  Requires n >= 1.
  explicit DftOperator(std::size_t n);

  /// Restricted transform keeping only `rows` (0-based, strictly increasing,
  /// all < n, non-empty).
  DftOperator(std::size_t n, std::vector<std::size_t> rows);

  std::size_t dimension() const { return n_; }
  bool restricted() const { return restricted_; }

  /// Retained output rows; for the full transform this is 0..n-1 implicitly
  /// and the vector is empty.
  const std::vector<std::size_t>& rows() const { return rows_; }
  std::size_t output_length() const { return restricted_ ? rows_.size() : n_; }

  /// y = F x (length n in) -> output_length() values.
  ComplexSignal forward(const ComplexSignal& x) const;

  /// z = F* v (output_length() values in) -> length n.  For a restricted
  /// transform this is the adjoint of the row-restricted matrix: v is
  /// scattered onto the kept rows and the full inverse transform is applied.
  ComplexSignal adjoint(const ComplexSignal& v) const;

 private:
  std::size_t n_;
  bool restricted_ = false;
  bool pow2_ = false;
  std::vector<std::size_t> rows_;
  std::vector<Complex> twiddle_;       // exp(-i 2 pi j / n), j = 0..n/2-1 (fft path)
  std::vector<std::uint32_t> bitrev_;  // bit-reversal permutation (fft path)

  void init_fft_tables();
  void fft(std::vector<Complex>& a, bool inverse) const;
  ComplexSignal full_forward(const ComplexSignal& x, bool inverse) const;
};

}  // namespace cpr
