#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cpr {

using Complex = std::complex<double>;

/// Dense complex vector; signals, spectra and solver iterates all live here.
using ComplexSignal = std::vector<Complex>;

/// Thrown when measured data is inconsistent with the signal model the
/// algebraic stage relies on (e.g. the anchor entry of the signal vanishes,
/// so no phase reference exists).  Distinct from std::invalid_argument,
/// which covers malformed inputs such as size mismatches.
class ModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse signal embedded in C^n: dense storage plus its support (0-based,
/// strictly increasing).
struct SparseSignal {
  ComplexSignal values;
  std::vector<std::size_t> support;
};

inline double norm2_squared(const ComplexSignal& x) {
  double s = 0.0;
  for (const Complex& v : x) s += std::norm(v);
  return s;
}

inline double norm2(const ComplexSignal& x) { return std::sqrt(norm2_squared(x)); }

inline double norm1(const ComplexSignal& x) {
  double s = 0.0;
  for (const Complex& v : x) s += std::abs(v);
  return s;
}

inline double norm_inf(const ComplexSignal& x) {
  double m = 0.0;
  for (const Complex& v : x) m = std::max(m, std::abs(v));
  return m;
}

/// sum_n a[n] * conj(b[n]); sizes must match.
inline Complex inner(const ComplexSignal& a, const ComplexSignal& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

inline bool all_finite(const ComplexSignal& x) {
  for (const Complex& v : x)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

}  // namespace cpr
