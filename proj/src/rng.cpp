#include "cpr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpr {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                          std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master);
  for (char c : role) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  for (std::uint64_t v : coords) h = mix64(h ^ v);
  return h;
}

double Rng::uniform() {
  // Top 53 bits of the engine output, mapped to [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u is bounded away from 0 so the log stays finite.
  double u = 0.0;
  do {
    u = uniform();
  } while (u == 0.0);
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double t = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

Complex Rng::complex_gaussian() {
  const double re = gaussian();
  const double im = gaussian();
  return Complex(re, im) * std::numbers::sqrt2 / 2.0;  // each part N(0, 1/2)
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Rejection sampling on the top of the range to avoid modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

std::vector<std::size_t> Rng::sample(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("Rng::sample: k exceeds n");
  // Partial Fisher-Yates over an explicit index array; the first k slots end
  // up holding a uniform k-subset.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SparseSignal random_sparse_signal(std::size_t n, std::size_t k, Rng& rng, FirstEntryMode mode) {
  if (k == 0 || k > n) throw std::invalid_argument("random_sparse_signal: need 1 <= k <= n");

  SparseSignal s;
  if (mode == FirstEntryMode::Uniform) {
    s.support = rng.sample(n, k);
  } else {
    // Index 0 is pinned; the remaining k-1 indices are uniform over the rest.
    std::vector<std::size_t> tail = rng.sample(n - 1, k - 1);
    s.support.reserve(k);
    s.support.push_back(0);
    for (std::size_t t : tail) s.support.push_back(t + 1);
  }

  s.values.assign(n, Complex(0.0, 0.0));
  for (std::size_t i : s.support) s.values[i] = rng.complex_gaussian();

  if (mode == FirstEntryMode::FixedUnit) {
    // Unit magnitude, uniform phase.
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    s.values[0] = Complex(std::cos(phi), std::sin(phi));
  } else if (mode == FirstEntryMode::InSupport && std::abs(s.values[0]) == 0.0) {
    // Astronomically unlikely, but the anchor must not vanish.
    s.values[0] = Complex(1.0, 0.0);
  }
  return s;
}

}  // namespace cpr
