#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "cpr/types.hpp"

namespace cpr {

/// splitmix64 finalizer: bijective 64-bit mixer with good avalanche.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed, a short role label
/// ("signal", "noise", ...) and optional integer coordinates (grid indices,
/// trial number).  The derivation depends only on its arguments, never on
/// evaluation order, so grids can be re-partitioned or run in parallel
/// without changing any per-trial stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                          std::initializer_list<std::uint64_t> coords = {});

/// Seeded random source with explicitly pinned-down distributions.  The
/// standard library leaves normal_distribution and shuffle implementation
/// defined, so every draw here is spelled out to keep byte-identical output
/// across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller (pairs cached, so draw order matters).
  double gaussian();

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  Complex complex_gaussian();

  /// Uniform integer in [0, bound); rejection sampled, bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  /// k distinct indices from {0, ..., n-1}, returned sorted.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Placement policy for the anchor entry (index 0) of a random sparse signal.
///  - Uniform:    support drawn uniformly; index 0 may or may not be hit.
///  - InSupport:  index 0 forced into the support, value drawn like the rest.
///  - FixedUnit:  index 0 in the support with |value| = 1 (random phase).
enum class FirstEntryMode { Uniform, InSupport, FixedUnit };

/// k-sparse signal in C^n with CN(0,1) nonzeros.  Requires 1 <= k <= n.
SparseSignal random_sparse_signal(std::size_t n, std::size_t k, Rng& rng,
                                  FirstEntryMode mode = FirstEntryMode::Uniform);

}  // namespace cpr
