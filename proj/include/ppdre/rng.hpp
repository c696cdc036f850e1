#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ppdre {

/// Deterministic random stream. The algorithm is pinned and must never
/// change: golden tests and every benchmark seed depend on the exact
/// sequence. State is xoshiro256++, seeded from a 64-bit seed expanded by
/// splitmix64. Uniform doubles take the top 53 bits; normals come from a
/// Box-Muller pair with the second value cached; bounded integers use the
/// multiply-shift reduction.
///
/// Streams are never shared: to parallelize, derive an independent child
/// with split(stream_id). Children are keyed by (seed, stream_id) only, so
/// the same ids give the same child no matter which thread asks.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal draw.
  double normal();
  /// Uniform integer in [0, n); n must be nonzero.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Fisher-Yates permutation of {0, ..., n-1}.
  std::vector<std::size_t> permutation(std::size_t n);

  /// Independent child stream identified by (seed, stream_id).
  SeededRng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// splitmix64 step; used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stable seed for a worker task, keyed by indices rather than schedule.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace ppdre
