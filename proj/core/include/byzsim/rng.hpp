#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace byzsim {

/// splitmix64 finalizer over (master_seed, stream_id). Frozen: changing it
/// changes every simulated data set.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

/// Deterministic random stream. Child streams depend only on
/// (seed, stream_id), never on how much of the parent has been consumed,
/// so results do not depend on execution order or thread count.
///
/// Built on std::mt19937_64 (whose output sequence is fixed by the
/// standard) with hand-written uniform/normal transforms, so sampled data
/// is bit-identical across standard library implementations.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  SeededRng stream(std::uint64_t stream_id) const {
    return SeededRng(derive_seed(seed_, stream_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal draw (Marsaglia polar method).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace byzsim
