#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mfou {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// A block is a pure function of (counter, key), so any replication can be
/// regenerated without replaying the ones before it.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

std::uint64_t splitmix64(std::uint64_t x);

/// Standard normal variates for one (seed, stream) pair. Streams are
/// replication indices; draws within a stream are consumed sequentially.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  double next();
  void fill(std::span<double> out);

 private:
  void refill();

  Philox4x32::Key key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<double, 2> cache_{};
  int cached_ = 0;
};

}  // namespace mfou
