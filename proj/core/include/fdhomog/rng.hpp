#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fdh {

/// Philox4x32-10 counter-based generator.
///
/// A (key, stream) pair names an independent sequence: the 128-bit counter
/// holds the stream id in its upper 64 bits and the block index in its lower
/// 64 bits, so streams never overlap and any stream can be created directly
/// without advancing a shared generator. Satisfies UniformRandomBitGenerator.
class PhiloxEngine {
 public:
  using result_type = std::uint32_t;

  explicit PhiloxEngine(std::uint64_t key, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_(stream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (index_ == 4) {
      refill();
    }
    return buffer_[index_++];
  }

  /// Skips count outputs.
  void discard(std::uint64_t count) noexcept {
    while (count > 0) {
      if (index_ == 4) {
        refill();
      }
      ++index_;
      --count;
    }
  }

  /// One 128-bit output block for the given counter, exposed for testing
  /// against published known-answer vectors.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

  void refill() noexcept {
    const std::array<std::uint32_t, 4> counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                               static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = block(counter, key_);
    ++block_;
    index_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int index_ = 4;
};

/// Stream id for replicate `replicate` of cell `cell`.
[[nodiscard]] constexpr std::uint64_t stream_id(std::uint32_t cell, std::uint32_t replicate) noexcept {
  return (static_cast<std::uint64_t>(cell) << 32) | replicate;
}

}  // namespace fdh
