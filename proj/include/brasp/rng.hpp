#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "brasp/bytes.hpp"

namespace brasp {

// Counter-mode generator: block i is SHA-256(key || i). Seeded from the OS
// CSPRNG in production, or from an explicit seed for reproducible runs. The
// full position is serializable so a persisted simulation resumes the exact
// stream.
class Rng {
 public:
  static constexpr std::size_t kKeySize = 32;

  // Seeded from the operating system (OpenSSL RAND_bytes).
  static Rng from_os();
  // Deterministic stream for tests and reproducible transcripts.
  static Rng from_seed(std::uint64_t seed);
  static Rng from_key(const std::array<std::uint8_t, kKeySize>& key);

  // Independent child stream; the parent's position is not advanced.
  Rng derive(std::string_view label) const;

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  // Uniform in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);
  bool coin() { return (next_u64() & 1U) != 0; }

  void serialize(ByteWriter& w) const;
  static Rng deserialize(ByteReader& r);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.key_ == b.key_ && a.counter_ == b.counter_ && a.offset_ == b.offset_;
  }

 private:
  explicit Rng(const std::array<std::uint8_t, kKeySize>& key) : key_(key) {}
  void refill();

  std::array<std::uint8_t, kKeySize> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  // Bytes of block_ already consumed; 32 forces a refill.
  std::uint32_t offset_ = 32;
};

// Fisher-Yates with the project generator so permutations are reproducible
// across standard-library implementations.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace brasp
