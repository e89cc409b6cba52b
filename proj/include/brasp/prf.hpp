#pragma once

#include <array>
#include <cstdint>

#include "brasp/bytes.hpp"
#include "brasp/rng.hpp"

namespace brasp {

inline constexpr std::size_t kTagSize = 16;
inline constexpr std::size_t kPrfKeySize = 32;

struct TagKey {
  Bytes bytes;
  static TagKey generate(Rng& rng) { return TagKey{rng.bytes(kPrfKeySize)}; }
  friend bool operator==(const TagKey&, const TagKey&) = default;
};

struct Tag {
  std::array<std::uint8_t, kTagSize> bytes{};
  ByteView view() const { return bytes; }
  friend bool operator==(const Tag&, const Tag&) = default;
  friend auto operator<=>(const Tag&, const Tag&) = default;
};

// Domains used by the scheme. Sides 1 and 2 double as the per-server tag
// domains F(k_T, (i, x)).
enum class PrfDomain : std::uint8_t {
  kSide1 = 1,
  kSide2 = 2,
  kChain = 3,
  kPosition = 4,
};

// HMAC-SHA256(key, domain || input) truncated to 128 bits.
Tag prf_eval(ByteView key, PrfDomain domain, ByteView input);
inline Tag prf_eval(const TagKey& key, PrfDomain domain, ByteView input) {
  return prf_eval(key.bytes, domain, input);
}

// One server hop of the tag chain: F(tau, r).
Tag tag_step(const Tag& tau, ByteView r);

// Applies `rounds` full shuffle rounds starting from tau. A round for side 1
// is tau <- F(F(tau, r2), r1); for side 2 the parameters swap order, matching
// which server performs each hop.
Tag tag_chain(const Tag& base, int side, ByteView r1, ByteView r2, std::uint64_t rounds);

}  // namespace brasp
