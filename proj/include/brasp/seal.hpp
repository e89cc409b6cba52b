#pragma once

#include "brasp/bytes.hpp"
#include "brasp/rng.hpp"

namespace brasp {

struct ObjectKey {
  Bytes bytes;  // 32 bytes
  static ObjectKey generate(Rng& rng) { return ObjectKey{rng.bytes(32)}; }
  friend bool operator==(const ObjectKey&, const ObjectKey&) = default;
};

// AES-256-GCM. Layout: nonce (12) || ciphertext || tag (16).
Bytes object_seal(const ObjectKey& key, ByteView plaintext, Rng& rng);
// Throws CryptoError on authentication failure.
Bytes object_open(const ObjectKey& key, ByteView sealed);

inline constexpr std::size_t kSealOverhead = 12 + 16;

}  // namespace brasp
