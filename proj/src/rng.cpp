#include "brasp/rng.hpp"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cstring>

#include "brasp/error.hpp"

namespace brasp {

Rng Rng::from_os() {
  std::array<std::uint8_t, kKeySize> key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
    throw CryptoError("operating system randomness unavailable");
  }
  return Rng(key);
}

Rng Rng::from_seed(std::uint64_t seed) {
  ByteWriter w;
  w.str("brasp-rng-seed");
  w.u64(seed);
  std::array<std::uint8_t, kKeySize> key{};
  SHA256(w.bytes().data(), w.size(), key.data());
  return Rng(key);
}

Rng Rng::from_key(const std::array<std::uint8_t, kKeySize>& key) { return Rng(key); }

Rng Rng::derive(std::string_view label) const {
  ByteWriter w;
  w.raw(key_);
  w.str(label);
  std::array<std::uint8_t, kKeySize> key{};
  SHA256(w.bytes().data(), w.size(), key.data());
  return Rng(key);
}

void Rng::refill() {
  std::uint8_t input[kKeySize + 8];
  std::memcpy(input, key_.data(), kKeySize);
  for (int i = 0; i < 8; ++i) input[kKeySize + i] = static_cast<std::uint8_t>(counter_ >> (56 - 8 * i));
  SHA256(input, sizeof(input), block_.data());
  ++counter_;
  offset_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (offset_ >= block_.size()) refill();
    std::size_t take = std::min<std::size_t>(block_.size() - offset_, out.size() - done);
    std::memcpy(out.data() + done, block_.data() + offset_, take);
    offset_ += static_cast<std::uint32_t>(take);
    done += take;
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::next_u64() {
  std::uint8_t buf[8];
  fill(buf);
  std::uint64_t v = 0;
  for (std::uint8_t b : buf) v = (v << 8) | b;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform bound must be nonzero");
  // Largest multiple of bound representable; values above it are rejected.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

void Rng::serialize(ByteWriter& w) const {
  w.raw(key_);
  w.u64(counter_);
  w.u32(offset_);
}

Rng Rng::deserialize(ByteReader& r) {
  std::array<std::uint8_t, kKeySize> key{};
  Bytes k = r.raw(kKeySize);
  std::copy(k.begin(), k.end(), key.begin());
  Rng rng(key);
  std::uint64_t counter = r.u64();
  std::uint32_t offset = r.u32();
  if (offset > 32) throw IoError("corrupt generator state");
  if (offset < 32) {
    // Regenerate the partially consumed block.
    if (counter == 0) throw IoError("corrupt generator state");
    rng.counter_ = counter - 1;
    rng.refill();
  } else {
    rng.counter_ = counter;
  }
  rng.offset_ = offset;
  return rng;
}

}  // namespace brasp
