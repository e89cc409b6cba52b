#include "brasp/prf.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <algorithm>

#include "brasp/error.hpp"

namespace brasp {

Tag prf_eval(ByteView key, PrfDomain domain, ByteView input) {
  Bytes message;
  message.reserve(input.size() + 1);
  message.push_back(static_cast<std::uint8_t>(domain));
  message.insert(message.end(), input.begin(), input.end());
  std::uint8_t digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
           digest, &len) == nullptr) {
    throw CryptoError("HMAC failed");
  }
  Tag tag;
  std::copy_n(digest, kTagSize, tag.bytes.begin());
  return tag;
}

Tag tag_step(const Tag& tau, ByteView r) { return prf_eval(tau.view(), PrfDomain::kChain, r); }

Tag tag_chain(const Tag& base, int side, ByteView r1, ByteView r2, std::uint64_t rounds) {
  if (side != 1 && side != 2) throw InvalidArgument("side must be 1 or 2");
  ByteView first = side == 1 ? r2 : r1;
  ByteView second = side == 1 ? r1 : r2;
  Tag tau = base;
  for (std::uint64_t i = 0; i < rounds; ++i) tau = tag_step(tag_step(tau, first), second);
  return tau;
}

}  // namespace brasp
