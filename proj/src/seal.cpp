#include "brasp/seal.hpp"

#include <openssl/evp.h>

#include <memory>

#include "brasp/error.hpp"

namespace brasp {

namespace {

constexpr std::size_t kNonce = 12;
constexpr std::size_t kTag = 16;

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

void check_key(const ObjectKey& key) {
  if (key.bytes.size() != 32) throw InvalidArgument("object key must be 32 bytes");
}

}  // namespace

Bytes object_seal(const ObjectKey& key, ByteView plaintext, Rng& rng) {
  check_key(key);
  Bytes out = rng.bytes(kNonce);
  out.resize(kNonce + plaintext.size() + kTag);
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  bool ok = ctx && EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(),
                                      out.data()) == 1;
  ok = ok && EVP_EncryptUpdate(ctx.get(), out.data() + kNonce, &len, plaintext.data(),
                               static_cast<int>(plaintext.size())) == 1;
  ok = ok && EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonce + len, &len) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTag,
                                 out.data() + kNonce + plaintext.size()) == 1;
  if (!ok) throw CryptoError("object sealing failed");
  return out;
}

Bytes object_open(const ObjectKey& key, ByteView sealed) {
  check_key(key);
  if (sealed.size() < kNonce + kTag) throw CryptoError("sealed object too short");
  std::size_t body = sealed.size() - kNonce - kTag;
  Bytes out(body);
  Bytes tag(sealed.end() - kTag, sealed.end());
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  bool ok = ctx && EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.bytes.data(),
                                      sealed.data()) == 1;
  ok = ok && EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data() + kNonce,
                               static_cast<int>(body)) == 1;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTag, tag.data()) == 1;
  ok = ok && EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &len) == 1;
  if (!ok) throw CryptoError("object authentication failed");
  return out;
}

}  // namespace brasp
