#include "brasp/bigint.hpp"

#include <openssl/bn.h>

#include <array>
#include <memory>

#include "brasp/error.hpp"

namespace brasp {

namespace {

struct BnFree {
  void operator()(BIGNUM* b) const { BN_free(b); }
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
  void operator()(BN_MONT_CTX* m) const { BN_MONT_CTX_free(m); }
};

std::unique_ptr<BIGNUM, BnFree> to_bn(const mpz_class& v) {
  Bytes b = mpz_to_bytes(v);
  BIGNUM* out = BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr);
  if (out == nullptr) throw CryptoError("bignum allocation failed");
  return std::unique_ptr<BIGNUM, BnFree>(out);
}

mpz_class from_bn(const BIGNUM* v) {
  Bytes b(static_cast<std::size_t>(BN_num_bytes(v)));
  BN_bn2bin(v, b.data());
  return mpz_from_bytes(b);
}

// Montgomery contexts for the few large odd moduli in use (n^2, group primes).
// GMP's generic powm is noticeably slower than OpenSSL's at these sizes.
struct MontSlot {
  mpz_class mod;
  std::unique_ptr<BIGNUM, BnFree> bn_mod;
  std::unique_ptr<BN_MONT_CTX, BnFree> mont;
};

struct MontCache {
  std::array<MontSlot, 4> slots;
  std::size_t next = 0;
  std::unique_ptr<BN_CTX, BnFree> ctx{BN_CTX_new()};

  MontSlot& get(const mpz_class& mod) {
    for (MontSlot& s : slots) {
      if (s.mont && s.mod == mod) return s;
    }
    MontSlot& s = slots[next];
    next = (next + 1) % slots.size();
    s.mod = mod;
    s.bn_mod = to_bn(mod);
    s.mont.reset(BN_MONT_CTX_new());
    if (!s.mont || BN_MONT_CTX_set(s.mont.get(), s.bn_mod.get(), ctx.get()) != 1) {
      s.mont.reset();
      throw CryptoError("montgomery setup failed");
    }
    return s;
  }
};

mpz_class powm_mont(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  thread_local MontCache cache;
  MontSlot& slot = cache.get(mod);
  auto b = to_bn(base);
  auto e = to_bn(exp);
  std::unique_ptr<BIGNUM, BnFree> out(BN_new());
  if (!out || BN_mod_exp_mont(out.get(), b.get(), e.get(), slot.bn_mod.get(), cache.ctx.get(),
                              slot.mont.get()) != 1) {
    throw CryptoError("modular exponentiation failed");
  }
  return from_bn(out.get());
}

mpz_class powm_plain(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  if (mod > 0 && mpz_odd_p(mod.get_mpz_t()) != 0 && mpz_sizeinbase(mod.get_mpz_t(), 2) >= 256) {
    mpz_class b = base % mod;
    if (b < 0) b += mod;
    return powm_mont(b, exp, mod);
  }
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

}  // namespace

std::size_t byte_length(const mpz_class& v) {
  if (v == 0) return 1;
  return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
}

Bytes mpz_to_bytes(const mpz_class& v, std::size_t width) {
  if (v < 0) throw InvalidArgument("cannot encode a negative integer");
  std::size_t len = v == 0 ? 0 : byte_length(v);
  if (len > width) throw InvalidArgument("integer does not fit the encoding width");
  Bytes out(width, 0);
  if (len > 0) {
    std::size_t written = 0;
    mpz_export(out.data() + (width - len), &written, 1, 1, 1, 0, v.get_mpz_t());
  }
  return out;
}

Bytes mpz_to_bytes(const mpz_class& v) { return mpz_to_bytes(v, byte_length(v)); }

mpz_class mpz_from_bytes(ByteView data) {
  mpz_class v;
  if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

mpz_class random_bits(Rng& rng, std::size_t bits) {
  if (bits == 0) return 0;
  Bytes buf = rng.bytes((bits + 7) / 8);
  std::size_t excess = buf.size() * 8 - bits;
  buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
  return mpz_from_bytes(buf);
}

mpz_class random_below(Rng& rng, const mpz_class& bound) {
  if (bound <= 0) throw InvalidArgument("random bound must be positive");
  std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  for (;;) {
    mpz_class v = random_bits(rng, bits);
    if (v < bound) return v;
  }
}

mpz_class random_nonzero_below(Rng& rng, const mpz_class& bound) {
  if (bound <= 1) throw InvalidArgument("no nonzero value below bound");
  for (;;) {
    mpz_class v = random_below(rng, bound);
    if (v != 0) return v;
  }
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  if (exp < 0) return powm_plain(invert(base, mod), -exp, mod);
  return powm_plain(base, exp, mod);
}

mpz_class invert(const mpz_class& v, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw CryptoError("value is not invertible");
  }
  return out;
}

void write_mpz(ByteWriter& w, const mpz_class& v) {
  w.u8(v < 0 ? 1 : 0);
  mpz_class mag = abs(v);
  w.blob(mpz_to_bytes(mag));
}

mpz_class read_mpz(ByteReader& r) {
  std::uint8_t sign = r.u8();
  if (sign > 1) throw IoError("corrupt integer sign");
  mpz_class v = mpz_from_bytes(r.blob());
  return sign ? mpz_class(-v) : v;
}

}  // namespace brasp
