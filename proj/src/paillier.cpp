#include "brasp/paillier.hpp"

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

namespace {

constexpr int kPrimeRetries = 64;
constexpr std::size_t kShareSlack = 128;

mpz_class random_prime(Rng& rng, std::size_t bits) {
  mpz_class candidate = random_bits(rng, bits);
  // Top two bits set so the product has exactly 2 * bits bits.
  mpz_setbit(candidate.get_mpz_t(), bits - 1);
  mpz_setbit(candidate.get_mpz_t(), bits - 2);
  mpz_setbit(candidate.get_mpz_t(), 0);
  mpz_class prime;
  mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
  return prime;
}

mpz_class l_function(const mpz_class& x, const mpz_class& n) { return (x - 1) / n; }

}  // namespace

PaillierKeyPair paillier_from_primes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw InvalidArgument("Paillier primes must be distinct");
  if (mpz_probab_prime_p(p.get_mpz_t(), 40) == 0 || mpz_probab_prime_p(q.get_mpz_t(), 40) == 0) {
    throw InvalidArgument("Paillier factors must be prime");
  }
  mpz_class n = p * q;
  mpz_class lambda;
  mpz_class pm1 = p - 1;
  mpz_class qm1 = q - 1;
  mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t());
  if (g != 1) throw InvalidArgument("gcd(lambda, n) must be 1");

  PaillierKeyPair kp;
  kp.pub.n = n;
  kp.pub.n_squared = n * n;
  kp.sec.p = p;
  kp.sec.q = q;
  kp.sec.lambda = lambda;
  kp.sec.mu = invert(lambda, n);
  kp.sec.d = lambda * kp.sec.mu;
  return kp;
}

PaillierKeyPair tur_setup(unsigned bits, Rng& rng) {
  if (bits != 512 && bits != 1024 && bits != 2048) {
    throw InvalidArgument("unsupported Paillier modulus size: " + std::to_string(bits));
  }
  for (int attempt = 0; attempt < kPrimeRetries; ++attempt) {
    mpz_class p = random_prime(rng, bits / 2);
    mpz_class q = random_prime(rng, bits / 2);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    try {
      return paillier_from_primes(p, q);
    } catch (const InvalidArgument&) {
      continue;
    }
  }
  throw CryptoError("Paillier prime generation failed");
}

std::pair<PartialDecKey, PartialDecKey> tur_keygen(const PaillierKeyPair& kp, Rng& rng) {
  const mpz_class& d = kp.sec.d;
  mpz_class d1 = random_bits(rng, mpz_sizeinbase(d.get_mpz_t(), 2) + kShareSlack);
  mpz_class d2 = d - d1;
  return {PartialDecKey{d1, 1}, PartialDecKey{d2, 2}};
}

bool is_valid_ciphertext(const PaillierCiphertext& c, const PaillierPublicKey& pk) {
  if (c.value < 1 || c.value >= pk.n_squared) return false;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.value.get_mpz_t(), pk.n.get_mpz_t());
  return g == 1;
}

PaillierCiphertext tur_enc(const mpz_class& m, const PaillierPublicKey& pk, Rng& rng) {
  if (m < 0 || m >= pk.n) throw InvalidArgument("plaintext out of range");
  mpz_class r;
  for (;;) {
    r = random_nonzero_below(rng, pk.n);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (g == 1) break;
  }
  // (1 + n)^m = 1 + m*n mod n^2.
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  return PaillierCiphertext{(gm * powm(r, pk.n, pk.n_squared)) % pk.n_squared};
}

PaillierCiphertext tur_enc(const mpz_class& m, const PaillierKeyPair& kp, Rng& rng) {
  const PaillierPublicKey& pk = kp.pub;
  if (m < 0 || m >= pk.n) throw InvalidArgument("plaintext out of range");
  mpz_class r;
  for (;;) {
    r = random_nonzero_below(rng, pk.n);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    if (g == 1) break;
  }
  const mpz_class& p = kp.sec.p;
  const mpz_class& q = kp.sec.q;
  const mpz_class p2 = p * p;
  const mpz_class q2 = q * q;
  // x^p mod p^2 depends only on x mod p, so r^n = (r^q mod p)^p mod p^2.
  mpz_class rp = powm(powm(r % p, q % (p - 1), p), p, p2);
  mpz_class rq = powm(powm(r % q, p % (q - 1), q), q, q2);
  // Garner: x = rp + p^2 * ((rq - rp) * (p^2)^-1 mod q^2).
  mpz_class h = ((rq - rp) * invert(p2, q2)) % q2;
  if (h < 0) h += q2;
  mpz_class rn = rp + p2 * h;
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  return PaillierCiphertext{(gm * rn) % pk.n_squared};
}

PaillierCiphertext tur_reenc(const PaillierCiphertext& c, const PaillierPublicKey& pk, Rng& rng) {
  if (!is_valid_ciphertext(c, pk)) throw CryptoError("invalid ciphertext");
  PaillierCiphertext zero = tur_enc(0, pk, rng);
  return PaillierCiphertext{(c.value * zero.value) % pk.n_squared};
}

PaillierCiphertext tur_add(const PaillierCiphertext& a, const PaillierCiphertext& b,
                           const PaillierPublicKey& pk) {
  if (!is_valid_ciphertext(a, pk) || !is_valid_ciphertext(b, pk)) {
    throw CryptoError("invalid ciphertext");
  }
  return PaillierCiphertext{(a.value * b.value) % pk.n_squared};
}

PartialDecryption tur_pdec(const PaillierCiphertext& c, const PartialDecKey& key,
                           const PaillierPublicKey& pk) {
  if (!is_valid_ciphertext(c, pk)) throw CryptoError("invalid ciphertext");
  if (key.index != 1 && key.index != 2) throw InvalidArgument("share index must be 1 or 2");
  return PartialDecryption{c, powm(c.value, key.share, pk.n_squared), key.index};
}

mpz_class tur_dec(const PartialDecryption& pd, const PartialDecKey& key,
                  const PaillierPublicKey& pk) {
  if (pd.index == key.index) throw ProtocolError("partial decryption needs the complementary share");
  if (!is_valid_ciphertext(pd.original, pk)) throw CryptoError("invalid ciphertext");
  if (pd.partial < 1 || pd.partial >= pk.n_squared) throw CryptoError("invalid partial decryption");
  mpz_class x = (pd.partial * powm(pd.original.value, key.share, pk.n_squared)) % pk.n_squared;
  if ((x - 1) % pk.n != 0) throw CryptoError("partial decryptions do not combine");
  return l_function(x, pk.n);
}

mpz_class paillier_decrypt(const PaillierCiphertext& c, const PaillierKeyPair& kp) {
  if (!is_valid_ciphertext(c, kp.pub)) throw CryptoError("invalid ciphertext");
  mpz_class x = powm(c.value, kp.sec.lambda, kp.pub.n_squared);
  return (l_function(x, kp.pub.n) * kp.sec.mu) % kp.pub.n;
}

Bytes encode_ciphertext(const PaillierCiphertext& c, const PaillierPublicKey& pk) {
  return mpz_to_bytes(c.value, pk.ciphertext_bytes());
}

PaillierCiphertext decode_ciphertext(ByteView data, const PaillierPublicKey& pk) {
  if (data.size() != pk.ciphertext_bytes()) throw IoError("ciphertext has wrong width");
  PaillierCiphertext c{mpz_from_bytes(data)};
  if (!is_valid_ciphertext(c, pk)) throw CryptoError("invalid ciphertext");
  return c;
}

void write_public_key(ByteWriter& w, const PaillierPublicKey& pk) { write_mpz(w, pk.n); }

PaillierPublicKey read_public_key(ByteReader& r) {
  PaillierPublicKey pk;
  pk.n = read_mpz(r);
  if (pk.n < 15) throw IoError("corrupt Paillier modulus");
  pk.n_squared = pk.n * pk.n;
  return pk;
}

void write_key_pair(ByteWriter& w, const PaillierKeyPair& kp) {
  write_mpz(w, kp.sec.p);
  write_mpz(w, kp.sec.q);
}

PaillierKeyPair read_key_pair(ByteReader& r) {
  mpz_class p = read_mpz(r);
  mpz_class q = read_mpz(r);
  try {
    return paillier_from_primes(p, q);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("corrupt Paillier key: ") + e.what());
  }
}

void write_partial_key(ByteWriter& w, const PartialDecKey& key) {
  w.u8(key.index);
  write_mpz(w, key.share);
}

PartialDecKey read_partial_key(ByteReader& r) {
  PartialDecKey key;
  key.index = r.u8();
  if (key.index != 1 && key.index != 2) throw IoError("corrupt partial key index");
  key.share = read_mpz(r);
  return key;
}

}  // namespace brasp
