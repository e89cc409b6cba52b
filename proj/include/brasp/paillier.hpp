#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <utility>

#include "brasp/bytes.hpp"
#include "brasp/rng.hpp"

namespace brasp {

struct PaillierPublicKey {
  mpz_class n;
  mpz_class n_squared;

  std::size_t modulus_bits() const { return mpz_sizeinbase(n.get_mpz_t(), 2); }
  std::size_t modulus_bytes() const { return (modulus_bits() + 7) / 8; }
  // Ciphertexts are residues mod n^2 encoded in 2 * |n| bytes.
  std::size_t ciphertext_bytes() const { return 2 * modulus_bytes(); }

  friend bool operator==(const PaillierPublicKey& a, const PaillierPublicKey& b) {
    return a.n == b.n;
  }
};

struct PaillierSecretKey {
  mpz_class p;
  mpz_class q;
  mpz_class lambda;  // lcm(p-1, q-1)
  mpz_class mu;      // lambda^-1 mod n
  // Combined exponent: d = 0 mod lambda, d = 1 mod n. C^d = 1 + m*n mod n^2.
  mpz_class d;
};

struct PaillierKeyPair {
  PaillierPublicKey pub;
  PaillierSecretKey sec;
};

// One additive share of the combined exponent d. Index is 1 or 2.
struct PartialDecKey {
  mpz_class share;
  std::uint8_t index = 0;
};

struct PaillierCiphertext {
  mpz_class value;
  friend bool operator==(const PaillierCiphertext&, const PaillierCiphertext&) = default;
};

// C^{d_i} together with C itself, so the holder of the complementary share can
// finish decryption without a second round trip.
struct PartialDecryption {
  PaillierCiphertext original;
  mpz_class partial;
  std::uint8_t index = 0;
};

// Supported sizes: 512 (tests), 1024, 2048 (default).
PaillierKeyPair tur_setup(unsigned bits, Rng& rng);
// Builds a key pair from explicit primes; used for the n = 35 exhaustive tests.
PaillierKeyPair paillier_from_primes(const mpz_class& p, const mpz_class& q);

std::pair<PartialDecKey, PartialDecKey> tur_keygen(const PaillierKeyPair& kp, Rng& rng);

PaillierCiphertext tur_enc(const mpz_class& m, const PaillierPublicKey& pk, Rng& rng);
// Same distribution as tur_enc; r^n is computed mod p^2 and q^2 and recombined.
PaillierCiphertext tur_enc(const mpz_class& m, const PaillierKeyPair& kp, Rng& rng);
// C * Enc(0).
PaillierCiphertext tur_reenc(const PaillierCiphertext& c, const PaillierPublicKey& pk, Rng& rng);
// Enc(a) * Enc(b) = Enc(a + b).
PaillierCiphertext tur_add(const PaillierCiphertext& a, const PaillierCiphertext& b,
                           const PaillierPublicKey& pk);

PartialDecryption tur_pdec(const PaillierCiphertext& c, const PartialDecKey& key,
                           const PaillierPublicKey& pk);
// Throws ProtocolError when both shares carry the same index and CryptoError
// when the combination does not yield a valid plaintext encoding.
mpz_class tur_dec(const PartialDecryption& pd, const PartialDecKey& key,
                  const PaillierPublicKey& pk);

// Single-key decryption with lambda and mu (data owner only).
mpz_class paillier_decrypt(const PaillierCiphertext& c, const PaillierKeyPair& kp);

bool is_valid_ciphertext(const PaillierCiphertext& c, const PaillierPublicKey& pk);

Bytes encode_ciphertext(const PaillierCiphertext& c, const PaillierPublicKey& pk);
PaillierCiphertext decode_ciphertext(ByteView data, const PaillierPublicKey& pk);

void write_public_key(ByteWriter& w, const PaillierPublicKey& pk);
PaillierPublicKey read_public_key(ByteReader& r);
void write_key_pair(ByteWriter& w, const PaillierKeyPair& kp);
PaillierKeyPair read_key_pair(ByteReader& r);
void write_partial_key(ByteWriter& w, const PartialDecKey& key);
PartialDecKey read_partial_key(ByteReader& r);

}  // namespace brasp
