#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>

#include "brasp/bytes.hpp"

namespace brasp {

namespace detail {
class GroupBackend;
}

// A cyclic group of prime order q with a fixed generator. Elements travel as
// fixed-width byte strings so that labels compare and serialize bit-exactly.
//
// Two instantiations exist: a Schnorr subgroup of Z_p^* (used for the tiny
// exhaustively testable group of order 11 inside Z_23^*) and the NIST P-256
// curve for production-strength labels. Hash-to-group is g^(SHA-256(m) mod q)
// in both.
class Group {
 public:
  enum class Kind : std::uint8_t { kModp = 1, kP256 = 2 };

  // P-256.
  Group();

  // Order-11 subgroup of Z_23^* generated by 2.
  static Group toy();
  // Subgroup of order q in Z_p^* generated by g. Validates q prime, q | p-1
  // and ord(g) = q.
  static Group modp(const mpz_class& p, const mpz_class& q, const mpz_class& g);
  static Group p256();
  // Supported security level: 128 bits (P-256, 256-bit order).
  static Group for_security(unsigned bits);

  Kind kind() const;
  std::string name() const;
  const mpz_class& order() const;
  std::size_t element_size() const;

  Bytes identity() const;
  Bytes pow_generator(const mpz_class& exponent) const;
  // Throws CryptoError if `element` is not a valid encoding of a group element.
  Bytes pow(ByteView element, const mpz_class& exponent) const;
  bool is_element(ByteView element) const;

  mpz_class hash_to_exponent(ByteView message) const;
  Bytes hash_to_group(ByteView message) const;

  void serialize(ByteWriter& w) const;
  static Group deserialize(ByteReader& r);

  friend bool operator==(const Group& a, const Group& b);

 private:
  explicit Group(std::shared_ptr<const detail::GroupBackend> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const detail::GroupBackend> impl_;
};

}  // namespace brasp
