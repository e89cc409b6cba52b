#pragma once

#include <gmpxx.h>

#include <cstddef>

#include "brasp/bytes.hpp"
#include "brasp/rng.hpp"

namespace brasp {

// Fixed-width big-endian encoding; throws InvalidArgument if `v` is negative
// or does not fit in `width` bytes.
Bytes mpz_to_bytes(const mpz_class& v, std::size_t width);
mpz_class mpz_from_bytes(ByteView data);

// Minimal big-endian encoding (at least one byte).
Bytes mpz_to_bytes(const mpz_class& v);

std::size_t byte_length(const mpz_class& v);

// Uniform in [0, bound).
mpz_class random_below(Rng& rng, const mpz_class& bound);
// Uniform in [1, bound).
mpz_class random_nonzero_below(Rng& rng, const mpz_class& bound);
// Uniform with exactly `bits` random bits (value < 2^bits).
mpz_class random_bits(Rng& rng, std::size_t bits);

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod);
mpz_class invert(const mpz_class& v, const mpz_class& mod);

// Length-prefixed signed integer encoding used in persistence.
void write_mpz(ByteWriter& w, const mpz_class& v);
mpz_class read_mpz(ByteReader& r);

}  // namespace brasp
