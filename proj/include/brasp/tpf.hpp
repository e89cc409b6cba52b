#pragma once

#include <gmpxx.h>

#include "brasp/bytes.hpp"
#include "brasp/group.hpp"
#include "brasp/rng.hpp"

namespace brasp {

// Secret exponent in [1, q-1].
struct TpfKey {
  mpz_class value;
  friend bool operator==(const TpfKey&, const TpfKey&) = default;
};

// Key-switching exponent k2 / k1 mod q.
struct ReEncKey {
  mpz_class value;
  friend bool operator==(const ReEncKey&, const ReEncKey&) = default;
};

// Encoded group element H(m)^k. Fixed width for a given group.
struct TpfLabel {
  Bytes bytes;
  friend bool operator==(const TpfLabel&, const TpfLabel&) = default;
  friend auto operator<=>(const TpfLabel&, const TpfLabel&) = default;
};

TpfKey tpf_keygen(const Group& group, Rng& rng);

// H(m)^k, computed as g^(h(m) * k mod q).
TpfLabel tpf_rnd(const Group& group, const TpfKey& key, ByteView message);

ReEncKey tpf_reckeygen(const Group& group, const TpfKey& from, const TpfKey& to);

// s^rk. Maps tpf_rnd(k1, m) to tpf_rnd(k2, m) for rk = reckeygen(k1, k2).
TpfLabel tpf_reenc(const Group& group, const TpfLabel& label, const ReEncKey& rk);

// Key for the shuffle-aware exponent k * (r1 * r2)^epoch.
TpfKey tpf_epoch_key(const Group& group, const TpfKey& base, const mpz_class& r1,
                     const mpz_class& r2, std::uint64_t epoch);

}  // namespace brasp
