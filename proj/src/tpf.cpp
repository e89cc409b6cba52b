#include "brasp/tpf.hpp"

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

TpfKey tpf_keygen(const Group& group, Rng& rng) {
  return TpfKey{random_nonzero_below(rng, group.order())};
}

TpfLabel tpf_rnd(const Group& group, const TpfKey& key, ByteView message) {
  mpz_class e = (group.hash_to_exponent(message) * key.value) % group.order();
  return TpfLabel{group.pow_generator(e)};
}

ReEncKey tpf_reckeygen(const Group& group, const TpfKey& from, const TpfKey& to) {
  const mpz_class& q = group.order();
  if (from.value % q == 0) throw InvalidArgument("source key is zero mod q");
  return ReEncKey{(to.value * invert(from.value, q)) % q};
}

TpfLabel tpf_reenc(const Group& group, const TpfLabel& label, const ReEncKey& rk) {
  return TpfLabel{group.pow(label.bytes, rk.value)};
}

TpfKey tpf_epoch_key(const Group& group, const TpfKey& base, const mpz_class& r1,
                     const mpz_class& r2, std::uint64_t epoch) {
  const mpz_class& q = group.order();
  mpz_class step = (r1 * r2) % q;
  mpz_class e(static_cast<unsigned long>(epoch));
  return TpfKey{(base.value * powm(step, e, q)) % q};
}

}  // namespace brasp
