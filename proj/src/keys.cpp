#include "brasp/keys.hpp"

#include <bit>
#include <tuple>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

Bytes scalar_bytes(const PublicParams& params, const mpz_class& r) {
  return mpz_to_bytes(r, params.scalar_width());
}

Setup run_keygen(const SetupOptions& options, Rng& rng) {
  Setup s;
  s.params.group = options.group;
  s.params.grid = options.grid;
  MasterKeys& k = s.master;
  k.paillier = tur_setup(options.paillier_bits, rng);
  s.params.pk = k.paillier.pub;
  s.params.packing = PackingSpec::for_modulus(k.paillier.pub.modulus_bits(), options.slot_bits);
  std::tie(k.partial1, k.partial2) = tur_keygen(k.paillier, rng);
  k.master = tpf_keygen(options.group, rng);
  k.user = tpf_keygen(options.group, rng);
  k.shuffle.r1 = random_nonzero_below(rng, options.group.order());
  k.shuffle.r2 = random_nonzero_below(rng, options.group.order());
  k.tag_key = TagKey::generate(rng);
  k.object_key = ObjectKey::generate(rng);
  k.position_key = TagKey::generate(rng);
  return s;
}

ClientKeys client_keys(const Setup& setup) {
  const MasterKeys& k = setup.master;
  return ClientKeys{k.user, k.shuffle, k.tag_key, k.object_key, k.position_key};
}

ServerKeys server_keys(const Setup& setup, int side) {
  if (side != 1 && side != 2) throw InvalidArgument("server side must be 1 or 2");
  const MasterKeys& k = setup.master;
  ServerKeys s;
  s.side = side;
  s.shuffle_param = k.shuffle.of(side);
  s.partial = side == 1 ? k.partial1 : k.partial2;
  s.authorization = tpf_reckeygen(setup.params.group, k.user, k.master);
  s.position_key = k.position_key;
  return s;
}

void write_params(ByteWriter& w, const PublicParams& p) {
  p.group.serialize(w);
  w.u64(std::bit_cast<std::uint64_t>(p.grid.x_min));
  w.u64(std::bit_cast<std::uint64_t>(p.grid.y_min));
  w.u64(std::bit_cast<std::uint64_t>(p.grid.x_max));
  w.u64(std::bit_cast<std::uint64_t>(p.grid.y_max));
  w.u8(static_cast<std::uint8_t>(p.grid.order));
  w.u8(static_cast<std::uint8_t>(p.packing.slot_bits));
  w.u32(static_cast<std::uint32_t>(p.packing.slots_per_chunk));
  write_public_key(w, p.pk);
}

PublicParams read_params(ByteReader& r) {
  PublicParams p;
  p.group = Group::deserialize(r);
  double x_min = std::bit_cast<double>(r.u64());
  double y_min = std::bit_cast<double>(r.u64());
  double x_max = std::bit_cast<double>(r.u64());
  double y_max = std::bit_cast<double>(r.u64());
  unsigned order = r.u8();
  p.grid = GridSpec::make(x_min, y_min, x_max, y_max, order);
  unsigned slot_bits = r.u8();
  std::uint32_t spc = r.u32();
  p.pk = read_public_key(r);
  p.packing = PackingSpec::for_modulus(p.pk.modulus_bits(), slot_bits);
  if (p.packing.slots_per_chunk != spc) throw IoError("packing parameters do not match the modulus");
  return p;
}

namespace {

void write_shuffle(ByteWriter& w, const ShuffleParams& s) {
  write_mpz(w, s.r1);
  write_mpz(w, s.r2);
}

ShuffleParams read_shuffle(ByteReader& r) {
  ShuffleParams s;
  s.r1 = read_mpz(r);
  s.r2 = read_mpz(r);
  return s;
}

}  // namespace

void write_master_keys(ByteWriter& w, const MasterKeys& k) {
  write_mpz(w, k.master.value);
  write_key_pair(w, k.paillier);
  write_partial_key(w, k.partial1);
  write_partial_key(w, k.partial2);
  write_shuffle(w, k.shuffle);
  w.blob(k.tag_key.bytes);
  w.blob(k.object_key.bytes);
  w.blob(k.position_key.bytes);
  write_mpz(w, k.user.value);
}

MasterKeys read_master_keys(ByteReader& r) {
  MasterKeys k;
  k.master.value = read_mpz(r);
  k.paillier = read_key_pair(r);
  k.partial1 = read_partial_key(r);
  k.partial2 = read_partial_key(r);
  k.shuffle = read_shuffle(r);
  k.tag_key.bytes = r.blob();
  k.object_key.bytes = r.blob();
  k.position_key.bytes = r.blob();
  k.user.value = read_mpz(r);
  return k;
}

void write_client_keys(ByteWriter& w, const ClientKeys& k) {
  write_mpz(w, k.user.value);
  write_shuffle(w, k.shuffle);
  w.blob(k.tag_key.bytes);
  w.blob(k.object_key.bytes);
  w.blob(k.position_key.bytes);
}

ClientKeys read_client_keys(ByteReader& r) {
  ClientKeys k;
  k.user.value = read_mpz(r);
  k.shuffle = read_shuffle(r);
  k.tag_key.bytes = r.blob();
  k.object_key.bytes = r.blob();
  k.position_key.bytes = r.blob();
  return k;
}

void write_server_keys(ByteWriter& w, const ServerKeys& k) {
  w.u8(static_cast<std::uint8_t>(k.side));
  write_mpz(w, k.shuffle_param);
  write_partial_key(w, k.partial);
  write_mpz(w, k.authorization.value);
  w.blob(k.position_key.bytes);
}

ServerKeys read_server_keys(ByteReader& r) {
  ServerKeys k;
  k.side = r.u8();
  if (k.side != 1 && k.side != 2) throw IoError("corrupt server side");
  k.shuffle_param = read_mpz(r);
  k.partial = read_partial_key(r);
  k.authorization.value = read_mpz(r);
  k.position_key.bytes = r.blob();
  return k;
}

}  // namespace brasp
