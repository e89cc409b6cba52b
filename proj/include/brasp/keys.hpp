#pragma once

#include <gmpxx.h>

#include "brasp/group.hpp"
#include "brasp/index.hpp"
#include "brasp/paillier.hpp"
#include "brasp/prf.hpp"
#include "brasp/seal.hpp"
#include "brasp/spatial.hpp"
#include "brasp/tpf.hpp"

namespace brasp {

// Parameters every party sees.
struct PublicParams {
  Group group;
  GridSpec grid;
  PackingSpec packing;
  PaillierPublicKey pk;

  // Width of a group-order scalar in bytes.
  std::size_t scalar_width() const { return (mpz_sizeinbase(group.order().get_mpz_t(), 2) + 7) / 8; }
};

// Shuffle parameters r1 (held by server 1) and r2 (server 2); nonzero mod q.
struct ShuffleParams {
  mpz_class r1;
  mpz_class r2;

  const mpz_class& of(int side) const { return side == 1 ? r1 : r2; }

  friend bool operator==(const ShuffleParams&, const ShuffleParams&) = default;
};

// Fixed-width encoding of a shuffle scalar used as tag-chain input.
Bytes scalar_bytes(const PublicParams& params, const mpz_class& r);

struct ClientKeys {
  TpfKey user;  // k_u
  ShuffleParams shuffle;
  TagKey tag_key;       // k_T
  ObjectKey object_key;  // k_O
  TagKey position_key;   // k_P

  friend bool operator==(const ClientKeys&, const ClientKeys&) = default;
};

struct ServerKeys {
  int side = 1;
  mpz_class shuffle_param;  // r_side
  PartialDecKey partial;    // sk_side
  ReEncKey authorization;   // rk_{u->M}
  TagKey position_key;      // k_P
};

// Everything the data owner generates at setup.
struct MasterKeys {
  TpfKey master;  // k_M
  PaillierKeyPair paillier;
  PartialDecKey partial1;
  PartialDecKey partial2;
  ShuffleParams shuffle;
  TagKey tag_key;
  ObjectKey object_key;
  TagKey position_key;
  TpfKey user;  // k_u of the single authorized client
};

struct SetupOptions {
  Group group;
  GridSpec grid;
  unsigned paillier_bits = 2048;
  unsigned slot_bits = 16;
};

struct Setup {
  PublicParams params;
  MasterKeys master;
};

// Generates every secret of the scheme from `rng`.
Setup run_keygen(const SetupOptions& options, Rng& rng);

// The subsets handed out by the data owner.
ClientKeys client_keys(const Setup& setup);
ServerKeys server_keys(const Setup& setup, int side);

void write_params(ByteWriter& w, const PublicParams& p);
PublicParams read_params(ByteReader& r);
void write_master_keys(ByteWriter& w, const MasterKeys& k);
MasterKeys read_master_keys(ByteReader& r);
void write_client_keys(ByteWriter& w, const ClientKeys& k);
ClientKeys read_client_keys(ByteReader& r);
void write_server_keys(ByteWriter& w, const ServerKeys& k);
ServerKeys read_server_keys(ByteReader& r);

}  // namespace brasp
