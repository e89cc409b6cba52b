#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brasp/bitmap.hpp"
#include "brasp/group.hpp"
#include "brasp/paillier.hpp"
#include "brasp/prf.hpp"
#include "brasp/spatial.hpp"
#include "brasp/tpf.hpp"

namespace brasp {

struct SpatioTextualObject {
  std::uint64_t id = 0;
  HilbertValue location = 0;
  std::vector<std::string> keywords;  // normalized
  Bytes payload;
};

// NFC normalization followed by Unicode lowercasing.
std::string normalize_keyword(std::string_view keyword);

enum class IndexKind : std::uint8_t { kPrefix = 1, kKeyword = 2 };

const char* to_string(IndexKind kind);

// Logical index key: a prefix in canonical form ("0101**") or a normalized
// keyword.
struct Term {
  IndexKind kind = IndexKind::kKeyword;
  std::string text;

  static Term prefix(const PrefixElement& p) { return Term{IndexKind::kPrefix, p.canonical()}; }
  static Term keyword(std::string_view w) { return Term{IndexKind::kKeyword, normalize_keyword(w)}; }

  // Bytes fed to TPF and the tag PRF: 'P' || len || value for prefixes,
  // 'W' || utf8 for keywords.
  Bytes canonical_bytes() const;

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct PlainIndex {
  IndexKind kind = IndexKind::kKeyword;
  std::size_t object_count = 0;
  std::vector<std::pair<Term, Bitmap>> entries;

  const Bitmap* find(const Term& term) const;
};

// Prefix index over the full prefix universe (lengths 1..gamma) and keyword
// index over the sorted vocabulary of `db`. Object ids must be dense.
std::pair<PlainIndex, PlainIndex> build_plain_indexes(const std::vector<SpatioTextualObject>& db,
                                                      const GridSpec& grid);

// How bitmaps become Paillier plaintexts: object i lives in slot i %
// slots_per_chunk of chunk i / slots_per_chunk, slot j occupying bits
// [j*s, (j+1)*s).
struct PackingSpec {
  unsigned slot_bits = 16;
  std::size_t slots_per_chunk = 0;

  // floor((modulus_bits - 64) / slot_bits) slots; slot_bits in [2, 32].
  static PackingSpec for_modulus(std::size_t modulus_bits, unsigned slot_bits);
  std::size_t chunks_for(std::size_t objects) const;
  // Largest number of additions a slot absorbs without carrying.
  std::uint64_t slot_capacity() const { return (std::uint64_t{1} << slot_bits) - 1; }

  friend bool operator==(const PackingSpec&, const PackingSpec&) = default;
};

std::vector<mpz_class> pack_slots(const Bitmap& bitmap, const PackingSpec& spec);
// Reduces each slot mod 2. Throws ProtocolError when a chunk overflows its
// slot area.
Bitmap unpack_slots(const std::vector<mpz_class>& chunks, std::size_t objects,
                    const PackingSpec& spec);

struct PackedBitmap {
  std::vector<PaillierCiphertext> chunks;
  friend bool operator==(const PackedBitmap&, const PackedBitmap&) = default;
};

PackedBitmap pack_bitmap(const Bitmap& bitmap, const PackingSpec& spec, const PaillierKeyPair& kp,
                         Rng& rng);
PackedBitmap pack_bitmap(const Bitmap& bitmap, const PackingSpec& spec,
                         const PaillierPublicKey& pk, Rng& rng);
// Decrypts with both partial keys (two-step) and unpacks.
Bitmap unpack_bitmap(const PackedBitmap& packed, std::size_t objects, const PackingSpec& spec,
                     const PaillierPublicKey& pk, const PartialDecKey& first,
                     const PartialDecKey& second);
// Data-owner decryption with the full secret key.
Bitmap unpack_bitmap(const PackedBitmap& packed, std::size_t objects, const PackingSpec& spec,
                     const PaillierKeyPair& kp);

PackedBitmap rerandomize(const PackedBitmap& packed, const PaillierPublicKey& pk, Rng& rng);

struct EncryptedIndexEntry {
  TpfLabel label;
  PackedBitmap id_field;
  Tag tag;
};

class EncryptedIndex {
 public:
  IndexKind kind = IndexKind::kKeyword;
  int side = 1;
  std::vector<EncryptedIndexEntry> entries;

  std::optional<std::size_t> find(const TpfLabel& label) const;
  std::size_t size() const { return entries.size(); }
};

// The two indexes held by one server.
struct IndexShares {
  EncryptedIndex prefix{IndexKind::kPrefix, 1, {}};
  EncryptedIndex keyword{IndexKind::kKeyword, 1, {}};

  EncryptedIndex& of(IndexKind kind) { return kind == IndexKind::kPrefix ? prefix : keyword; }
  const EncryptedIndex& of(IndexKind kind) const {
    return kind == IndexKind::kPrefix ? prefix : keyword;
  }
};

struct ObjectStore {
  std::vector<Bytes> sealed;  // indexed by object id
  friend bool operator==(const ObjectStore&, const ObjectStore&) = default;
};

struct IndexBuildKeys {
  const Group& group;
  const TpfKey& master;
  const TagKey& tag_key;
  const PaillierPublicKey& pk;
  PackingSpec packing;
  // Set when the builder holds the factorization; encryption then uses CRT.
  const PaillierKeyPair* factored = nullptr;
};

// Labels tpf_rnd(k_M, term), per-side packed encryptions of disjoint bitmap
// shares, and initial tags F(k_T, (side, term)). Element [0] goes to server 1.
std::pair<IndexShares, IndexShares> encrypted_index_build(const PlainIndex& prefix,
                                                          const PlainIndex& keyword,
                                                          const IndexBuildKeys& keys, Rng& rng);

// Wire encoding of a single entry: label, tag, u32 chunk count, ciphertexts.
void write_entry(ByteWriter& w, const EncryptedIndexEntry& e, const PaillierPublicKey& pk);
EncryptedIndexEntry read_entry(ByteReader& r, const Group& group, const PaillierPublicKey& pk);
void write_packed(ByteWriter& w, const PackedBitmap& p, const PaillierPublicKey& pk);
PackedBitmap read_packed(ByteReader& r, const PaillierPublicKey& pk);

// On-disk index file: header (version, kind, side, n, s, slots per chunk)
// followed by length-prefixed entries.
Bytes encode_index_file(const EncryptedIndex& index, std::size_t objects, const PackingSpec& spec,
                        const PaillierPublicKey& pk);
struct IndexFile {
  EncryptedIndex index;
  std::size_t objects = 0;
  PackingSpec packing;
};
IndexFile decode_index_file(ByteView data, const Group& group, const PaillierPublicKey& pk);

}  // namespace brasp
