#include "brasp/index.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <map>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

namespace {
constexpr std::uint8_t kIndexFileVersion = 1;
}

std::string normalize_keyword(std::string_view keyword) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("NFC normalizer unavailable");
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(keyword.data(), static_cast<int32_t>(keyword.size())));
  icu::UnicodeString folded = nfc->normalize(text, status);
  folded.toLower(icu::Locale::getRoot());
  folded = nfc->normalize(folded, status);
  if (U_FAILURE(status)) throw InvalidArgument("keyword is not valid text");
  std::string out;
  folded.toUTF8String(out);
  if (out.empty()) throw InvalidArgument("keywords must be non-empty");
  return out;
}

const char* to_string(IndexKind kind) {
  return kind == IndexKind::kPrefix ? "prefix" : "keyword";
}

Bytes Term::canonical_bytes() const {
  ByteWriter w;
  if (kind == IndexKind::kPrefix) {
    PrefixElement p = PrefixElement::parse(text);
    w.u8('P');
    w.u8(p.length);
    w.u64(p.value);
  } else {
    w.u8('W');
    w.raw(to_bytes(text));
  }
  return std::move(w).take();
}

const Bitmap* PlainIndex::find(const Term& term) const {
  for (const auto& [t, bitmap] : entries) {
    if (t == term) return &bitmap;
  }
  return nullptr;
}

std::pair<PlainIndex, PlainIndex> build_plain_indexes(const std::vector<SpatioTextualObject>& db,
                                                      const GridSpec& grid) {
  const std::size_t n = db.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (db[i].id != i) throw InvalidArgument("object ids must be dense and ordered");
    if (db[i].location >= grid.cell_count()) throw InvalidArgument("object location outside grid");
  }

  PlainIndex prefix{IndexKind::kPrefix, n, {}};
  const unsigned width = grid.bits();
  for (const PrefixElement& p : prefix_universe(width)) {
    Bitmap b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (p.covers(db[i].location)) b.set(i);
    }
    prefix.entries.emplace_back(Term::prefix(p), std::move(b));
  }

  std::map<std::string, Bitmap> vocabulary;
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& w : db[i].keywords) {
      auto [it, inserted] = vocabulary.try_emplace(normalize_keyword(w), Bitmap(n));
      it->second.set(i);
    }
  }
  PlainIndex keyword{IndexKind::kKeyword, n, {}};
  for (auto& [w, b] : vocabulary) {
    keyword.entries.emplace_back(Term{IndexKind::kKeyword, w}, std::move(b));
  }
  return {std::move(prefix), std::move(keyword)};
}

PackingSpec PackingSpec::for_modulus(std::size_t modulus_bits, unsigned slot_bits) {
  if (slot_bits < 2 || slot_bits > 32) throw InvalidArgument("slot width must be in [2, 32]");
  if (modulus_bits <= 64 + slot_bits) throw InvalidArgument("modulus too small for packing");
  return PackingSpec{slot_bits, (modulus_bits - 64) / slot_bits};
}

std::size_t PackingSpec::chunks_for(std::size_t objects) const {
  if (slots_per_chunk == 0) throw InvalidArgument("packing spec not initialised");
  return std::max<std::size_t>(1, (objects + slots_per_chunk - 1) / slots_per_chunk);
}

std::vector<mpz_class> pack_slots(const Bitmap& bitmap, const PackingSpec& spec) {
  std::vector<mpz_class> chunks(spec.chunks_for(bitmap.size()));
  for (std::size_t i : bitmap.ones()) {
    std::size_t chunk = i / spec.slots_per_chunk;
    std::size_t slot = i % spec.slots_per_chunk;
    mpz_setbit(chunks[chunk].get_mpz_t(), slot * spec.slot_bits);
  }
  return chunks;
}

Bitmap unpack_slots(const std::vector<mpz_class>& chunks, std::size_t objects,
                    const PackingSpec& spec) {
  if (chunks.size() < spec.chunks_for(objects)) throw ProtocolError("ID field has too few chunks");
  const std::size_t used_bits = spec.slots_per_chunk * spec.slot_bits;
  Bitmap b(objects);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    if (chunks[c] < 0 || mpz_sizeinbase(chunks[c].get_mpz_t(), 2) > used_bits) {
      throw ProtocolError("packed slot overflow; redistribution required");
    }
    for (std::size_t slot = 0; slot < spec.slots_per_chunk; ++slot) {
      std::size_t id = c * spec.slots_per_chunk + slot;
      if (id >= objects) break;
      // Lowest bit of the slot is the slot value mod 2.
      if (mpz_tstbit(chunks[c].get_mpz_t(), slot * spec.slot_bits) != 0) b.set(id);
    }
  }
  return b;
}

PackedBitmap pack_bitmap(const Bitmap& bitmap, const PackingSpec& spec, const PaillierKeyPair& kp,
                         Rng& rng) {
  if (spec.slots_per_chunk * spec.slot_bits + 64 > kp.pub.modulus_bits()) {
    throw InvalidArgument("packing spec does not fit the Paillier modulus");
  }
  PackedBitmap out;
  for (const mpz_class& m : pack_slots(bitmap, spec)) out.chunks.push_back(tur_enc(m, kp, rng));
  return out;
}

PackedBitmap pack_bitmap(const Bitmap& bitmap, const PackingSpec& spec,
                         const PaillierPublicKey& pk, Rng& rng) {
  if (spec.slots_per_chunk * spec.slot_bits + 64 > pk.modulus_bits()) {
    throw InvalidArgument("packing spec does not fit the Paillier modulus");
  }
  PackedBitmap out;
  for (const mpz_class& m : pack_slots(bitmap, spec)) out.chunks.push_back(tur_enc(m, pk, rng));
  return out;
}

Bitmap unpack_bitmap(const PackedBitmap& packed, std::size_t objects, const PackingSpec& spec,
                     const PaillierPublicKey& pk, const PartialDecKey& first,
                     const PartialDecKey& second) {
  std::vector<mpz_class> plain;
  plain.reserve(packed.chunks.size());
  for (const PaillierCiphertext& c : packed.chunks) {
    plain.push_back(tur_dec(tur_pdec(c, first, pk), second, pk));
  }
  return unpack_slots(plain, objects, spec);
}

Bitmap unpack_bitmap(const PackedBitmap& packed, std::size_t objects, const PackingSpec& spec,
                     const PaillierKeyPair& kp) {
  std::vector<mpz_class> plain;
  plain.reserve(packed.chunks.size());
  for (const PaillierCiphertext& c : packed.chunks) plain.push_back(paillier_decrypt(c, kp));
  return unpack_slots(plain, objects, spec);
}

PackedBitmap rerandomize(const PackedBitmap& packed, const PaillierPublicKey& pk, Rng& rng) {
  PackedBitmap out;
  out.chunks.reserve(packed.chunks.size());
  for (const PaillierCiphertext& c : packed.chunks) out.chunks.push_back(tur_reenc(c, pk, rng));
  return out;
}

std::optional<std::size_t> EncryptedIndex::find(const TpfLabel& label) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].label == label) return i;
  }
  return std::nullopt;
}

std::pair<IndexShares, IndexShares> encrypted_index_build(const PlainIndex& prefix,
                                                          const PlainIndex& keyword,
                                                          const IndexBuildKeys& keys, Rng& rng) {
  std::pair<IndexShares, IndexShares> out;
  IndexShares* sides[2] = {&out.first, &out.second};
  for (int s = 0; s < 2; ++s) {
    sides[s]->prefix.kind = IndexKind::kPrefix;
    sides[s]->keyword.kind = IndexKind::kKeyword;
    sides[s]->prefix.side = sides[s]->keyword.side = s + 1;
  }
  for (const PlainIndex* plain : {&prefix, &keyword}) {
    for (const auto& [term, bitmap] : plain->entries) {
      Bytes term_bytes = term.canonical_bytes();
      TpfLabel label = tpf_rnd(keys.group, keys.master, term_bytes);
      ShareBitmap shares = split_shares(bitmap, rng);
      for (int s = 0; s < 2; ++s) {
        EncryptedIndexEntry entry;
        entry.label = label;
        entry.id_field = keys.factored != nullptr
                             ? pack_bitmap(shares.side(s + 1), keys.packing, *keys.factored, rng)
                             : pack_bitmap(shares.side(s + 1), keys.packing, keys.pk, rng);
        entry.tag = prf_eval(keys.tag_key, s == 0 ? PrfDomain::kSide1 : PrfDomain::kSide2,
                             term_bytes);
        sides[s]->of(plain->kind).entries.push_back(std::move(entry));
      }
    }
  }
  return out;
}

void write_packed(ByteWriter& w, const PackedBitmap& p, const PaillierPublicKey& pk) {
  w.u32(static_cast<std::uint32_t>(p.chunks.size()));
  for (const PaillierCiphertext& c : p.chunks) w.raw(encode_ciphertext(c, pk));
}

PackedBitmap read_packed(ByteReader& r, const PaillierPublicKey& pk) {
  std::uint32_t count = r.u32();
  if (count > r.remaining() / pk.ciphertext_bytes()) throw IoError("truncated ID field");
  PackedBitmap p;
  p.chunks.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    p.chunks.push_back(decode_ciphertext(r.raw(pk.ciphertext_bytes()), pk));
  }
  return p;
}

void write_entry(ByteWriter& w, const EncryptedIndexEntry& e, const PaillierPublicKey& pk) {
  w.raw(e.label.bytes);
  w.raw(e.tag.bytes);
  write_packed(w, e.id_field, pk);
}

EncryptedIndexEntry read_entry(ByteReader& r, const Group& group, const PaillierPublicKey& pk) {
  EncryptedIndexEntry e;
  e.label.bytes = r.raw(group.element_size());
  Bytes tag = r.raw(kTagSize);
  std::copy(tag.begin(), tag.end(), e.tag.bytes.begin());
  e.id_field = read_packed(r, pk);
  return e;
}

Bytes encode_index_file(const EncryptedIndex& index, std::size_t objects, const PackingSpec& spec,
                        const PaillierPublicKey& pk) {
  ByteWriter w;
  w.u8(kIndexFileVersion);
  w.u8(static_cast<std::uint8_t>(index.kind));
  w.u8(static_cast<std::uint8_t>(index.side));
  w.u64(objects);
  w.u8(static_cast<std::uint8_t>(spec.slot_bits));
  w.u32(static_cast<std::uint32_t>(spec.slots_per_chunk));
  w.u32(static_cast<std::uint32_t>(index.entries.size()));
  for (const EncryptedIndexEntry& e : index.entries) {
    ByteWriter entry;
    write_entry(entry, e, pk);
    w.blob(entry.bytes());
  }
  return std::move(w).take();
}

IndexFile decode_index_file(ByteView data, const Group& group, const PaillierPublicKey& pk) {
  ByteReader r(data);
  if (r.u8() != kIndexFileVersion) throw IoError("unsupported index file version");
  IndexFile f;
  std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) throw IoError("unknown index kind");
  f.index.kind = static_cast<IndexKind>(kind);
  f.index.side = r.u8();
  if (f.index.side != 1 && f.index.side != 2) throw IoError("unknown index side");
  f.objects = static_cast<std::size_t>(r.u64());
  f.packing.slot_bits = r.u8();
  f.packing.slots_per_chunk = r.u32();
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Bytes blob = r.blob();
    ByteReader er(blob);
    f.index.entries.push_back(read_entry(er, group, pk));
    er.expect_done();
  }
  r.expect_done();
  return f;
}

}  // namespace brasp
