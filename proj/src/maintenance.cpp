#include "brasp/maintenance.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "brasp/error.hpp"

namespace brasp {

EncryptedIndex shuffle_hop(const EncryptedIndex& in, const mpz_class& r, const PublicParams& params,
                           Rng& rng) {
  const ReEncKey rk{r};
  const Bytes r_bytes = scalar_bytes(params, r);
  EncryptedIndex out;
  out.kind = in.kind;
  out.side = in.side;
  out.entries.reserve(in.entries.size());
  for (const EncryptedIndexEntry& e : in.entries) {
    EncryptedIndexEntry next;
    next.label = tpf_reenc(params.group, e.label, rk);
    next.id_field = rerandomize(e.id_field, params.pk, rng);
    next.tag = tag_step(e.tag, r_bytes);
    out.entries.push_back(std::move(next));
  }
  shuffle_in_place(out.entries, rng);
  return out;
}

void index_shuffle_round(IndexShares& cs1, IndexShares& cs2, const ShuffleParams& shuffle,
                         const PublicParams& params, Rng& rng1, Rng& rng2) {
  for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
    EncryptedIndex& own1 = cs1.of(kind);
    own1 = shuffle_hop(shuffle_hop(own1, shuffle.r2, params, rng2), shuffle.r1, params, rng1);
    EncryptedIndex& own2 = cs2.of(kind);
    own2 = shuffle_hop(shuffle_hop(own2, shuffle.r1, params, rng1), shuffle.r2, params, rng2);
  }
}

void advance_states(ShuffleStateTable& states) { states.advance(); }

Tag current_tag(const Term& term, int side, std::uint64_t rounds, const PublicParams& params,
                const TagKey& tag_key, const ShuffleParams& shuffle) {
  Tag base = prf_eval(tag_key, side == 1 ? PrfDomain::kSide1 : PrfDomain::kSide2,
                      term.canonical_bytes());
  return tag_chain(base, side, scalar_bytes(params, shuffle.r1), scalar_bytes(params, shuffle.r2),
                   rounds);
}

Tag position_of(const TagKey& position_key, const Tag& tag) {
  return prf_eval(position_key, PrfDomain::kPosition, tag.view());
}

namespace {

std::vector<Term> object_terms(const SpatioTextualObject& obj, const PublicParams& params,
                               std::vector<Term>& keywords) {
  std::vector<Term> prefixes;
  for (const PrefixElement& p : prefix_family(obj.location, params.grid.bits())) {
    if (p.length > 0) prefixes.push_back(Term::prefix(p));
  }
  std::set<Term> seen;
  for (const std::string& w : obj.keywords) {
    Term t = Term::keyword(w);
    if (seen.insert(t).second) keywords.push_back(std::move(t));
  }
  return prefixes;
}

}  // namespace

UpdateRequest update_token_generation(const SpatioTextualObject& obj, std::uint64_t object_id,
                                      ByteView object_plaintext, const PublicParams& params,
                                      const ClientKeys& keys, const ShuffleStateTable& states,
                                      Rng& rng) {
  if (obj.location >= params.grid.cell_count()) throw InvalidArgument("object location outside grid");
  UpdateRequest req;
  req.for_cs1.target_side = 1;
  req.for_cs2.target_side = 2;
  req.for_cs1.object_id = req.for_cs2.object_id = object_id;

  const PackingSpec& spec = params.packing;
  const std::uint32_t chunk = static_cast<std::uint32_t>(object_id / spec.slots_per_chunk);
  const unsigned shift = static_cast<unsigned>((object_id % spec.slots_per_chunk) * spec.slot_bits);

  std::vector<Term> keywords;
  std::vector<Term> prefixes = object_terms(obj, params, keywords);

  auto emit = [&](const Term& term, std::vector<UpdateToken> UpdateTokenSet::*member) {
    const int holder = rng.coin() ? 1 : 2;
    const bool known = states.knows(term);
    const std::uint64_t rounds = states.counter(term);
    TpfLabel label;
    if (!known) {
      TpfKey k = tpf_epoch_key(params.group, keys.user, keys.shuffle.r1, keys.shuffle.r2, rounds);
      label = tpf_rnd(params.group, k, term.canonical_bytes());
    }
    for (int side = 1; side <= 2; ++side) {
      const bool bit = side == holder;
      UpdateToken tok;
      Tag tag = current_tag(term, side, rounds, params, keys.tag_key, keys.shuffle);
      if (known) {
        tok.address = position_of(keys.position_key, tag);
        tok.chunk = chunk;
        mpz_class m = bit ? mpz_class(1) << shift : mpz_class(0);
        tok.delta.chunks.push_back(tur_enc(m, params.pk, rng));
      } else {
        tok.label = label;
        tok.tag = tag;
        Bitmap b(object_id + 1);
        if (bit) b.set(object_id);
        tok.delta = pack_bitmap(b, spec, params.pk, rng);
      }
      UpdateTokenSet& set = side == 1 ? req.for_cs1 : req.for_cs2;
      (set.*member).push_back(std::move(tok));
    }
    if (!known) req.fresh_keywords.push_back(term);
  };
  for (const Term& t : prefixes) {
    if (!states.knows(t)) throw ProtocolError("prefix term missing from client state");
    emit(t, &UpdateTokenSet::prefix);
  }
  for (const Term& t : keywords) emit(t, &UpdateTokenSet::keyword);

  req.sealed_object = object_seal(keys.object_key, object_plaintext, rng);
  return req;
}

PositionList update_prepare(const EncryptedIndex& own, std::size_t objects_after,
                            const ServerKeys& keys, const PublicParams& params, Rng& rng) {
  const std::size_t chunks = params.packing.chunks_for(objects_after);
  PositionList list;
  list.kind = own.kind;
  list.fields.reserve(own.entries.size());
  for (const EncryptedIndexEntry& e : own.entries) {
    if (e.id_field.chunks.size() > chunks) throw ProtocolError("ID field longer than the object count");
    PackedBitmap field = rerandomize(e.id_field, params.pk, rng);
    while (field.chunks.size() < chunks) field.chunks.push_back(tur_enc(0, params.pk, rng));
    list.fields.emplace_back(position_of(keys.position_key, e.tag), std::move(field));
  }
  std::sort(list.fields.begin(), list.fields.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return list;
}

MergedList update_merge(const PositionList& list, const std::vector<UpdateToken>& tokens,
                        const PublicParams& params, Rng& rng) {
  MergedList out;
  out.kind = list.kind;
  std::vector<const UpdateToken*> at(list.fields.size(), nullptr);
  for (const UpdateToken& tok : tokens) {
    if (tok.fresh()) {
      UpdateToken pass = tok;
      pass.delta = rerandomize(tok.delta, params.pk, rng);
      out.fresh.push_back(std::move(pass));
      continue;
    }
    if (!tok.address) throw ProtocolError("update token has neither address nor label");
    auto it = std::lower_bound(list.fields.begin(), list.fields.end(), *tok.address,
                               [](const auto& f, const Tag& t) { return f.first < t; });
    if (it == list.fields.end() || it->first != *tok.address) {
      throw ProtocolError("update address matches no position");
    }
    std::size_t pos = static_cast<std::size_t>(it - list.fields.begin());
    if (tok.delta.chunks.size() != 1 || tok.chunk >= it->second.chunks.size()) {
      throw ProtocolError("update delta does not fit the ID field");
    }
    at[pos] = &tok;
  }
  out.fields.reserve(list.fields.size());
  for (std::size_t i = 0; i < list.fields.size(); ++i) {
    PackedBitmap field = list.fields[i].second;
    if (at[i] != nullptr) {
      PaillierCiphertext& c = field.chunks[at[i]->chunk];
      c = tur_add(c, at[i]->delta.chunks[0], params.pk);
    }
    out.fields.emplace_back(list.fields[i].first, rerandomize(field, params.pk, rng));
  }
  return out;
}

void update_finish(const MergedList& merged, EncryptedIndex& own, const ServerKeys& keys,
                   const PublicParams& params) {
  if (merged.kind != own.kind || merged.fields.size() != own.entries.size()) {
    throw ProtocolError("merged list does not match the local index");
  }
  std::map<Tag, std::size_t> by_address;
  for (std::size_t i = 0; i < own.entries.size(); ++i) {
    by_address[position_of(keys.position_key, own.entries[i].tag)] = i;
  }
  std::vector<PackedBitmap> fields(own.entries.size());
  for (const auto& [address, field] : merged.fields) {
    auto it = by_address.find(address);
    if (it == by_address.end()) throw ProtocolError("merged address matches no entry");
    fields[it->second] = field;
  }
  for (std::size_t i = 0; i < own.entries.size(); ++i) own.entries[i].id_field = std::move(fields[i]);
  for (const UpdateToken& tok : merged.fresh) {
    EncryptedIndexEntry e;
    e.label = tpf_reenc(params.group, *tok.label, keys.authorization);
    if (own.find(e.label)) throw ProtocolError("fresh keyword already indexed");
    e.tag = *tok.tag;
    e.id_field = tok.delta;
    own.entries.push_back(std::move(e));
  }
}

void server_update_merge(const UpdateTokenSet& tokens, IndexShares& holder, ObjectStore& store,
                         ByteView sealed_object, const ServerKeys& holder_keys,
                         const PublicParams& params, Rng& holder_rng, Rng& peer_rng) {
  if (tokens.target_side != holder_keys.side) throw ProtocolError("tokens addressed to the other server");
  if (tokens.object_id != store.sealed.size()) throw ProtocolError("object id out of sequence");
  const std::size_t after = store.sealed.size() + 1;
  for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
    PositionList list = update_prepare(holder.of(kind), after, holder_keys, params, holder_rng);
    MergedList merged = update_merge(list, tokens.of(kind), params, peer_rng);
    update_finish(merged, holder.of(kind), holder_keys, params);
  }
  store.sealed.emplace_back(sealed_object.begin(), sealed_object.end());
}

void write_index(ByteWriter& w, const EncryptedIndex& index, const PublicParams& params) {
  w.u8(static_cast<std::uint8_t>(index.kind));
  w.u8(static_cast<std::uint8_t>(index.side));
  w.u32(static_cast<std::uint32_t>(index.entries.size()));
  for (const EncryptedIndexEntry& e : index.entries) write_entry(w, e, params.pk);
}

EncryptedIndex read_index(ByteReader& r, const PublicParams& params) {
  EncryptedIndex index;
  std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) throw IoError("corrupt index kind");
  index.kind = static_cast<IndexKind>(kind);
  index.side = r.u8();
  if (index.side != 1 && index.side != 2) throw IoError("corrupt index side");
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated index");
  for (std::uint32_t i = 0; i < count; ++i) index.entries.push_back(read_entry(r, params.group, params.pk));
  return index;
}

namespace {

Tag read_tag(ByteReader& r) {
  Tag t;
  Bytes b = r.raw(kTagSize);
  std::copy(b.begin(), b.end(), t.bytes.begin());
  return t;
}

void write_token(ByteWriter& w, const UpdateToken& t, const PublicParams& params) {
  if (t.fresh()) {
    w.u8(2);
    w.raw(t.label->bytes);
    w.raw(t.tag->bytes);
  } else {
    w.u8(1);
    w.raw(t.address->bytes);
    w.u32(t.chunk);
  }
  write_packed(w, t.delta, params.pk);
}

UpdateToken read_token(ByteReader& r, const PublicParams& params) {
  UpdateToken t;
  std::uint8_t form = r.u8();
  if (form == 2) {
    t.label = TpfLabel{r.raw(params.group.element_size())};
    t.tag = read_tag(r);
  } else if (form == 1) {
    t.address = read_tag(r);
    t.chunk = r.u32();
  } else {
    throw IoError("corrupt update token");
  }
  t.delta = read_packed(r, params.pk);
  return t;
}

void write_tokens(ByteWriter& w, const std::vector<UpdateToken>& tokens, const PublicParams& params) {
  w.u32(static_cast<std::uint32_t>(tokens.size()));
  for (const UpdateToken& t : tokens) write_token(w, t, params);
}

std::vector<UpdateToken> read_tokens(ByteReader& r, const PublicParams& params) {
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated token list");
  std::vector<UpdateToken> out;
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(read_token(r, params));
  return out;
}

void write_fields(ByteWriter& w, const std::vector<std::pair<Tag, PackedBitmap>>& fields,
                  const PublicParams& params) {
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& [address, field] : fields) {
    w.raw(address.bytes);
    write_packed(w, field, params.pk);
  }
}

std::vector<std::pair<Tag, PackedBitmap>> read_fields(ByteReader& r, const PublicParams& params) {
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated position list");
  std::vector<std::pair<Tag, PackedBitmap>> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tag address = read_tag(r);
    out.emplace_back(address, read_packed(r, params.pk));
  }
  return out;
}

IndexKind read_kind(ByteReader& r) {
  std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) throw IoError("corrupt index kind");
  return static_cast<IndexKind>(kind);
}

}  // namespace

void write_update_tokens(ByteWriter& w, const UpdateTokenSet& t, const PublicParams& params) {
  w.u8(static_cast<std::uint8_t>(t.target_side));
  w.u64(t.object_id);
  write_tokens(w, t.prefix, params);
  write_tokens(w, t.keyword, params);
}

UpdateTokenSet read_update_tokens(ByteReader& r, const PublicParams& params) {
  UpdateTokenSet t;
  t.target_side = r.u8();
  if (t.target_side != 1 && t.target_side != 2) throw IoError("corrupt token side");
  t.object_id = r.u64();
  t.prefix = read_tokens(r, params);
  t.keyword = read_tokens(r, params);
  return t;
}

void write_position_list(ByteWriter& w, const PositionList& l, const PublicParams& params) {
  w.u8(static_cast<std::uint8_t>(l.kind));
  write_fields(w, l.fields, params);
}

PositionList read_position_list(ByteReader& r, const PublicParams& params) {
  PositionList l;
  l.kind = read_kind(r);
  l.fields = read_fields(r, params);
  return l;
}

void write_merged_list(ByteWriter& w, const MergedList& l, const PublicParams& params) {
  w.u8(static_cast<std::uint8_t>(l.kind));
  write_fields(w, l.fields, params);
  write_tokens(w, l.fresh, params);
}

MergedList read_merged_list(ByteReader& r, const PublicParams& params) {
  MergedList l;
  l.kind = read_kind(r);
  l.fields = read_fields(r, params);
  l.fresh = read_tokens(r, params);
  return l;
}

}  // namespace brasp
