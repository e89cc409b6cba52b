#include "brasp/query.hpp"

#include <algorithm>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

BooleanRangeQuery BooleanRangeQuery::from_rect(const Rect& rect, std::vector<std::string> keywords,
                                               const GridSpec& grid) {
  return BooleanRangeQuery{region_to_intervals(rect, grid), std::move(keywords)};
}

std::uint64_t ShuffleStateTable::counter(const Term& term) const {
  auto it = terms_.find(term);
  return it == terms_.end() ? epoch_ : it->second;
}

void ShuffleStateTable::register_term(const Term& term, std::uint64_t counter) {
  terms_[term] = counter;
}

void ShuffleStateTable::advance() {
  ++epoch_;
  for (auto& [term, counter] : terms_) ++counter;
}

void ShuffleStateTable::serialize(ByteWriter& w) const {
  w.u64(epoch_);
  w.u32(static_cast<std::uint32_t>(terms_.size()));
  for (const auto& [term, counter] : terms_) {
    w.u8(static_cast<std::uint8_t>(term.kind));
    w.str(term.text);
    w.u64(counter);
  }
}

ShuffleStateTable ShuffleStateTable::deserialize(ByteReader& r) {
  ShuffleStateTable t;
  t.epoch_ = r.u64();
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Term term;
    std::uint8_t kind = r.u8();
    if (kind != 1 && kind != 2) throw IoError("corrupt term kind");
    term.kind = static_cast<IndexKind>(kind);
    term.text = r.str();
    t.terms_[term] = r.u64();
  }
  return t;
}

QueryPlan token_generation(const BooleanRangeQuery& query, const PublicParams& params,
                           const ClientKeys& keys, const ShuffleStateTable& states) {
  QueryPlan plan;
  for (const std::string& w : query.keywords) {
    Term term = Term::keyword(w);
    if (std::find(plan.keyword_terms.begin(), plan.keyword_terms.end(), term) !=
        plan.keyword_terms.end()) {
      continue;
    }
    plan.keyword_terms.push_back(term);
  }
  RangeCover cover = min_prefix_cover(query.range, params.grid.bits());
  for (const PrefixElement& p : cover.prefixes) plan.prefix_terms.push_back(Term::prefix(p));

  auto trapdoor = [&](const Term& term) {
    TpfKey k = tpf_epoch_key(params.group, keys.user, keys.shuffle.r1, keys.shuffle.r2,
                             states.counter(term));
    return tpf_rnd(params.group, k, term.canonical_bytes());
  };
  for (const Term& t : plan.keyword_terms) plan.trapdoors.keyword.push_back(trapdoor(t));
  for (const Term& t : plan.prefix_terms) plan.trapdoors.prefix.push_back(trapdoor(t));
  return plan;
}

Resolution server_resolve(const TrapdoorSet& trapdoors, const IndexShares& own,
                          const ServerKeys& keys, const PublicParams& params) {
  Resolution res;
  res.partials.share_side = keys.side;
  auto resolve = [&](const std::vector<TpfLabel>& labels, const EncryptedIndex& index,
                     std::vector<std::optional<PartialField>>& out,
                     std::vector<std::optional<std::size_t>>& positions) {
    for (const TpfLabel& t : labels) {
      TpfLabel label = tpf_reenc(params.group, t, keys.authorization);
      std::optional<std::size_t> pos = index.find(label);
      positions.push_back(pos);
      if (!pos) {
        out.emplace_back(std::nullopt);
        continue;
      }
      PartialField field;
      for (const PaillierCiphertext& c : index.entries[*pos].id_field.chunks) {
        field.chunks.push_back(tur_pdec(c, keys.partial, params.pk));
      }
      out.emplace_back(std::move(field));
    }
  };
  resolve(trapdoors.prefix, own.prefix, res.partials.prefix, res.prefix_positions);
  resolve(trapdoors.keyword, own.keyword, res.partials.keyword, res.keyword_positions);
  return res;
}

namespace {

Bitmap complete_field(const PartialField& field, const ServerKeys& keys, std::size_t objects,
                      const PublicParams& params) {
  std::vector<mpz_class> plain;
  plain.reserve(field.chunks.size());
  for (const PartialDecryption& pd : field.chunks) plain.push_back(tur_dec(pd, keys.partial, params.pk));
  return unpack_slots(plain, objects, params.packing);
}

}  // namespace

SearchResponse server_complete(const PartialSet& from_peer, const ServerKeys& keys,
                               const ObjectStore& store, ResultMode mode,
                               const PublicParams& params) {
  if (from_peer.share_side == keys.side) throw ProtocolError("partials must come from the peer server");
  const std::size_t n = store.sealed.size();
  SearchResponse resp;
  resp.share_side = from_peer.share_side;
  resp.object_count = n;

  Bitmap in_range(n);
  for (const auto& field : from_peer.prefix) {
    if (!field) {
      resp.prefix.emplace_back(std::nullopt);
      continue;
    }
    Bitmap b = complete_field(*field, keys, n, params);
    in_range = in_range | b;
    resp.prefix.emplace_back(std::move(b));
  }
  Bitmap keyword_match(n);
  for (std::size_t i = 0; i < n; ++i) keyword_match.set(i);
  for (const auto& field : from_peer.keyword) {
    if (!field) {
      keyword_match = Bitmap(n);
      resp.keyword.emplace_back(std::nullopt);
      continue;
    }
    Bitmap b = complete_field(*field, keys, n, params);
    keyword_match = keyword_match & b;
    resp.keyword.emplace_back(std::move(b));
  }

  Bitmap selected = mode == ResultMode::kLiteral ? (in_range & keyword_match) : in_range;
  for (std::size_t id : selected.ones()) resp.candidates.emplace_back(id, store.sealed[id]);
  return resp;
}

RecoveredQuery client_recover(const SearchResponse& first, const SearchResponse& second,
                              ResultMode mode, const ClientKeys& keys) {
  if (first.object_count != second.object_count || first.prefix.size() != second.prefix.size() ||
      first.keyword.size() != second.keyword.size()) {
    throw ProtocolError("search responses disagree in shape");
  }
  if (first.share_side == second.share_side) throw ProtocolError("both responses carry the same share");
  const std::size_t n = first.object_count;
  RecoveredQuery out;

  std::map<std::uint64_t, const Bytes*> sealed;
  for (const auto* resp : {&first, &second}) {
    for (const auto& [id, bytes] : resp->candidates) {
      if (id >= n) throw ProtocolError("candidate id out of range");
      sealed[id] = &bytes;
    }
  }

  auto combine = [&](const std::vector<std::optional<Bitmap>>& a,
                     const std::vector<std::optional<Bitmap>>& b,
                     std::vector<std::optional<Bitmap>>& full) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].has_value() != b[i].has_value()) throw ProtocolError("servers disagree on a term");
      if (!a[i]) {
        full.emplace_back(std::nullopt);
        continue;
      }
      if (a[i]->size() != n || b[i]->size() != n) throw ProtocolError("bitmap length mismatch");
      full.emplace_back(combine_shares(*a[i], *b[i]));
    }
  };
  combine(first.prefix, second.prefix, out.prefix_full);
  combine(first.keyword, second.keyword, out.keyword_full);

  std::vector<std::uint64_t> ids;
  if (mode == ResultMode::kLiteral) {
    for (const auto& [id, bytes] : sealed) {
      (void)bytes;
      ids.push_back(id);
    }
    // Literal mode returns the union of per-server candidates, so ids are
    // exactly the candidate ids.
  } else {
    Bitmap in_range(n);
    for (const auto& b : out.prefix_full) {
      if (b) in_range = in_range | *b;
    }
    Bitmap match = in_range;
    for (const auto& b : out.keyword_full) match = b ? (match & *b) : Bitmap(n);
    for (std::size_t id : match.ones()) ids.push_back(id);
  }

  for (std::uint64_t id : ids) {
    auto it = sealed.find(id);
    if (it == sealed.end()) throw ProtocolError("matched object missing from server candidates");
    out.result.ids.push_back(id);
    out.result.objects.push_back(object_open(keys.object_key, *it->second));
  }
  return out;
}

std::pair<RedistributionBatch, RedistributionBatch> index_redistribution(
    const QueryPlan& plan, const RecoveredQuery& recovered, const PublicParams& params, Rng& rng) {
  if (plan.prefix_terms.size() != recovered.prefix_full.size() ||
      plan.keyword_terms.size() != recovered.keyword_full.size()) {
    throw ProtocolError("recovered bitmaps do not match the query plan");
  }
  std::pair<RedistributionBatch, RedistributionBatch> out;
  auto emit = [&](const std::vector<TpfLabel>& trapdoors,
                  const std::vector<std::optional<Bitmap>>& fulls,
                  std::vector<RedistributionEntry> RedistributionBatch::*member) {
    for (std::size_t i = 0; i < fulls.size(); ++i) {
      if (!fulls[i]) continue;
      ShareBitmap shares = split_shares(*fulls[i], rng);
      (out.first.*member).push_back(
          {trapdoors[i], pack_bitmap(shares.first, params.packing, params.pk, rng)});
      (out.second.*member).push_back(
          {trapdoors[i], pack_bitmap(shares.second, params.packing, params.pk, rng)});
    }
  };
  emit(plan.trapdoors.prefix, recovered.prefix_full, &RedistributionBatch::prefix);
  emit(plan.trapdoors.keyword, recovered.keyword_full, &RedistributionBatch::keyword);
  return out;
}

void server_apply_redistribution(const RedistributionBatch& batch, IndexShares& own,
                                 const ServerKeys& keys, const PublicParams& params) {
  auto apply = [&](const std::vector<RedistributionEntry>& entries, EncryptedIndex& index) {
    // Resolve everything first so a failure leaves the index untouched.
    std::vector<std::size_t> positions;
    for (const RedistributionEntry& e : entries) {
      std::optional<std::size_t> pos =
          index.find(tpf_reenc(params.group, e.trapdoor, keys.authorization));
      if (!pos) throw ProtocolError("redistribution label vanished; resync and retry");
      positions.push_back(*pos);
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      index.entries[positions[i]].id_field = entries[i].id_field;
    }
  };
  apply(batch.prefix, own.prefix);
  apply(batch.keyword, own.keyword);
}

void write_trapdoors(ByteWriter& w, const TrapdoorSet& t) {
  w.u32(static_cast<std::uint32_t>(t.keyword.size()));
  w.u32(static_cast<std::uint32_t>(t.prefix.size()));
  for (const TpfLabel& l : t.keyword) w.raw(l.bytes);
  for (const TpfLabel& l : t.prefix) w.raw(l.bytes);
}

TrapdoorSet read_trapdoors(ByteReader& r, const PublicParams& params) {
  TrapdoorSet t;
  std::uint32_t kw = r.u32();
  std::uint32_t px = r.u32();
  const std::size_t width = params.group.element_size();
  if (static_cast<std::uint64_t>(kw) + px > r.remaining() / width) throw IoError("truncated trapdoors");
  for (std::uint32_t i = 0; i < kw; ++i) t.keyword.push_back(TpfLabel{r.raw(width)});
  for (std::uint32_t i = 0; i < px; ++i) t.prefix.push_back(TpfLabel{r.raw(width)});
  return t;
}

namespace {

void write_partial_fields(ByteWriter& w, const std::vector<std::optional<PartialField>>& fields,
                          const PublicParams& params) {
  w.u32(static_cast<std::uint32_t>(fields.size()));
  for (const auto& f : fields) {
    w.u8(f ? 1 : 0);
    if (!f) continue;
    w.u32(static_cast<std::uint32_t>(f->chunks.size()));
    for (const PartialDecryption& pd : f->chunks) {
      w.raw(encode_ciphertext(pd.original, params.pk));
      w.raw(mpz_to_bytes(pd.partial, params.pk.ciphertext_bytes()));
    }
  }
}

std::vector<std::optional<PartialField>> read_partial_fields(ByteReader& r, int side,
                                                             const PublicParams& params) {
  std::vector<std::optional<PartialField>> out;
  std::uint32_t count = r.u32();
  const std::size_t width = params.pk.ciphertext_bytes();
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.u8() == 0) {
      out.emplace_back(std::nullopt);
      continue;
    }
    std::uint32_t chunks = r.u32();
    if (chunks > r.remaining() / (2 * width)) throw IoError("truncated partial decryptions");
    PartialField f;
    for (std::uint32_t c = 0; c < chunks; ++c) {
      PartialDecryption pd;
      pd.original = decode_ciphertext(r.raw(width), params.pk);
      pd.partial = mpz_from_bytes(r.raw(width));
      pd.index = static_cast<std::uint8_t>(side);
      f.chunks.push_back(std::move(pd));
    }
    out.emplace_back(std::move(f));
  }
  return out;
}

void write_bitmaps(ByteWriter& w, const std::vector<std::optional<Bitmap>>& maps) {
  w.u32(static_cast<std::uint32_t>(maps.size()));
  for (const auto& b : maps) {
    w.u8(b ? 1 : 0);
    if (b) b->serialize(w);
  }
}

std::vector<std::optional<Bitmap>> read_bitmaps(ByteReader& r) {
  std::vector<std::optional<Bitmap>> out;
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.u8() == 0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(Bitmap::deserialize(r));
    }
  }
  return out;
}

void write_redistribution_entries(ByteWriter& w, const std::vector<RedistributionEntry>& entries,
                                  const PublicParams& params) {
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const RedistributionEntry& e : entries) {
    w.raw(e.trapdoor.bytes);
    write_packed(w, e.id_field, params.pk);
  }
}

std::vector<RedistributionEntry> read_redistribution_entries(ByteReader& r,
                                                             const PublicParams& params) {
  std::vector<RedistributionEntry> out;
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    RedistributionEntry e;
    e.trapdoor.bytes = r.raw(params.group.element_size());
    e.id_field = read_packed(r, params.pk);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

void write_partials(ByteWriter& w, const PartialSet& p, const PublicParams& params) {
  w.u8(static_cast<std::uint8_t>(p.share_side));
  write_partial_fields(w, p.prefix, params);
  write_partial_fields(w, p.keyword, params);
}

PartialSet read_partials(ByteReader& r, const PublicParams& params) {
  PartialSet p;
  p.share_side = r.u8();
  if (p.share_side != 1 && p.share_side != 2) throw IoError("corrupt share side");
  p.prefix = read_partial_fields(r, p.share_side, params);
  p.keyword = read_partial_fields(r, p.share_side, params);
  return p;
}

void write_response(ByteWriter& w, const SearchResponse& s) {
  w.u8(static_cast<std::uint8_t>(s.share_side));
  w.u64(s.object_count);
  write_bitmaps(w, s.prefix);
  write_bitmaps(w, s.keyword);
  w.u32(static_cast<std::uint32_t>(s.candidates.size()));
  for (const auto& [id, bytes] : s.candidates) {
    w.u64(id);
    w.blob(bytes);
  }
}

SearchResponse read_response(ByteReader& r) {
  SearchResponse s;
  s.share_side = r.u8();
  if (s.share_side != 1 && s.share_side != 2) throw IoError("corrupt share side");
  s.object_count = static_cast<std::size_t>(r.u64());
  s.prefix = read_bitmaps(r);
  s.keyword = read_bitmaps(r);
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint64_t id = r.u64();
    s.candidates.emplace_back(id, r.blob());
  }
  return s;
}

void write_redistribution(ByteWriter& w, const RedistributionBatch& b, const PublicParams& params) {
  write_redistribution_entries(w, b.prefix, params);
  write_redistribution_entries(w, b.keyword, params);
}

RedistributionBatch read_redistribution(ByteReader& r, const PublicParams& params) {
  RedistributionBatch b;
  b.prefix = read_redistribution_entries(r, params);
  b.keyword = read_redistribution_entries(r, params);
  return b;
}

}  // namespace brasp
