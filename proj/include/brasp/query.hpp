#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brasp/index.hpp"
#include "brasp/keys.hpp"

namespace brasp {

// kCorrected combines both servers' share bitmaps per term at the client;
// kLiteral unions the two servers' locally intersected candidate sets.
enum class ResultMode : std::uint8_t { kCorrected = 1, kLiteral = 2 };

struct BooleanRangeQuery {
  SpatialRange range;
  std::vector<std::string> keywords;  // empty means range-only

  static BooleanRangeQuery from_rect(const Rect& rect, std::vector<std::string> keywords,
                                     const GridSpec& grid);
};

// Per-term shuffle counters held by the client. Keywords inserted by an update
// join at the current epoch, so every counter tracks the epoch.
class ShuffleStateTable {
 public:
  std::uint64_t epoch() const { return epoch_; }
  bool knows(const Term& term) const { return terms_.count(term) != 0; }
  // Counter of a known term; the global epoch for unknown terms.
  std::uint64_t counter(const Term& term) const;
  void register_term(const Term& term, std::uint64_t counter);
  // Every counter and the epoch advance by one.
  void advance();

  std::size_t size() const { return terms_.size(); }

  void serialize(ByteWriter& w) const;
  static ShuffleStateTable deserialize(ByteReader& r);

  friend bool operator==(const ShuffleStateTable&, const ShuffleStateTable&) = default;

 private:
  std::map<Term, std::uint64_t> terms_;
  std::uint64_t epoch_ = 0;
};

struct TrapdoorSet {
  std::vector<TpfLabel> keyword;
  std::vector<TpfLabel> prefix;

  std::size_t size() const { return keyword.size() + prefix.size(); }
};

// Client-side view of a query: the plaintext terms in trapdoor order.
struct QueryPlan {
  std::vector<Term> keyword_terms;
  std::vector<Term> prefix_terms;
  TrapdoorSet trapdoors;
};

// Keyword trapdoors tpf_rnd(k_u * (r1 r2)^U_w, w) and likewise for every
// prefix of the minimum cover of the query range.
QueryPlan token_generation(const BooleanRangeQuery& query, const PublicParams& params,
                           const ClientKeys& keys, const ShuffleStateTable& states);

struct PartialField {
  std::vector<PartialDecryption> chunks;
};

// Partial decryptions of the resolver's own index share. nullopt marks a
// trapdoor with no matching entry.
struct PartialSet {
  int share_side = 1;
  std::vector<std::optional<PartialField>> prefix;
  std::vector<std::optional<PartialField>> keyword;
};

struct Resolution {
  PartialSet partials;
  std::vector<std::optional<std::size_t>> prefix_positions;
  std::vector<std::optional<std::size_t>> keyword_positions;
};

// Re-encrypts each trapdoor with rk_{u->M}, finds the entry with that label
// and partially decrypts its ID field with the local share key.
Resolution server_resolve(const TrapdoorSet& trapdoors, const IndexShares& own,
                          const ServerKeys& keys, const PublicParams& params);

struct SearchResponse {
  int share_side = 1;  // which share the bitmaps below belong to
  std::size_t object_count = 0;
  std::vector<std::optional<Bitmap>> prefix;
  std::vector<std::optional<Bitmap>> keyword;
  // Sealed objects selected by this server. Literal mode: its local
  // (union of prefix bitmaps) AND (intersection of keyword bitmaps).
  // Corrected mode: the union of prefix bitmaps only.
  std::vector<std::pair<std::uint64_t, Bytes>> candidates;
};

// Completes the peer's partial decryptions with the local share key.
SearchResponse server_complete(const PartialSet& from_peer, const ServerKeys& keys,
                               const ObjectStore& store, ResultMode mode,
                               const PublicParams& params);

struct ResultSet {
  std::vector<std::uint64_t> ids;
  std::vector<Bytes> objects;  // opened payloads, parallel to ids
};

struct RecoveredQuery {
  ResultSet result;
  // Full per-term bitmaps (corrected mode); nullopt for unindexed terms.
  std::vector<std::optional<Bitmap>> prefix_full;
  std::vector<std::optional<Bitmap>> keyword_full;
};

RecoveredQuery client_recover(const SearchResponse& first, const SearchResponse& second,
                              ResultMode mode, const ClientKeys& keys);

struct RedistributionEntry {
  TpfLabel trapdoor;
  PackedBitmap id_field;
};

struct RedistributionBatch {
  std::vector<RedistributionEntry> prefix;
  std::vector<RedistributionEntry> keyword;

  std::size_t size() const { return prefix.size() + keyword.size(); }
};

// Fresh disjoint split of every touched term's full bitmap; element [0] is
// addressed to server 1.
std::pair<RedistributionBatch, RedistributionBatch> index_redistribution(
    const QueryPlan& plan, const RecoveredQuery& recovered, const PublicParams& params, Rng& rng);

// Replaces ID fields in place. Throws ProtocolError when a label no longer
// resolves (a shuffle intervened).
void server_apply_redistribution(const RedistributionBatch& batch, IndexShares& own,
                                 const ServerKeys& keys, const PublicParams& params);

// Wire encodings.
void write_trapdoors(ByteWriter& w, const TrapdoorSet& t);
TrapdoorSet read_trapdoors(ByteReader& r, const PublicParams& params);
void write_partials(ByteWriter& w, const PartialSet& p, const PublicParams& params);
PartialSet read_partials(ByteReader& r, const PublicParams& params);
void write_response(ByteWriter& w, const SearchResponse& s);
SearchResponse read_response(ByteReader& r);
void write_redistribution(ByteWriter& w, const RedistributionBatch& b, const PublicParams& params);
RedistributionBatch read_redistribution(ByteReader& r, const PublicParams& params);

}  // namespace brasp
