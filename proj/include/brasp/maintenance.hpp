#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "brasp/index.hpp"
#include "brasp/keys.hpp"
#include "brasp/query.hpp"

namespace brasp {

// One server pass over another server's (or its own) index: labels raised to
// r, every ciphertext re-randomized, tags stepped with F(tau, r), entries
// permuted uniformly.
EncryptedIndex shuffle_hop(const EncryptedIndex& in, const mpz_class& r, const PublicParams& params,
                           Rng& rng);

// A full round in one call: server 1's shares go through server 2 then back,
// and symmetrically. rng1 drives server 1's hops, rng2 server 2's.
void index_shuffle_round(IndexShares& cs1, IndexShares& cs2, const ShuffleParams& shuffle,
                         const PublicParams& params, Rng& rng1, Rng& rng2);

// The client's side of a finished round.
void advance_states(ShuffleStateTable& states);

// Tag of a term's entry on `side` after `rounds` shuffle rounds.
Tag current_tag(const Term& term, int side, std::uint64_t rounds, const PublicParams& params,
                const TagKey& tag_key, const ShuffleParams& shuffle);

// P_k: the position address of an entry carrying `tag`.
Tag position_of(const TagKey& position_key, const Tag& tag);

struct UpdateToken {
  // Known term: address of the target entry; delta holds a single chunk.
  std::optional<Tag> address;
  std::uint32_t chunk = 0;
  // Fresh keyword: client-side label and initial tag; delta holds the whole
  // packed bitmap.
  std::optional<TpfLabel> label;
  std::optional<Tag> tag;
  PackedBitmap delta;

  bool fresh() const { return label.has_value(); }
};

// Tokens for one server's indexes (UT^{h_b}, UT^{w_b}).
struct UpdateTokenSet {
  int target_side = 1;
  std::uint64_t object_id = 0;
  std::vector<UpdateToken> prefix;
  std::vector<UpdateToken> keyword;

  std::size_t size() const { return prefix.size() + keyword.size(); }
  const std::vector<UpdateToken>& of(IndexKind kind) const {
    return kind == IndexKind::kPrefix ? prefix : keyword;
  }
};

struct UpdateRequest {
  UpdateTokenSet for_cs1;
  UpdateTokenSet for_cs2;
  Bytes sealed_object;
  std::vector<Term> fresh_keywords;  // to register once the merge completes
};

// Object terms: the gamma non-trivial prefixes of its Hilbert value plus its
// distinct normalized keywords. Each term's new bit lands in one share chosen
// uniformly; the other share receives an encrypted zero.
UpdateRequest update_token_generation(const SpatioTextualObject& obj, std::uint64_t object_id,
                                      ByteView object_plaintext, const PublicParams& params,
                                      const ClientKeys& keys, const ShuffleStateTable& states,
                                      Rng& rng);

// Step 1 at the holder: every entry's ID field, re-randomized and padded to
// the post-insert chunk count, keyed by its position address and sorted.
struct PositionList {
  IndexKind kind = IndexKind::kKeyword;
  std::vector<std::pair<Tag, PackedBitmap>> fields;
};
PositionList update_prepare(const EncryptedIndex& own, std::size_t objects_after,
                            const ServerKeys& keys, const PublicParams& params, Rng& rng);

// Step 2 at the peer: deltas added where addressed, every position
// re-randomized once. Fresh tokens are passed through with re-randomized
// ciphertexts. Throws ProtocolError for an address that matches no position.
struct MergedList {
  IndexKind kind = IndexKind::kKeyword;
  std::vector<std::pair<Tag, PackedBitmap>> fields;
  std::vector<UpdateToken> fresh;
};
MergedList update_merge(const PositionList& list, const std::vector<UpdateToken>& tokens,
                        const PublicParams& params, Rng& rng);

// Step 3 at the holder: ID fields replaced by address, fresh entries
// appended with labels moved to the master key.
void update_finish(const MergedList& merged, EncryptedIndex& own, const ServerKeys& keys,
                   const PublicParams& params);

// Steps 1-3 for both of one server's indexes in a single call.
void server_update_merge(const UpdateTokenSet& tokens, IndexShares& holder, ObjectStore& store,
                         ByteView sealed_object, const ServerKeys& holder_keys,
                         const PublicParams& params, Rng& holder_rng, Rng& peer_rng);

// Wire encodings.
void write_index(ByteWriter& w, const EncryptedIndex& index, const PublicParams& params);
EncryptedIndex read_index(ByteReader& r, const PublicParams& params);
void write_update_tokens(ByteWriter& w, const UpdateTokenSet& t, const PublicParams& params);
UpdateTokenSet read_update_tokens(ByteReader& r, const PublicParams& params);
void write_position_list(ByteWriter& w, const PositionList& l, const PublicParams& params);
PositionList read_position_list(ByteReader& r, const PublicParams& params);
void write_merged_list(ByteWriter& w, const MergedList& l, const PublicParams& params);
MergedList read_merged_list(ByteReader& r, const PublicParams& params);

}  // namespace brasp
