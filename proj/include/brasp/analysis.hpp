#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brasp/index.hpp"
#include "brasp/keys.hpp"
#include "brasp/query.hpp"
#include "brasp/transcript.hpp"

namespace brasp {

// { i : loc_i in R and every query keyword is among W_i }.
std::vector<std::uint64_t> pbrq_oracle(const std::vector<SpatioTextualObject>& db,
                                       const BooleanRangeQuery& q);

struct PatternMatrix {
  // alpha[l][j] = 1 iff object j is in the result of query l.
  std::vector<std::vector<std::uint8_t>> alpha;
  // sigma[l][k] = 1 iff queries l and k are the same query.
  std::vector<std::vector<std::uint8_t>> sigma;
};

PatternMatrix pattern_matrices(const std::vector<BooleanRangeQuery>& history,
                               const std::vector<SpatioTextualObject>& db);

// Independent cover by dynamic programming over the prefix trie: a node fully
// inside the range costs 1, a disjoint node 0, a straddling node the sum of
// its children. The root is never used. Width is limited to 10.
RangeCover min_cover_oracle(const SpatialRange& range, unsigned width);

struct LinkageReport {
  // Repeated-query linking by trapdoor equality.
  std::uint64_t query_pairs_repeated = 0;
  std::uint64_t query_pairs_linked = 0;
  std::uint64_t query_pairs_distinct = 0;
  std::uint64_t query_pairs_false_links = 0;
  // Entry-level byte equality across consecutive shuffle views.
  std::uint64_t entries_compared = 0;
  std::uint64_t label_links = 0;
  std::uint64_t ciphertext_links = 0;
  std::uint64_t tag_links = 0;
  // Position persistence (ground truth needed; filled by callers that have it).
  std::uint64_t position_trials = 0;
  std::uint64_t position_persistent = 0;
  double chance_baseline = 0;

  double query_link_rate() const;
  double byte_link_rate() const;
  double position_rate() const;
  std::string verdict() const;
  std::string to_json() const;
};

// Labels carried by a query-token payload.
std::vector<TpfLabel> token_labels(const Envelope& e, const PublicParams& params);

// What one server can link from its own view. `query_keys[i]` is the
// ground-truth identity of the i-th query token the observer received; two
// queries are linked when their tokens share any label. Shuffle views are
// compared round by round for each share side.
LinkageReport adversary_linkage(const Transcript& transcript, ActorId observer,
                                const std::vector<std::string>& query_keys,
                                const PublicParams& params);

// Entries whose position is unchanged across one round, matched through the
// label law label_after = label_before^(r1 r2).
std::uint64_t persistent_positions(const EncryptedIndex& before, const EncryptedIndex& after,
                                   const PublicParams& params, const ShuffleParams& shuffle);

// Ordinary least squares y = a + b x.
struct LinearFit {
  double intercept = 0;
  double slope = 0;
  double r2 = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Acceptance band for a binomial count: trials * p +- z * sd, normal
// approximation.
struct CountBand {
  double lo = 0;
  double hi = 0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};
CountBand binomial_band(std::uint64_t trials, double p, double z);

}  // namespace brasp
