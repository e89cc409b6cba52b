#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "brasp/index.hpp"
#include "brasp/keys.hpp"
#include "brasp/maintenance.hpp"
#include "brasp/query.hpp"
#include "brasp/transcript.hpp"

namespace brasp {

struct HarnessConfig {
  std::uint64_t seed = 1;
  unsigned paillier_bits = 2048;
  unsigned slot_bits = 16;
  GridSpec grid = GridSpec::unit_cells(3);
  // Run a shuffle round right after build and after every redistribution.
  bool auto_shuffle = true;
  ResultMode mode = ResultMode::kCorrected;

  void serialize(ByteWriter& w) const;
  static HarnessConfig deserialize(ByteReader& r);
};

// Plaintext record sealed into the object store.
Bytes encode_object(const SpatioTextualObject& obj);
SpatioTextualObject decode_object(ByteView data);

struct DataOwnerState {
  Setup setup;
  std::vector<SpatioTextualObject> db;
  bool built = false;
  Rng rng = Rng::from_seed(0);
};

struct ClientState {
  PublicParams params;
  ClientKeys keys;
  ShuffleStateTable states;
  std::uint64_t object_count = 0;
  bool ready = false;  // received build state
  Rng rng = Rng::from_seed(0);
  // In-flight query.
  std::optional<QueryPlan> plan;
  ResultMode mode = ResultMode::kCorrected;
  std::vector<SearchResponse> responses;
  std::optional<RecoveredQuery> recovered;
  std::vector<Term> pending_fresh;
};

struct ServerState {
  int side = 1;
  PublicParams params;
  ServerKeys keys;
  IndexShares shares;
  ObjectStore store;
  std::uint64_t epoch = 0;
  bool keyed = false;
  Rng rng = Rng::from_seed(0);
  // Per-exchange scratch.
  std::optional<ResultMode> query_mode;
  std::optional<UpdateTokenSet> peer_tokens;  // tokens for the peer's indexes
  Bytes pending_object;
  int merges_left = 0;
};

// What a single query returned to the client.
struct QueryOutcome {
  ResultSet result;
  std::vector<SpatioTextualObject> objects;
  std::size_t trapdoors_per_server = 0;
};

// The four parties wired over an in-process FIFO fabric. Every transfer is
// an Envelope whose payload the receiver decodes, so transcripts carry the
// exact bytes exchanged. Each public action runs to completion.
class Deployment {
 public:
  // Keygen at the data owner and key distribution to all parties.
  explicit Deployment(const HarnessConfig& config);

  const HarnessConfig& config() const { return config_; }

  void ingest(std::vector<SpatioTextualObject> objects);
  void build();
  void shuffle();
  QueryOutcome query(const BooleanRangeQuery& q);
  QueryOutcome query(const BooleanRangeQuery& q, ResultMode mode);
  void redistribute();
  // Appends `obj`; its id is reassigned to the current object count.
  void update(SpatioTextualObject obj);

  // query, then redistribute, then shuffle when auto_shuffle is on.
  QueryOutcome search(const BooleanRangeQuery& q);

  std::uint64_t epoch() const { return client_.states.epoch(); }
  std::uint64_t object_count() const { return client_.object_count; }
  bool awaiting_redistribution() const { return client_.recovered.has_value(); }

  const Transcript& transcript() const { return transcript_; }
  const DataOwnerState& owner() const { return owner_; }
  const ClientState& client() const { return client_; }
  const ServerState& server(int side) const { return side == 1 ? cs1_ : cs2_; }
  const PublicParams& params() const { return owner_.setup.params; }

  // Secrets that must never reach a server: k_M and the Paillier factors.
  std::vector<Bytes> server_forbidden_secrets() const;
  // Returns the number of server-bound envelopes carrying a forbidden secret,
  // plus any envelope at all carrying the opposite server's share key.
  std::size_t key_containment_violations() const;

  Bytes save() const;
  static Deployment load(ByteView data);

 private:
  Deployment() = default;

  void send(ActorId from, ActorId to, Phase phase, std::uint32_t terms, Bytes payload);
  void run();
  void dispatch(const Envelope& e);
  void require_idle(const char* action) const;
  std::uint64_t epoch_of(ActorId a) const;

  void on_client(const Envelope& e);
  void on_server(ServerState& s, const Envelope& e);
  ServerState& peer_of(const ServerState& s) { return s.side == 1 ? cs2_ : cs1_; }

  HarnessConfig config_;
  DataOwnerState owner_;
  ClientState client_;
  ServerState cs1_;
  ServerState cs2_;
  Transcript transcript_;
  std::deque<Envelope> queue_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace brasp
