#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brasp/bytes.hpp"

namespace brasp {

enum class ActorId : std::uint8_t { kDataOwner = 0, kClient = 1, kCs1 = 2, kCs2 = 3 };

const char* to_string(ActorId a);
ActorId actor_from_string(std::string_view s);
inline ActorId server_actor(int side) { return side == 1 ? ActorId::kCs1 : ActorId::kCs2; }

enum class Phase : std::uint8_t {
  kSetup = 1,
  kBuild,
  kBuildObjects,
  kBuildState,
  kShuffleOut,
  kShuffleBack,
  kQueryToken,
  kQueryPartial,
  kQueryResponse,
  kRedistribute,
  kUpdateToken,
  kUpdatePositions,
  kUpdateMerged,
};

const char* to_string(Phase p);
Phase phase_from_string(std::string_view s);
bool is_query_phase(Phase p);
bool is_maintenance_phase(Phase p);

struct Envelope {
  std::uint64_t seq = 0;
  ActorId sender = ActorId::kDataOwner;
  ActorId receiver = ActorId::kDataOwner;
  std::uint64_t epoch = 0;
  Phase phase = Phase::kSetup;
  std::uint32_t term_count = 0;  // entries, labels or tokens carried
  Bytes payload;

  std::size_t size() const { return payload.size(); }
  friend bool operator==(const Envelope&, const Envelope&) = default;
};

class Transcript {
 public:
  void append(Envelope e);
  const std::vector<Envelope>& envelopes() const { return envelopes_; }
  // Everything an actor sent or received.
  std::vector<Envelope> view(ActorId actor) const;

  std::size_t size() const { return envelopes_.size(); }
  std::uint64_t total_bytes() const;
  std::uint64_t bytes_in(Phase phase) const;
  std::uint64_t terms_in(Phase phase) const;

  void serialize(ByteWriter& w) const;
  static Transcript deserialize(ByteReader& r);

  // One JSON object per line, payload hex-encoded.
  std::string to_jsonl() const;
  static Transcript from_jsonl(std::string_view text);

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<Envelope> envelopes_;
};

}  // namespace brasp
