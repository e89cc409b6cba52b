#include "brasp/transcript.hpp"

#include <array>
#include <sstream>

#include <nlohmann/json.hpp>

#include "brasp/error.hpp"

namespace brasp {

namespace {

constexpr std::array<const char*, 4> kActorNames = {"DataOwner", "Client", "CS1", "CS2"};

constexpr std::array<const char*, 13> kPhaseNames = {
    "setup",       "build",        "build_objects",  "build_state",     "shuffle_out",
    "shuffle_back", "query_token", "query_partial",  "query_response",  "redistribute",
    "update_token", "update_positions", "update_merged",
};

}  // namespace

const char* to_string(ActorId a) { return kActorNames.at(static_cast<std::size_t>(a)); }

ActorId actor_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kActorNames.size(); ++i) {
    if (s == kActorNames[i]) return static_cast<ActorId>(i);
  }
  throw IoError("unknown actor: " + std::string(s));
}

const char* to_string(Phase p) { return kPhaseNames.at(static_cast<std::size_t>(p) - 1); }

Phase phase_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (s == kPhaseNames[i]) return static_cast<Phase>(i + 1);
  }
  throw IoError("unknown phase: " + std::string(s));
}

bool is_query_phase(Phase p) {
  return p == Phase::kQueryToken || p == Phase::kQueryPartial || p == Phase::kQueryResponse;
}

bool is_maintenance_phase(Phase p) {
  switch (p) {
    case Phase::kShuffleOut:
    case Phase::kShuffleBack:
    case Phase::kUpdateToken:
    case Phase::kUpdatePositions:
    case Phase::kUpdateMerged:
      return true;
    default:
      return false;
  }
}

void Transcript::append(Envelope e) {
  if (!envelopes_.empty() && e.seq <= envelopes_.back().seq) {
    throw ProtocolError("envelope sequence must increase");
  }
  envelopes_.push_back(std::move(e));
}

std::vector<Envelope> Transcript::view(ActorId actor) const {
  std::vector<Envelope> out;
  for (const Envelope& e : envelopes_) {
    if (e.sender == actor || e.receiver == actor) out.push_back(e);
  }
  return out;
}

std::uint64_t Transcript::total_bytes() const {
  std::uint64_t total = 0;
  for (const Envelope& e : envelopes_) total += e.size();
  return total;
}

std::uint64_t Transcript::bytes_in(Phase phase) const {
  std::uint64_t total = 0;
  for (const Envelope& e : envelopes_) {
    if (e.phase == phase) total += e.size();
  }
  return total;
}

std::uint64_t Transcript::terms_in(Phase phase) const {
  std::uint64_t total = 0;
  for (const Envelope& e : envelopes_) {
    if (e.phase == phase) total += e.term_count;
  }
  return total;
}

void Transcript::serialize(ByteWriter& w) const {
  w.u64(envelopes_.size());
  for (const Envelope& e : envelopes_) {
    w.u64(e.seq);
    w.u8(static_cast<std::uint8_t>(e.sender));
    w.u8(static_cast<std::uint8_t>(e.receiver));
    w.u64(e.epoch);
    w.u8(static_cast<std::uint8_t>(e.phase));
    w.u32(e.term_count);
    w.blob(e.payload);
  }
}

Transcript Transcript::deserialize(ByteReader& r) {
  Transcript t;
  std::uint64_t count = r.u64();
  if (count > r.remaining()) throw IoError("truncated transcript");
  for (std::uint64_t i = 0; i < count; ++i) {
    Envelope e;
    e.seq = r.u64();
    std::uint8_t sender = r.u8();
    std::uint8_t receiver = r.u8();
    if (sender > 3 || receiver > 3) throw IoError("corrupt actor id");
    e.sender = static_cast<ActorId>(sender);
    e.receiver = static_cast<ActorId>(receiver);
    e.epoch = r.u64();
    std::uint8_t phase = r.u8();
    if (phase < 1 || phase > kPhaseNames.size()) throw IoError("corrupt phase");
    e.phase = static_cast<Phase>(phase);
    e.term_count = r.u32();
    e.payload = r.blob();
    t.envelopes_.push_back(std::move(e));
  }
  return t;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const Envelope& e : envelopes_) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["sender"] = to_string(e.sender);
    j["receiver"] = to_string(e.receiver);
    j["epoch"] = e.epoch;
    j["phase"] = to_string(e.phase);
    j["terms"] = e.term_count;
    j["size"] = e.size();
    j["payload"] = to_hex(e.payload);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_jsonl(std::string_view text) {
  Transcript t;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Envelope e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.sender = actor_from_string(j.at("sender").get<std::string>());
      e.receiver = actor_from_string(j.at("receiver").get<std::string>());
      e.epoch = j.at("epoch").get<std::uint64_t>();
      e.phase = phase_from_string(j.at("phase").get<std::string>());
      e.term_count = j.at("terms").get<std::uint32_t>();
      e.payload = from_hex(j.at("payload").get<std::string>());
      if (e.payload.size() != j.at("size").get<std::size_t>()) throw IoError("envelope size mismatch");
      t.append(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw IoError(std::string("bad transcript line: ") + ex.what());
    }
  }
  return t;
}

}  // namespace brasp
