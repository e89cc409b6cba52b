#include "brasp/harness.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#include <openssl/sha.h>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {

namespace {

constexpr char kMagic[4] = {'B', 'R', 'S', 'P'};
constexpr std::uint16_t kStateVersion = 1;

void write_shares(ByteWriter& w, const IndexShares& s, const PublicParams& params) {
  write_index(w, s.prefix, params);
  write_index(w, s.keyword, params);
}

IndexShares read_shares(ByteReader& r, const PublicParams& params) {
  IndexShares s;
  s.prefix = read_index(r, params);
  s.keyword = read_index(r, params);
  if (s.prefix.kind != IndexKind::kPrefix || s.keyword.kind != IndexKind::kKeyword) {
    throw IoError("index kinds out of order");
  }
  return s;
}

void write_store(ByteWriter& w, const ObjectStore& s) {
  w.u32(static_cast<std::uint32_t>(s.sealed.size()));
  for (const Bytes& b : s.sealed) w.blob(b);
}

ObjectStore read_store(ByteReader& r) {
  ObjectStore s;
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated object store");
  for (std::uint32_t i = 0; i < count; ++i) s.sealed.push_back(r.blob());
  return s;
}

void write_term(ByteWriter& w, const Term& t) {
  w.u8(static_cast<std::uint8_t>(t.kind));
  w.str(t.text);
}

Term read_term(ByteReader& r) {
  Term t;
  std::uint8_t kind = r.u8();
  if (kind != 1 && kind != 2) throw IoError("corrupt term kind");
  t.kind = static_cast<IndexKind>(kind);
  t.text = r.str();
  return t;
}

void write_terms(ByteWriter& w, const std::vector<Term>& terms) {
  w.u32(static_cast<std::uint32_t>(terms.size()));
  for (const Term& t : terms) write_term(w, t);
}

std::vector<Term> read_terms(ByteReader& r) {
  std::vector<Term> out;
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated term list");
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(read_term(r));
  return out;
}

void write_optional_bitmaps(ByteWriter& w, const std::vector<std::optional<Bitmap>>& maps) {
  w.u32(static_cast<std::uint32_t>(maps.size()));
  for (const auto& b : maps) {
    w.u8(b ? 1 : 0);
    if (b) b->serialize(w);
  }
}

std::vector<std::optional<Bitmap>> read_optional_bitmaps(ByteReader& r) {
  std::vector<std::optional<Bitmap>> out;
  std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.u8() != 0) {
      out.emplace_back(Bitmap::deserialize(r));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest(ByteView data) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

}  // namespace

void HarnessConfig::serialize(ByteWriter& w) const {
  w.u64(seed);
  w.u32(paillier_bits);
  w.u8(static_cast<std::uint8_t>(slot_bits));
  w.u64(std::bit_cast<std::uint64_t>(grid.x_min));
  w.u64(std::bit_cast<std::uint64_t>(grid.y_min));
  w.u64(std::bit_cast<std::uint64_t>(grid.x_max));
  w.u64(std::bit_cast<std::uint64_t>(grid.y_max));
  w.u8(static_cast<std::uint8_t>(grid.order));
  w.u8(auto_shuffle ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(mode));
}

HarnessConfig HarnessConfig::deserialize(ByteReader& r) {
  HarnessConfig c;
  c.seed = r.u64();
  c.paillier_bits = r.u32();
  c.slot_bits = r.u8();
  double x_min = std::bit_cast<double>(r.u64());
  double y_min = std::bit_cast<double>(r.u64());
  double x_max = std::bit_cast<double>(r.u64());
  double y_max = std::bit_cast<double>(r.u64());
  c.grid = GridSpec::make(x_min, y_min, x_max, y_max, r.u8());
  c.auto_shuffle = r.u8() != 0;
  std::uint8_t mode = r.u8();
  if (mode != 1 && mode != 2) throw IoError("corrupt result mode");
  c.mode = static_cast<ResultMode>(mode);
  return c;
}

Bytes encode_object(const SpatioTextualObject& obj) {
  ByteWriter w;
  w.u64(obj.id);
  w.u64(obj.location);
  w.u32(static_cast<std::uint32_t>(obj.keywords.size()));
  for (const std::string& k : obj.keywords) w.str(k);
  w.blob(obj.payload);
  return w.take();
}

SpatioTextualObject decode_object(ByteView data) {
  ByteReader r(data);
  SpatioTextualObject obj;
  obj.id = r.u64();
  obj.location = r.u64();
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated object");
  for (std::uint32_t i = 0; i < count; ++i) obj.keywords.push_back(r.str());
  obj.payload = r.blob();
  r.expect_done();
  return obj;
}

Deployment::Deployment(const HarnessConfig& config) : config_(config) {
  Rng root = Rng::from_seed(config.seed);
  owner_.rng = root.derive("data-owner");
  client_.rng = root.derive("client");
  cs1_.rng = root.derive("cs1");
  cs2_.rng = root.derive("cs2");
  cs1_.side = 1;
  cs2_.side = 2;

  SetupOptions opts;
  opts.group = Group::for_security(128);
  opts.grid = config.grid;
  opts.paillier_bits = config.paillier_bits;
  opts.slot_bits = config.slot_bits;
  owner_.setup = run_keygen(opts, owner_.rng);

  for (int side = 1; side <= 2; ++side) {
    ByteWriter w;
    write_params(w, owner_.setup.params);
    write_server_keys(w, server_keys(owner_.setup, side));
    send(ActorId::kDataOwner, server_actor(side), Phase::kSetup, 0, w.take());
  }
  ByteWriter w;
  write_params(w, owner_.setup.params);
  write_client_keys(w, client_keys(owner_.setup));
  send(ActorId::kDataOwner, ActorId::kClient, Phase::kSetup, 0, w.take());
  run();
}

void Deployment::send(ActorId from, ActorId to, Phase phase, std::uint32_t terms, Bytes payload) {
  Envelope e;
  e.seq = next_seq_++;
  e.sender = from;
  e.receiver = to;
  e.epoch = epoch_of(from);
  e.phase = phase;
  e.term_count = terms;
  e.payload = std::move(payload);
  transcript_.append(e);
  queue_.push_back(std::move(e));
}

std::uint64_t Deployment::epoch_of(ActorId a) const {
  switch (a) {
    case ActorId::kDataOwner:
      return 0;
    case ActorId::kClient:
      return client_.states.epoch();
    case ActorId::kCs1:
      return cs1_.epoch;
    case ActorId::kCs2:
      return cs2_.epoch;
  }
  return 0;
}

void Deployment::run() {
  try {
    while (!queue_.empty()) {
      Envelope e = std::move(queue_.front());
      queue_.pop_front();
      dispatch(e);
    }
  } catch (...) {
    queue_.clear();
    throw;
  }
}

void Deployment::dispatch(const Envelope& e) {
  if (e.epoch != epoch_of(e.receiver)) {
    throw ProtocolError(std::string("epoch desync at ") + to_string(e.receiver));
  }
  switch (e.receiver) {
    case ActorId::kDataOwner:
      throw ProtocolError("the data owner accepts no messages");
    case ActorId::kClient:
      on_client(e);
      break;
    case ActorId::kCs1:
      on_server(cs1_, e);
      break;
    case ActorId::kCs2:
      on_server(cs2_, e);
      break;
  }
}

void Deployment::require_idle(const char* action) const {
  if (client_.recovered) {
    throw ProtocolError(std::string("redistribution must follow a query before ") + action);
  }
}

void Deployment::on_client(const Envelope& e) {
  ByteReader r(e.payload);
  switch (e.phase) {
    case Phase::kSetup:
      client_.params = read_params(r);
      client_.keys = read_client_keys(r);
      break;
    case Phase::kBuildState: {
      client_.object_count = r.u64();
      for (const PrefixElement& p : prefix_universe(client_.params.grid.bits())) {
        client_.states.register_term(Term::prefix(p), client_.states.epoch());
      }
      for (const Term& t : read_terms(r)) client_.states.register_term(t, client_.states.epoch());
      client_.ready = true;
      break;
    }
    case Phase::kQueryResponse:
      if (!client_.plan) throw ProtocolError("unexpected search response");
      client_.responses.push_back(read_response(r));
      if (client_.responses.size() == 2) {
        const SearchResponse& a = client_.responses[0];
        const SearchResponse& b = client_.responses[1];
        const SearchResponse& first = a.share_side == 1 ? a : b;
        const SearchResponse& second = a.share_side == 1 ? b : a;
        client_.recovered = client_recover(first, second, client_.mode, client_.keys);
        client_.responses.clear();
      }
      break;
    default:
      throw ProtocolError(std::string("client cannot handle phase ") + to_string(e.phase));
  }
  r.expect_done();
}

void Deployment::on_server(ServerState& s, const Envelope& e) {
  const ActorId self = server_actor(s.side);
  const ActorId peer = server_actor(3 - s.side);
  if (e.phase != Phase::kSetup && !s.keyed) throw ProtocolError("server has no keys yet");
  ByteReader r(e.payload);
  switch (e.phase) {
    case Phase::kSetup:
      s.params = read_params(r);
      s.keys = read_server_keys(r);
      if (s.keys.side != s.side) throw ProtocolError("server keys addressed to the wrong side");
      s.keyed = true;
      break;
    case Phase::kBuild:
      s.shares = read_shares(r, s.params);
      break;
    case Phase::kBuildObjects:
      s.store = read_store(r);
      break;
    case Phase::kShuffleOut: {
      // The peer's shares: one hop with the local parameter, then back.
      IndexShares in = read_shares(r, s.params);
      ByteWriter w;
      std::uint32_t terms = 0;
      for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
        if (in.of(kind).side == s.side) throw ProtocolError("own shares sent for an outbound hop");
        EncryptedIndex hopped = shuffle_hop(in.of(kind), s.keys.shuffle_param, s.params, s.rng);
        terms += static_cast<std::uint32_t>(hopped.size());
        write_index(w, hopped, s.params);
      }
      r.expect_done();
      send(self, peer, Phase::kShuffleBack, terms, w.take());
      return;
    }
    case Phase::kShuffleBack: {
      IndexShares in = read_shares(r, s.params);
      for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
        if (in.of(kind).side != s.side) throw ProtocolError("foreign shares returned");
        s.shares.of(kind) = shuffle_hop(in.of(kind), s.keys.shuffle_param, s.params, s.rng);
      }
      ++s.epoch;
      break;
    }
    case Phase::kQueryToken: {
      std::uint8_t mode = r.u8();
      if (mode != 1 && mode != 2) throw ProtocolError("unknown result mode");
      s.query_mode = static_cast<ResultMode>(mode);
      TrapdoorSet t = read_trapdoors(r, s.params);
      r.expect_done();
      Resolution res = server_resolve(t, s.shares, s.keys, s.params);
      ByteWriter w;
      write_partials(w, res.partials, s.params);
      send(self, peer, Phase::kQueryPartial, static_cast<std::uint32_t>(t.size()), w.take());
      return;
    }
    case Phase::kQueryPartial: {
      if (!s.query_mode) throw ProtocolError("partials arrived before the query token");
      PartialSet p = read_partials(r, s.params);
      r.expect_done();
      SearchResponse resp = server_complete(p, s.keys, s.store, *s.query_mode, s.params);
      s.query_mode.reset();
      ByteWriter w;
      write_response(w, resp);
      send(self, ActorId::kClient, Phase::kQueryResponse,
           static_cast<std::uint32_t>(resp.prefix.size() + resp.keyword.size()), w.take());
      return;
    }
    case Phase::kRedistribute: {
      RedistributionBatch b = read_redistribution(r, s.params);
      server_apply_redistribution(b, s.shares, s.keys, s.params);
      break;
    }
    case Phase::kUpdateToken: {
      UpdateTokenSet t = read_update_tokens(r, s.params);
      Bytes sealed = r.blob();
      r.expect_done();
      if (t.target_side == s.side) throw ProtocolError("tokens for local indexes must come via the peer");
      if (t.object_id != s.store.sealed.size()) throw ProtocolError("object id out of sequence");
      s.peer_tokens = std::move(t);
      s.pending_object = std::move(sealed);
      s.merges_left = 1;
      ByteWriter w;
      std::uint32_t terms = 0;
      for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
        PositionList l = update_prepare(s.shares.of(kind), s.store.sealed.size() + 1, s.keys,
                                        s.params, s.rng);
        terms += static_cast<std::uint32_t>(l.fields.size());
        write_position_list(w, l, s.params);
      }
      send(self, peer, Phase::kUpdatePositions, terms, w.take());
      return;
    }
    case Phase::kUpdatePositions: {
      if (!s.peer_tokens) throw ProtocolError("positions arrived before update tokens");
      ByteWriter w;
      std::uint32_t terms = 0;
      for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
        PositionList l = read_position_list(r, s.params);
        if (l.kind != kind) throw ProtocolError("position lists out of order");
        MergedList m = update_merge(l, s.peer_tokens->of(kind), s.params, s.rng);
        terms += static_cast<std::uint32_t>(m.fields.size() + m.fresh.size());
        write_merged_list(w, m, s.params);
      }
      r.expect_done();
      s.peer_tokens.reset();
      send(self, peer, Phase::kUpdateMerged, terms, w.take());
      return;
    }
    case Phase::kUpdateMerged: {
      if (s.merges_left != 1) throw ProtocolError("unexpected merged list");
      for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
        MergedList m = read_merged_list(r, s.params);
        if (m.kind != kind) throw ProtocolError("merged lists out of order");
        update_finish(m, s.shares.of(kind), s.keys, s.params);
      }
      s.store.sealed.push_back(std::move(s.pending_object));
      s.pending_object.clear();
      s.merges_left = 0;
      break;
    }
    default:
      throw ProtocolError(std::string("server cannot handle phase ") + to_string(e.phase));
  }
  r.expect_done();
}

void Deployment::ingest(std::vector<SpatioTextualObject> objects) {
  require_idle("ingest");
  if (owner_.built) throw ProtocolError("ingest after build; use update");
  for (SpatioTextualObject& o : objects) {
    if (o.location >= config_.grid.cell_count()) throw InvalidArgument("object location outside grid");
    for (std::string& k : o.keywords) k = normalize_keyword(k);
    std::sort(o.keywords.begin(), o.keywords.end());
    o.keywords.erase(std::unique(o.keywords.begin(), o.keywords.end()), o.keywords.end());
    o.id = owner_.db.size();
    owner_.db.push_back(std::move(o));
  }
}

void Deployment::build() {
  require_idle("build");
  if (owner_.built) throw ProtocolError("index already built");
  const Setup& setup = owner_.setup;
  auto [prefix, keyword] = build_plain_indexes(owner_.db, setup.params.grid);
  IndexBuildKeys keys{setup.params.group, setup.master.master, setup.master.tag_key,
                      setup.params.pk, setup.params.packing, &setup.master.paillier};
  auto shares = encrypted_index_build(prefix, keyword, keys, owner_.rng);
  ObjectStore store;
  for (const SpatioTextualObject& o : owner_.db) {
    store.sealed.push_back(object_seal(setup.master.object_key, encode_object(o), owner_.rng));
  }
  const auto terms = static_cast<std::uint32_t>(prefix.entries.size() + keyword.entries.size());
  for (int side = 1; side <= 2; ++side) {
    ByteWriter w;
    write_shares(w, side == 1 ? shares.first : shares.second, setup.params);
    send(ActorId::kDataOwner, server_actor(side), Phase::kBuild, terms, w.take());
  }
  for (int side = 1; side <= 2; ++side) {
    ByteWriter w;
    write_store(w, store);
    send(ActorId::kDataOwner, server_actor(side), Phase::kBuildObjects,
         static_cast<std::uint32_t>(store.sealed.size()), w.take());
  }
  std::vector<Term> vocabulary;
  for (const auto& [t, b] : keyword.entries) vocabulary.push_back(t);
  ByteWriter w;
  w.u64(owner_.db.size());
  write_terms(w, vocabulary);
  send(ActorId::kDataOwner, ActorId::kClient, Phase::kBuildState,
       static_cast<std::uint32_t>(vocabulary.size()), w.take());
  run();
  owner_.built = true;
  if (config_.auto_shuffle) shuffle();
}

void Deployment::shuffle() {
  require_idle("shuffle");
  if (!owner_.built) throw ProtocolError("shuffle before build");
  if (cs1_.epoch != cs2_.epoch || cs1_.epoch != client_.states.epoch()) {
    throw ProtocolError("epoch desync before shuffle");
  }
  for (ServerState* s : {&cs1_, &cs2_}) {
    ByteWriter w;
    write_shares(w, s->shares, s->params);
    send(server_actor(s->side), server_actor(3 - s->side), Phase::kShuffleOut,
         static_cast<std::uint32_t>(s->shares.prefix.size() + s->shares.keyword.size()), w.take());
  }
  run();
  if (cs1_.epoch != cs2_.epoch || cs1_.epoch != client_.states.epoch() + 1) {
    throw ProtocolError("shuffle round did not complete on both servers");
  }
  advance_states(client_.states);
}

QueryOutcome Deployment::query(const BooleanRangeQuery& q) { return query(q, config_.mode); }

QueryOutcome Deployment::query(const BooleanRangeQuery& q, ResultMode mode) {
  require_idle("query");
  if (!client_.ready) throw ProtocolError("query before build");
  client_.plan = token_generation(q, client_.params, client_.keys, client_.states);
  client_.mode = mode;
  const TrapdoorSet& t = client_.plan->trapdoors;
  for (int side = 1; side <= 2; ++side) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(mode));
    write_trapdoors(w, t);
    send(ActorId::kClient, server_actor(side), Phase::kQueryToken,
         static_cast<std::uint32_t>(t.size()), w.take());
  }
  try {
    run();
  } catch (...) {
    client_.plan.reset();
    client_.responses.clear();
    throw;
  }
  if (!client_.recovered) throw ProtocolError("query did not complete");
  QueryOutcome out;
  out.result = client_.recovered->result;
  for (const Bytes& b : out.result.objects) out.objects.push_back(decode_object(b));
  out.trapdoors_per_server = t.size();
  return out;
}

void Deployment::redistribute() {
  if (!client_.recovered || !client_.plan) throw ProtocolError("nothing to redistribute");
  auto batches = index_redistribution(*client_.plan, *client_.recovered, client_.params, client_.rng);
  for (int side = 1; side <= 2; ++side) {
    const RedistributionBatch& b = side == 1 ? batches.first : batches.second;
    ByteWriter w;
    write_redistribution(w, b, client_.params);
    send(ActorId::kClient, server_actor(side), Phase::kRedistribute,
         static_cast<std::uint32_t>(b.size()), w.take());
  }
  client_.plan.reset();
  client_.recovered.reset();
  run();
  if (config_.auto_shuffle) shuffle();
}

QueryOutcome Deployment::search(const BooleanRangeQuery& q) {
  QueryOutcome out = query(q);
  redistribute();
  return out;
}

void Deployment::update(SpatioTextualObject obj) {
  require_idle("update");
  if (!client_.ready) throw ProtocolError("update before build");
  for (std::string& k : obj.keywords) k = normalize_keyword(k);
  std::sort(obj.keywords.begin(), obj.keywords.end());
  obj.keywords.erase(std::unique(obj.keywords.begin(), obj.keywords.end()), obj.keywords.end());
  obj.id = client_.object_count;
  UpdateRequest req = update_token_generation(obj, obj.id, encode_object(obj), client_.params,
                                              client_.keys, client_.states, client_.rng);
  // Tokens for a server's indexes travel through its peer.
  for (int side = 1; side <= 2; ++side) {
    const UpdateTokenSet& t = side == 1 ? req.for_cs2 : req.for_cs1;
    ByteWriter w;
    write_update_tokens(w, t, client_.params);
    w.blob(req.sealed_object);
    send(ActorId::kClient, server_actor(side), Phase::kUpdateToken,
         static_cast<std::uint32_t>(t.size()), w.take());
  }
  run();
  for (const Term& t : req.fresh_keywords) client_.states.register_term(t, client_.states.epoch());
  ++client_.object_count;
}

std::vector<Bytes> Deployment::server_forbidden_secrets() const {
  const MasterKeys& k = owner_.setup.master;
  const std::size_t width = params().scalar_width();
  std::vector<Bytes> out;
  out.push_back(mpz_to_bytes(k.master.value, width));
  const PaillierSecretKey& sec = k.paillier.sec;
  for (const mpz_class* v : {&sec.p, &sec.q, &sec.lambda, &sec.mu, &sec.d}) out.push_back(mpz_to_bytes(*v));
  return out;
}

std::size_t Deployment::key_containment_violations() const {
  const std::vector<Bytes> forbidden = server_forbidden_secrets();
  const MasterKeys& k = owner_.setup.master;
  const Bytes share1 = mpz_to_bytes(abs(k.partial1.share));
  const Bytes share2 = mpz_to_bytes(abs(k.partial2.share));
  std::size_t violations = 0;
  for (const Envelope& e : transcript_.envelopes()) {
    bool bad = false;
    if (e.receiver == ActorId::kCs1 || e.receiver == ActorId::kCs2) {
      for (const Bytes& f : forbidden) bad = bad || contains_bytes(e.payload, f);
    }
    if (e.receiver != ActorId::kCs1 && contains_bytes(e.payload, share1)) bad = true;
    if (e.receiver != ActorId::kCs2 && contains_bytes(e.payload, share2)) bad = true;
    if (bad) ++violations;
  }
  return violations;
}

Bytes Deployment::save() const {
  if (!queue_.empty()) throw ProtocolError("cannot save with messages in flight");
  const PublicParams& params = owner_.setup.params;
  ByteWriter w;
  config_.serialize(w);
  w.u64(next_seq_);

  write_params(w, params);
  write_master_keys(w, owner_.setup.master);
  w.u32(static_cast<std::uint32_t>(owner_.db.size()));
  for (const SpatioTextualObject& o : owner_.db) w.blob(encode_object(o));
  w.u8(owner_.built ? 1 : 0);
  owner_.rng.serialize(w);

  write_client_keys(w, client_.keys);
  client_.states.serialize(w);
  w.u64(client_.object_count);
  w.u8(client_.ready ? 1 : 0);
  client_.rng.serialize(w);
  w.u8(client_.recovered ? 1 : 0);
  if (client_.recovered) {
    const QueryPlan& plan = *client_.plan;
    write_terms(w, plan.keyword_terms);
    write_terms(w, plan.prefix_terms);
    write_trapdoors(w, plan.trapdoors);
    w.u8(static_cast<std::uint8_t>(client_.mode));
    const RecoveredQuery& rq = *client_.recovered;
    w.u32(static_cast<std::uint32_t>(rq.result.ids.size()));
    for (std::size_t i = 0; i < rq.result.ids.size(); ++i) {
      w.u64(rq.result.ids[i]);
      w.blob(rq.result.objects[i]);
    }
    write_optional_bitmaps(w, rq.prefix_full);
    write_optional_bitmaps(w, rq.keyword_full);
  }

  for (const ServerState* s : {&cs1_, &cs2_}) {
    w.u8(s->keyed ? 1 : 0);
    if (!s->keyed) continue;
    write_server_keys(w, s->keys);
    write_shares(w, s->shares, params);
    write_store(w, s->store);
    w.u64(s->epoch);
    s->rng.serialize(w);
  }
  transcript_.serialize(w);

  Bytes body = w.take();
  ByteWriter out;
  out.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
  out.u16(kStateVersion);
  out.blob(body);
  out.raw(digest(body));
  return out.take();
}

Deployment Deployment::load(ByteView data) {
  ByteReader outer(data);
  Bytes magic = outer.raw(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) throw IoError("not a state file");
  if (outer.u16() != kStateVersion) throw IoError("unsupported state version");
  Bytes body = outer.blob();
  Bytes sum = outer.raw(SHA256_DIGEST_LENGTH);
  outer.expect_done();
  auto expected = digest(body);
  if (!std::equal(sum.begin(), sum.end(), expected.begin())) throw IoError("state checksum mismatch");

  ByteReader r(body);
  Deployment d;
  d.config_ = HarnessConfig::deserialize(r);
  d.next_seq_ = r.u64();

  PublicParams params = read_params(r);
  d.owner_.setup.params = params;
  d.owner_.setup.master = read_master_keys(r);
  std::uint32_t count = r.u32();
  if (count > r.remaining()) throw IoError("truncated database");
  for (std::uint32_t i = 0; i < count; ++i) d.owner_.db.push_back(decode_object(r.blob()));
  d.owner_.built = r.u8() != 0;
  d.owner_.rng = Rng::deserialize(r);

  d.client_.params = params;
  d.client_.keys = read_client_keys(r);
  d.client_.states = ShuffleStateTable::deserialize(r);
  d.client_.object_count = r.u64();
  d.client_.ready = r.u8() != 0;
  d.client_.rng = Rng::deserialize(r);
  if (r.u8() != 0) {
    QueryPlan plan;
    plan.keyword_terms = read_terms(r);
    plan.prefix_terms = read_terms(r);
    plan.trapdoors = read_trapdoors(r, params);
    d.client_.plan = std::move(plan);
    std::uint8_t mode = r.u8();
    if (mode != 1 && mode != 2) throw IoError("corrupt result mode");
    d.client_.mode = static_cast<ResultMode>(mode);
    RecoveredQuery rq;
    std::uint32_t ids = r.u32();
    if (ids > r.remaining()) throw IoError("truncated result");
    for (std::uint32_t i = 0; i < ids; ++i) {
      rq.result.ids.push_back(r.u64());
      rq.result.objects.push_back(r.blob());
    }
    rq.prefix_full = read_optional_bitmaps(r);
    rq.keyword_full = read_optional_bitmaps(r);
    d.client_.recovered = std::move(rq);
  }

  for (ServerState* s : {&d.cs1_, &d.cs2_}) {
    s->side = s == &d.cs1_ ? 1 : 2;
    s->keyed = r.u8() != 0;
    if (!s->keyed) continue;
    s->params = params;
    s->keys = read_server_keys(r);
    if (s->keys.side != s->side) throw IoError("server keys out of order");
    s->shares = read_shares(r, params);
    s->store = read_store(r);
    s->epoch = r.u64();
    s->rng = Rng::deserialize(r);
  }
  d.transcript_ = Transcript::deserialize(r);
  r.expect_done();
  return d;
}

}  // namespace brasp
