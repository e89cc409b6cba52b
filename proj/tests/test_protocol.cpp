#include <gtest/gtest.h>

#include <set>

#include "brasp/analysis.hpp"
#include "brasp/error.hpp"
#include "brasp/maintenance.hpp"
#include "brasp/query.hpp"

using namespace brasp;

namespace {

// One key set and a small database, driven through the library calls without
// the message harness.
class Protocol : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    Rng rng = Rng::from_seed(100);
    setup_ = new brasp::Setup(run_keygen(SetupOptions{Group::p256(), GridSpec::unit_cells(3), 512, 16}, rng));
  }
  static void TearDownTestSuite() {
    delete setup_;
    setup_ = nullptr;
  }

  void SetUp() override {
    rng_ = Rng::from_seed(101);
    client_ = client_keys(*setup_);
    sk1_ = server_keys(*setup_, 1);
    sk2_ = server_keys(*setup_, 2);
  }

  const PublicParams& params() const { return setup_->params; }

  void load(std::vector<SpatioTextualObject> db) {
    db_ = std::move(db);
    for (std::size_t i = 0; i < db_.size(); ++i) db_[i].id = i;
    auto [prefix, keyword] = build_plain_indexes(db_, params().grid);
    IndexBuildKeys keys{params().group, setup_->master.master, setup_->master.tag_key,
                        params().pk, params().packing};
    auto shares = encrypted_index_build(prefix, keyword, keys, rng_);
    cs1_ = shares.first;
    cs2_ = shares.second;
    store_ = ObjectStore{};
    for (const SpatioTextualObject& o : db_) {
      store_.sealed.push_back(object_seal(client_.object_key, to_bytes("obj" + std::to_string(o.id)), rng_));
    }
    states_ = ShuffleStateTable{};
    for (const PrefixElement& p : prefix_universe(params().grid.bits())) {
      states_.register_term(Term::prefix(p), 0);
    }
    for (const auto& [t, b] : keyword.entries) states_.register_term(t, 0);
  }

  void random_db(std::size_t n, std::size_t m) {
    std::vector<SpatioTextualObject> db(n);
    for (SpatioTextualObject& o : db) {
      o.location = rng_.uniform(64);
      std::set<std::string> kw;
      for (int k = 0; k < 3; ++k) kw.insert("k" + std::to_string(rng_.uniform(m)));
      o.keywords.assign(kw.begin(), kw.end());
    }
    load(db);
  }

  struct Run {
    QueryPlan plan;
    RecoveredQuery recovered;
  };

  Run search(const BooleanRangeQuery& q, ResultMode mode = ResultMode::kCorrected) {
    Run run;
    run.plan = token_generation(q, params(), client_, states_);
    Resolution r1 = server_resolve(run.plan.trapdoors, cs1_, sk1_, params());
    Resolution r2 = server_resolve(run.plan.trapdoors, cs2_, sk2_, params());
    // Each server completes the other's partial decryptions.
    SearchResponse from2 = server_complete(r1.partials, sk2_, store_, mode, params());
    SearchResponse from1 = server_complete(r2.partials, sk1_, store_, mode, params());
    run.recovered = client_recover(from1, from2, mode, client_);
    return run;
  }

  void shuffle() {
    Rng a = rng_.derive("a" + std::to_string(states_.epoch()));
    Rng b = rng_.derive("b" + std::to_string(states_.epoch()));
    index_shuffle_round(cs1_, cs2_, setup_->master.shuffle, params(), a, b);
    advance_states(states_);
  }

  std::optional<Bitmap> full_bitmap(const Term& term) const {
    TpfKey k = tpf_epoch_key(params().group, setup_->master.master, setup_->master.shuffle.r1,
                             setup_->master.shuffle.r2, states_.epoch());
    TpfLabel label = tpf_rnd(params().group, k, term.canonical_bytes());
    Bitmap out(db_.size());
    for (const IndexShares* s : {&cs1_, &cs2_}) {
      auto pos = s->of(term.kind).find(label);
      if (!pos) return std::nullopt;
      out = out | unpack_bitmap(s->of(term.kind).entries[*pos].id_field, db_.size(),
                                params().packing, setup_->master.paillier);
    }
    return out;
  }

  static brasp::Setup* setup_;
  Rng rng_ = Rng::from_seed(0);
  ClientKeys client_;
  ServerKeys sk1_, sk2_;
  std::vector<SpatioTextualObject> db_;
  IndexShares cs1_, cs2_;
  ObjectStore store_;
  ShuffleStateTable states_;
};

brasp::Setup* Protocol::setup_ = nullptr;

BooleanRangeQuery make_query(std::vector<Interval> ivs, std::vector<std::string> kw) {
  BooleanRangeQuery q;
  q.range = SpatialRange::from_intervals(std::move(ivs), 6);
  q.keywords = std::move(kw);
  return q;
}

}  // namespace

TEST_F(Protocol, TokenShapeAndLabels) {
  random_db(10, 4);
  BooleanRangeQuery q = make_query({{20, 24}}, {"k1", "K1", "k2"});
  QueryPlan plan = token_generation(q, params(), client_, states_);
  EXPECT_EQ(plan.trapdoors.keyword.size(), 2U);
  EXPECT_EQ(plan.trapdoors.prefix.size(), 2U);
  EXPECT_EQ(plan.prefix_terms[0].text, "0101**");
  // Moving a trapdoor to the master key gives the index label.
  TpfLabel moved = tpf_reenc(params().group, plan.trapdoors.keyword[0], sk1_.authorization);
  EXPECT_EQ(moved, tpf_rnd(params().group, setup_->master.master, Term::keyword("k1").canonical_bytes()));
}

TEST_F(Protocol, ResultsMatchOracleAcrossEpochs) {
  random_db(60, 5);
  Rng qr = Rng::from_seed(102);
  for (int epoch = 0; epoch < 3; ++epoch) {
    for (int i = 0; i < 5; ++i) {
      std::uint64_t a = qr.uniform(64), b = qr.uniform(64);
      BooleanRangeQuery q = make_query({{std::min(a, b), std::max(a, b)}},
                                       {"k" + std::to_string(qr.uniform(5))});
      Run run = search(q);
      EXPECT_EQ(run.recovered.result.ids, pbrq_oracle(db_, q)) << "epoch " << epoch;
      for (std::size_t k = 0; k < run.recovered.result.ids.size(); ++k) {
        EXPECT_EQ(run.recovered.result.objects[k],
                  to_bytes("obj" + std::to_string(run.recovered.result.ids[k])));
      }
    }
    shuffle();
  }
}

TEST_F(Protocol, RangeOnlyAndUnknownKeyword) {
  random_db(20, 3);
  BooleanRangeQuery all = make_query({{0, 63}}, {});
  EXPECT_EQ(search(all).recovered.result.ids.size(), 20U);
  BooleanRangeQuery none = make_query({{0, 63}}, {"k0", "nowhere"});
  Run run = search(none);
  EXPECT_TRUE(run.recovered.result.ids.empty());
  EXPECT_FALSE(run.recovered.keyword_full[1].has_value());
}

// The literal mode intersects each server's shares locally, so an object whose
// keyword bits landed in different shares is lost. The corrected mode is not.
TEST_F(Protocol, LiteralModeMissesSplitBitsCorrectedDoesNot) {
  int literal_misses = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<SpatioTextualObject> db(4);
    for (std::size_t i = 0; i < db.size(); ++i) {
      db[i].location = 10 + i;
      db[i].keywords = {"a", "b"};
    }
    load(db);
    BooleanRangeQuery q = make_query({{0, 63}}, {"a", "b"});
    EXPECT_EQ(search(q, ResultMode::kCorrected).recovered.result.ids, pbrq_oracle(db_, q));
    if (search(q, ResultMode::kLiteral).recovered.result.ids != pbrq_oracle(db_, q)) ++literal_misses;
  }
  EXPECT_GT(literal_misses, 0);
}

TEST_F(Protocol, RedistributionKeepsContentAndLeavesOtherTermsAlone) {
  random_db(40, 4);
  BooleanRangeQuery q = make_query({{8, 30}}, {"k2"});
  Run run = search(q);
  std::map<Term, Bitmap> before;
  for (const Term& t : run.plan.prefix_terms) before[t] = *full_bitmap(t);
  before[Term::keyword("k2")] = *full_bitmap(Term::keyword("k2"));
  IndexShares old1 = cs1_;
  auto [b1, b2] = index_redistribution(run.plan, run.recovered, params(), rng_);
  server_apply_redistribution(b1, cs1_, sk1_, params());
  server_apply_redistribution(b2, cs2_, sk2_, params());
  for (const auto& [t, bitmap] : before) EXPECT_EQ(*full_bitmap(t), bitmap);

  std::set<TpfLabel> touched;
  for (const RedistributionEntry& e : b1.prefix) touched.insert(tpf_reenc(params().group, e.trapdoor, sk1_.authorization));
  for (const RedistributionEntry& e : b1.keyword) touched.insert(tpf_reenc(params().group, e.trapdoor, sk1_.authorization));
  for (IndexKind kind : {IndexKind::kPrefix, IndexKind::kKeyword}) {
    for (std::size_t i = 0; i < cs1_.of(kind).size(); ++i) {
      const EncryptedIndexEntry& now = cs1_.of(kind).entries[i];
      const EncryptedIndexEntry& was = old1.of(kind).entries[i];
      EXPECT_EQ(now.label, was.label);
      EXPECT_EQ(now.tag, was.tag);
      if (touched.count(now.label) != 0) {
        EXPECT_NE(now.id_field, was.id_field);
      } else {
        EXPECT_EQ(now.id_field, was.id_field);
      }
    }
  }
  EXPECT_EQ(search(q).recovered.result.ids, pbrq_oracle(db_, q));
}

TEST_F(Protocol, SharesFromOneSideAreRejected) {
  random_db(10, 3);
  QueryPlan plan = token_generation(make_query({{0, 10}}, {"k0"}), params(), client_, states_);
  Resolution r1 = server_resolve(plan.trapdoors, cs1_, sk1_, params());
  EXPECT_THROW(server_complete(r1.partials, sk1_, store_, ResultMode::kCorrected, params()), ProtocolError);
}

TEST_F(Protocol, ShuffleFollowsLabelLawAndKeepsContent) {
  random_db(30, 4);
  auto [prefix, keyword] = build_plain_indexes(db_, params().grid);
  IndexShares old1 = cs1_, old2 = cs2_;
  shuffle();
  const ReEncKey round{setup_->master.shuffle.r1 * setup_->master.shuffle.r2 % params().group.order()};
  for (const auto* pair : {&old1, &old2}) {
    const IndexShares& now = pair == &old1 ? cs1_ : cs2_;
    std::set<TpfLabel> expected;
    for (const EncryptedIndexEntry& e : pair->prefix.entries) expected.insert(tpf_reenc(params().group, e.label, round));
    std::set<TpfLabel> got;
    for (const EncryptedIndexEntry& e : now.prefix.entries) got.insert(e.label);
    EXPECT_EQ(got, expected);
  }
  for (const auto& [t, b] : prefix.entries) EXPECT_EQ(*full_bitmap(t), b);
  for (const auto& [t, b] : keyword.entries) EXPECT_EQ(*full_bitmap(t), b);

  // Tags follow the published chain.
  for (int side = 1; side <= 2; ++side) {
    const IndexShares& s = side == 1 ? cs1_ : cs2_;
    std::set<Tag> tags;
    for (const EncryptedIndexEntry& e : s.keyword.entries) tags.insert(e.tag);
    for (const auto& [t, b] : keyword.entries) {
      EXPECT_EQ(tags.count(current_tag(t, side, 1, params(), client_.tag_key, client_.shuffle)), 1U);
    }
  }
}

TEST_F(Protocol, StaleTrapdoorsResolveNothing) {
  random_db(20, 3);
  QueryPlan stale = token_generation(make_query({{0, 40}}, {"k0"}), params(), client_, states_);
  shuffle();
  Resolution r = server_resolve(stale.trapdoors, cs1_, sk1_, params());
  for (const auto& f : r.partials.prefix) EXPECT_FALSE(f.has_value());
  for (const auto& f : r.partials.keyword) EXPECT_FALSE(f.has_value());
}

TEST_F(Protocol, UpdateInsertsKnownAndFreshTerms) {
  random_db(25, 3);
  shuffle();
  SpatioTextualObject obj;
  obj.location = 33;
  obj.keywords = {"k1", "brandnew"};
  Bytes plain = to_bytes("obj25");
  UpdateRequest req = update_token_generation(obj, 25, plain, params(), client_, states_, rng_);
  EXPECT_EQ(req.for_cs1.size(), 6U + 2U);
  EXPECT_EQ(req.for_cs2.size(), 6U + 2U);
  ASSERT_EQ(req.fresh_keywords.size(), 1U);

  // Each term's bit sits in exactly one side's delta.
  for (std::size_t i = 0; i < req.for_cs1.prefix.size(); ++i) {
    const UpdateToken& t1 = req.for_cs1.prefix[i];
    const UpdateToken& t2 = req.for_cs2.prefix[i];
    mpz_class v1 = paillier_decrypt(t1.delta.chunks[0], setup_->master.paillier);
    mpz_class v2 = paillier_decrypt(t2.delta.chunks[0], setup_->master.paillier);
    EXPECT_EQ(v1 + v2, mpz_class(1) << (16 * (25 % params().packing.slots_per_chunk)));
    EXPECT_TRUE(v1 == 0 || v2 == 0);
  }

  Rng h1 = rng_.derive("h1"), h2 = rng_.derive("h2"), p1 = rng_.derive("p1"), p2 = rng_.derive("p2");
  ObjectStore store2 = store_;
  server_update_merge(req.for_cs1, cs1_, store_, req.sealed_object, sk1_, params(), h1, p1);
  server_update_merge(req.for_cs2, cs2_, store2, req.sealed_object, sk2_, params(), h2, p2);
  for (const Term& t : req.fresh_keywords) states_.register_term(t, states_.epoch());
  obj.id = 25;
  db_.push_back(obj);

  for (const char* kw : {"k1", "brandnew"}) {
    BooleanRangeQuery q = make_query({{30, 40}}, {kw});
    EXPECT_EQ(search(q).recovered.result.ids, pbrq_oracle(db_, q)) << kw;
  }
  shuffle();
  BooleanRangeQuery q = make_query({{33, 33}}, {"brandnew"});
  EXPECT_EQ(search(q).recovered.result.ids, std::vector<std::uint64_t>{25});
}

TEST_F(Protocol, MergeRejectsUnknownAddress) {
  random_db(8, 2);
  PositionList list = update_prepare(cs1_.keyword, 9, sk1_, params(), rng_);
  UpdateToken bogus;
  bogus.address = Tag{};
  bogus.delta.chunks.push_back(tur_enc(1, params().pk, rng_));
  EXPECT_THROW(update_merge(list, {bogus}, params(), rng_), ProtocolError);
}

TEST_F(Protocol, EmptyTokenSetOnlyRerandomizes) {
  random_db(12, 3);
  auto [prefix, keyword] = build_plain_indexes(db_, params().grid);
  EncryptedIndex before = cs1_.keyword;
  PositionList list = update_prepare(cs1_.keyword, 12, sk1_, params(), rng_);
  MergedList merged = update_merge(list, {}, params(), rng_);
  update_finish(merged, cs1_.keyword, sk1_, params());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_NE(cs1_.keyword.entries[i].id_field, before.entries[i].id_field);
    EXPECT_EQ(unpack_bitmap(cs1_.keyword.entries[i].id_field, 12, params().packing, setup_->master.paillier),
              unpack_bitmap(before.entries[i].id_field, 12, params().packing, setup_->master.paillier));
  }
}

TEST_F(Protocol, WireEncodingsRoundTrip) {
  random_db(10, 3);
  Run run = search(make_query({{3, 50}}, {"k0"}));
  ByteWriter w;
  write_trapdoors(w, run.plan.trapdoors);
  Bytes b = w.take();
  ByteReader r(b);
  TrapdoorSet t = read_trapdoors(r, params());
  EXPECT_EQ(t.keyword, run.plan.trapdoors.keyword);
  EXPECT_EQ(t.prefix, run.plan.trapdoors.prefix);

  auto [b1, b2] = index_redistribution(run.plan, run.recovered, params(), rng_);
  ByteWriter w2;
  write_redistribution(w2, b1, params());
  Bytes rb = w2.take();
  ByteReader r2(rb);
  RedistributionBatch back = read_redistribution(r2, params());
  ASSERT_EQ(back.size(), b1.size());
  EXPECT_EQ(back.prefix[0].id_field, b1.prefix[0].id_field);

  ByteWriter w3;
  write_index(w3, cs2_.prefix, params());
  Bytes ib = w3.take();
  ByteReader r3(ib);
  EncryptedIndex idx = read_index(r3, params());
  EXPECT_EQ(idx.side, cs2_.prefix.side);
  EXPECT_EQ(idx.entries.back().tag, cs2_.prefix.entries.back().tag);
  ib.resize(ib.size() / 2);
  ByteReader r4(ib);
  EXPECT_THROW(read_index(r4, params()), IoError);
}

TEST(ShuffleStateTable, CountersTrackTheEpoch) {
  ShuffleStateTable s;
  Term a = Term::keyword("a");
  s.register_term(a, 0);
  EXPECT_EQ(s.counter(Term::keyword("zzz")), 0U);
  s.advance();
  s.advance();
  EXPECT_EQ(s.counter(a), 2U);
  EXPECT_EQ(s.counter(Term::keyword("zzz")), 2U);
  ByteWriter w;
  s.serialize(w);
  Bytes b = w.take();
  ByteReader r(b);
  EXPECT_EQ(ShuffleStateTable::deserialize(r), s);
}
