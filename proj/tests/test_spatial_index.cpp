#include <gtest/gtest.h>

#include <set>

#include "brasp/analysis.hpp"
#include "brasp/bitmap.hpp"
#include "brasp/error.hpp"
#include "brasp/index.hpp"
#include "brasp/keys.hpp"
#include "brasp/spatial.hpp"

using namespace brasp;

namespace {

std::vector<std::string> canon(const std::vector<PrefixElement>& ps) {
  std::vector<std::string> out;
  for (const PrefixElement& p : ps) out.push_back(p.canonical());
  return out;
}

}  // namespace

TEST(Hilbert, OrderOneLayout) {
  GridSpec g = GridSpec::unit_cells(1);
  EXPECT_EQ(hilbert_encode({0, 0}, g), 0U);
  EXPECT_EQ(hilbert_encode({0, 1}, g), 1U);
  EXPECT_EQ(hilbert_encode({1, 1}, g), 2U);
  EXPECT_EQ(hilbert_encode({1, 0}, g), 3U);
}

// Bijection plus unit steps between consecutive values, at every small order.
TEST(Hilbert, BijectiveAndAdjacent) {
  for (unsigned order = 1; order <= 5; ++order) {
    GridSpec g = GridSpec::unit_cells(order);
    std::set<std::pair<std::uint64_t, std::uint64_t>> cells;
    Cell prev = hilbert_decode(0, g);
    for (HilbertValue v = 0; v < g.cell_count(); ++v) {
      Cell c = hilbert_decode(v, g);
      ASSERT_EQ(hilbert_encode(c, g), v);
      cells.insert({c.x, c.y});
      if (v > 0) {
        std::uint64_t dx = c.x > prev.x ? c.x - prev.x : prev.x - c.x;
        std::uint64_t dy = c.y > prev.y ? c.y - prev.y : prev.y - c.y;
        ASSERT_EQ(dx + dy, 1U) << "order " << order << " value " << v;
      }
      prev = c;
    }
    EXPECT_EQ(cells.size(), g.cell_count());
  }
}

TEST(Hilbert, QuantizeClampsToBox) {
  GridSpec g = GridSpec::make(0, 0, 10, 10, 2);
  EXPECT_EQ(quantize({0, 0}, g), (Cell{0, 0}));
  EXPECT_EQ(quantize({9.99, 2.6}, g), (Cell{3, 1}));
  EXPECT_EQ(quantize({10, 10}, g), (Cell{3, 3}));
  EXPECT_THROW(GridSpec::make(0, 0, 0, 1, 3), InvalidArgument);
  EXPECT_THROW(GridSpec::make(0, 0, 1, 1, 0), InvalidArgument);
}

TEST(Prefix, FamilyOfAValue) {
  auto fam = prefix_family(0b010110, 6);
  ASSERT_EQ(fam.size(), 7U);
  EXPECT_EQ(fam.front().canonical(), "010110");
  EXPECT_EQ(fam[2].canonical(), "0101**");
  EXPECT_EQ(fam.back().canonical(), "******");
  for (const PrefixElement& p : fam) EXPECT_TRUE(p.covers(0b010110));
}

TEST(Prefix, ParseAndBounds) {
  PrefixElement p = PrefixElement::parse("0101**");
  EXPECT_EQ(p.low(), 20U);
  EXPECT_EQ(p.high(), 23U);
  EXPECT_EQ(p.length, 4);
  EXPECT_THROW(PrefixElement::parse("01*1**"), InvalidArgument);
}

TEST(Prefix, UniverseSize) {
  auto u = prefix_universe(6);
  EXPECT_EQ(u.size(), 126U);
  std::set<PrefixElement> s(u.begin(), u.end());
  EXPECT_EQ(s.size(), 126U);
  for (const PrefixElement& p : u) EXPECT_GE(p.length, 1);
}

TEST(Cover, WorkedFixtures) {
  auto c = min_prefix_cover(SpatialRange::from_intervals({{20, 24}}, 6), 6);
  EXPECT_EQ(c.canonical(), (std::vector<std::string>{"0101**", "011000"}));
  auto two = min_prefix_cover(SpatialRange::from_intervals({{45, 51}, {54, 55}}, 6), 6);
  EXPECT_EQ(two.canonical(), (std::vector<std::string>{"101101", "10111*", "1100**", "11011*"}));
}

TEST(Cover, FullRangeUsesTwoHalves) {
  auto c = min_prefix_cover(SpatialRange::from_intervals({{0, 63}}, 6), 6);
  EXPECT_EQ(c.canonical(), (std::vector<std::string>{"0*****", "1*****"}));
}

// Exactness checked by enumeration, minimality against the trie oracle.
TEST(Cover, ExactAndMinimalOnEverySingleInterval) {
  for (std::uint64_t lo = 0; lo < 64; ++lo) {
    for (std::uint64_t hi = lo; hi < 64; ++hi) {
      SpatialRange r = SpatialRange::from_intervals({{lo, hi}}, 6);
      RangeCover c = min_prefix_cover(r, 6);
      for (HilbertValue x = 0; x < 64; ++x) {
        ASSERT_EQ(membership_check(x, c), lo <= x && x <= hi) << lo << "," << hi << " x=" << x;
      }
      ASSERT_EQ(c.prefixes, min_cover_oracle(r, 6).prefixes) << lo << "," << hi;
    }
  }
}

TEST(Cover, MultiIntervalAgreesWithOracle) {
  Rng rng = Rng::from_seed(31);
  for (int i = 0; i < 500; ++i) {
    std::vector<Interval> ivs;
    for (int k = 0; k < 4; ++k) {
      std::uint64_t a = rng.uniform(256), b = rng.uniform(256);
      ivs.push_back({std::min(a, b), std::max(a, b)});
    }
    SpatialRange r = SpatialRange::from_intervals(ivs, 8);
    RangeCover c = min_prefix_cover(r, 8);
    ASSERT_EQ(c.prefixes.size(), min_cover_oracle(r, 8).prefixes.size());
    for (HilbertValue x = 0; x < 256; ++x) ASSERT_EQ(membership_check(x, c), r.contains(x));
  }
}

TEST(Range, MergesAndValidates) {
  SpatialRange r = SpatialRange::from_intervals({{5, 9}, {0, 2}, {3, 4}, {20, 20}}, 6);
  ASSERT_EQ(r.intervals().size(), 2U);
  EXPECT_EQ(r.intervals()[0], (Interval{0, 9}));
  EXPECT_EQ(r.size(), 11U);
  EXPECT_THROW(SpatialRange::from_intervals({{5, 4}}, 6), InvalidArgument);
  EXPECT_THROW(SpatialRange::from_intervals({{5, 64}}, 6), InvalidArgument);
}

TEST(Range, RectangleMatchesCellEnumeration) {
  GridSpec g = GridSpec::unit_cells(3);
  Rect rect{1.5, 2.2, 4.1, 6.9};
  SpatialRange r = region_to_intervals(rect, g);
  for (std::uint64_t x = 0; x < 8; ++x) {
    for (std::uint64_t y = 0; y < 8; ++y) {
      bool touched = x >= 1 && x <= 4 && y >= 2 && y <= 6;
      EXPECT_EQ(r.contains(hilbert_encode({x, y}, g)), touched) << x << "," << y;
    }
  }
  EXPECT_TRUE(region_to_intervals(Rect{20, 20, 30, 30}, g).empty());
}

TEST(Bitmap, Operations) {
  Bitmap a = Bitmap::from_string("10100");
  Bitmap b = Bitmap::from_string("00110");
  EXPECT_EQ((a | b).to_string(), "10110");
  EXPECT_EQ((a & b).to_string(), "00100");
  EXPECT_EQ((a ^ b).to_string(), "10010");
  EXPECT_EQ(a.ones(), (std::vector<std::size_t>{0, 2}));
  EXPECT_THROW(a | Bitmap(6), InvalidArgument);
  a.resize(70);
  EXPECT_EQ(a.count(), 2U);
  EXPECT_FALSE(a.test(69));
}

TEST(Bitmap, SharesAreDisjointAndCombine) {
  Rng rng = Rng::from_seed(32);
  for (int i = 0; i < 50; ++i) {
    Bitmap b(130);
    for (std::size_t k = 0; k < 130; ++k) b.set(k, rng.coin());
    ShareBitmap s = split_shares(b, rng);
    EXPECT_TRUE((s.first & s.second).none());
    EXPECT_EQ(combine_shares(s.first, s.second), b);
    EXPECT_EQ(s.first | s.second, b);
  }
}

TEST(Bitmap, SplitIsRoughlyBalanced) {
  Rng rng = Rng::from_seed(33);
  Bitmap ones(10000);
  for (std::size_t k = 0; k < 10000; ++k) ones.set(k);
  ShareBitmap s = split_shares(ones, rng);
  EXPECT_NEAR(static_cast<double>(s.first.count()), 5000.0, 5 * 50.0);
}

TEST(Packing, SlotLayoutExample) {
  PackingSpec spec{4, 3};
  // Objects 0 and 2 set: slots 0 and 2 of chunk 0, then an empty chunk.
  auto chunks = pack_slots(Bitmap::from_string("10100"), spec);
  ASSERT_EQ(chunks.size(), 2U);
  EXPECT_EQ(chunks[0], 1 + (1 << 8));
  EXPECT_EQ(chunks[1], 0);
  EXPECT_EQ(unpack_slots(chunks, 5, spec).to_string(), "10100");
}

TEST(Packing, SlotsReduceModTwoAndOverflowIsDetected) {
  PackingSpec spec{4, 3};
  EXPECT_EQ(unpack_slots({mpz_class(2 + (3 << 4))}, 3, spec).to_string(), "010");
  EXPECT_THROW(unpack_slots({mpz_class(1) << 12}, 3, spec), ProtocolError);
}

TEST(Packing, ForModulus) {
  PackingSpec s = PackingSpec::for_modulus(512, 16);
  EXPECT_EQ(s.slots_per_chunk, 28U);
  EXPECT_EQ(s.chunks_for(28), 1U);
  EXPECT_EQ(s.chunks_for(29), 2U);
  EXPECT_EQ(s.slot_capacity(), 65535U);
  EXPECT_THROW(PackingSpec::for_modulus(512, 1), InvalidArgument);
}

TEST(Packing, EncryptedRoundTrip) {
  Rng rng = Rng::from_seed(34);
  PaillierKeyPair kp = tur_setup(512, rng);
  auto [s1, s2] = tur_keygen(kp, rng);
  PackingSpec spec = PackingSpec::for_modulus(512, 16);
  Bitmap b(100);
  for (std::size_t k = 0; k < 100; k += 3) b.set(k);
  PackedBitmap p = pack_bitmap(b, spec, kp.pub, rng);
  EXPECT_EQ(p.chunks.size(), 4U);
  EXPECT_EQ(unpack_bitmap(p, 100, spec, kp), b);
  EXPECT_EQ(unpack_bitmap(rerandomize(p, kp.pub, rng), 100, spec, kp.pub, s1, s2), b);
}

TEST(Keyword, Normalization) {
  EXPECT_EQ(normalize_keyword("CAFE"), "cafe");
  // Decomposed e + combining acute becomes the precomposed form.
  EXPECT_EQ(normalize_keyword("Cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(normalize_keyword("CAF\xC3\x89"), "caf\xC3\xA9");
}

TEST(PlainIndex, BitmapsMatchDirectScan) {
  GridSpec g = GridSpec::unit_cells(3);
  Rng rng = Rng::from_seed(35);
  std::vector<SpatioTextualObject> db(30);
  for (std::size_t i = 0; i < db.size(); ++i) {
    db[i].id = i;
    db[i].location = rng.uniform(64);
    db[i].keywords = {"k" + std::to_string(rng.uniform(5))};
  }
  auto [prefix, keyword] = build_plain_indexes(db, g);
  EXPECT_EQ(prefix.entries.size(), 126U);
  for (const auto& [term, bitmap] : prefix.entries) {
    PrefixElement p = PrefixElement::parse(term.text);
    for (std::size_t i = 0; i < db.size(); ++i) EXPECT_EQ(bitmap.test(i), p.covers(db[i].location));
  }
  for (const auto& [term, bitmap] : keyword.entries) {
    for (std::size_t i = 0; i < db.size(); ++i) EXPECT_EQ(bitmap.test(i), db[i].keywords[0] == term.text);
  }
}

TEST(EncryptedIndex, BuildLabelsSharesAndFile) {
  GridSpec g = GridSpec::unit_cells(2);
  Rng rng = Rng::from_seed(36);
  SetupOptions opts{Group::p256(), g, 512, 16};
  brasp::Setup setup = run_keygen(opts, rng);
  std::vector<SpatioTextualObject> db(6);
  for (std::size_t i = 0; i < db.size(); ++i) {
    db[i].id = i;
    db[i].location = i * 2;
    db[i].keywords = {i % 2 == 0 ? "even" : "odd"};
  }
  auto [prefix, keyword] = build_plain_indexes(db, g);
  IndexBuildKeys keys{setup.params.group, setup.master.master, setup.master.tag_key,
                      setup.params.pk, setup.params.packing};
  auto [cs1, cs2] = encrypted_index_build(prefix, keyword, keys, rng);
  ASSERT_EQ(cs1.keyword.size(), 2U);
  for (const auto& [term, bitmap] : keyword.entries) {
    TpfLabel label = tpf_rnd(setup.params.group, setup.master.master, term.canonical_bytes());
    auto p1 = cs1.keyword.find(label), p2 = cs2.keyword.find(label);
    ASSERT_TRUE(p1 && p2);
    Bitmap b1 = unpack_bitmap(cs1.keyword.entries[*p1].id_field, 6, setup.params.packing,
                              setup.master.paillier);
    Bitmap b2 = unpack_bitmap(cs2.keyword.entries[*p2].id_field, 6, setup.params.packing,
                              setup.master.paillier);
    EXPECT_TRUE((b1 & b2).none());
    EXPECT_EQ(b1 | b2, bitmap);
    EXPECT_NE(cs1.keyword.entries[*p1].tag, cs2.keyword.entries[*p2].tag);
  }
  Bytes file = encode_index_file(cs1.prefix, 6, setup.params.packing, setup.params.pk);
  IndexFile back = decode_index_file(file, setup.params.group, setup.params.pk);
  EXPECT_EQ(back.objects, 6U);
  EXPECT_EQ(back.packing, setup.params.packing);
  ASSERT_EQ(back.index.size(), cs1.prefix.size());
  EXPECT_EQ(back.index.entries[3].label, cs1.prefix.entries[3].label);
  file.resize(file.size() - 5);
  EXPECT_THROW(decode_index_file(file, setup.params.group, setup.params.pk), IoError);
}
