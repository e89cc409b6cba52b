#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"
#include "brasp/group.hpp"
#include "brasp/paillier.hpp"
#include "brasp/prf.hpp"
#include "brasp/rng.hpp"
#include "brasp/seal.hpp"
#include "brasp/tpf.hpp"

using namespace brasp;

TEST(Bytes, WriterReaderRoundTrip) {
  ByteWriter w;
  w.u8(7);
  w.u16(0xBEEF);
  w.u32(0xDEADBEEF);
  w.u64(0x0123456789ABCDEFULL);
  w.blob(to_bytes("abc"));
  w.str("xyz");
  Bytes b = w.take();
  ByteReader r(b);
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u16(), 0xBEEF);
  EXPECT_EQ(r.u32(), 0xDEADBEEFU);
  EXPECT_EQ(r.u64(), 0x0123456789ABCDEFULL);
  EXPECT_EQ(r.blob(), to_bytes("abc"));
  EXPECT_EQ(r.str(), "xyz");
  EXPECT_TRUE(r.done());
}

TEST(Bytes, BigEndianLayout) {
  ByteWriter w;
  w.u32(0x01020304);
  EXPECT_EQ(to_hex(w.bytes()), "01020304");
}

TEST(Bytes, TruncationIsIoError) {
  Bytes b{0, 0, 0, 9, 1, 2};
  ByteReader r(b);
  EXPECT_THROW(r.blob(), IoError);
  ByteReader r2(b);
  r2.u8();
  EXPECT_THROW(r2.expect_done(), IoError);
}

TEST(Bytes, HexRoundTrip) {
  Bytes b{0x00, 0xff, 0x10, 0xab};
  EXPECT_EQ(from_hex(to_hex(b)), b);
  EXPECT_THROW(from_hex("abc"), Error);
}

TEST(Bytes, ContainsBytes) {
  Bytes hay = to_bytes("the quick brown fox");
  EXPECT_TRUE(contains_bytes(hay, to_bytes("brown")));
  EXPECT_FALSE(contains_bytes(hay, to_bytes("browns")));
}

TEST(Rng, SeededStreamsRepeat) {
  Rng a = Rng::from_seed(5), b = Rng::from_seed(5), c = Rng::from_seed(6);
  EXPECT_EQ(a.bytes(100), b.bytes(100));
  EXPECT_NE(Rng::from_seed(5).bytes(32), c.bytes(32));
}

TEST(Rng, DeriveIsIndependentOfParentPosition) {
  Rng a = Rng::from_seed(1);
  Rng child1 = a.derive("x");
  a.bytes(50);
  Rng child2 = a.derive("x");
  EXPECT_EQ(child1.bytes(16), child2.bytes(16));
  EXPECT_NE(a.derive("x").bytes(16), a.derive("y").bytes(16));
}

TEST(Rng, SerializedPositionResumes) {
  Rng a = Rng::from_seed(9);
  a.bytes(13);
  ByteWriter w;
  a.serialize(w);
  Bytes saved = w.take();
  ByteReader r(saved);
  Rng b = Rng::deserialize(r);
  EXPECT_EQ(a.bytes(77), b.bytes(77));
}

TEST(Rng, UniformStaysInBoundsAndHitsEveryValue) {
  Rng rng = Rng::from_seed(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    std::uint64_t v = rng.uniform(7);
    ASSERT_LT(v, 7U);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng = Rng::from_seed(4);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  shuffle_in_place(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(BigInt, FixedWidthEncoding) {
  EXPECT_EQ(to_hex(mpz_to_bytes(mpz_class(258), 4)), "00000102");
  EXPECT_EQ(mpz_from_bytes(from_hex("00000102")), 258);
  EXPECT_THROW(mpz_to_bytes(mpz_class(65536), 2), InvalidArgument);
  EXPECT_THROW(mpz_to_bytes(mpz_class(-1), 2), InvalidArgument);
}

TEST(BigInt, PersistedSignedValues) {
  for (mpz_class v : {mpz_class(0), mpz_class(-77), mpz_class("123456789012345678901234567890")}) {
    ByteWriter w;
    write_mpz(w, v);
    Bytes b = w.take();
    ByteReader r(b);
    EXPECT_EQ(read_mpz(r), v);
  }
}

// Oracle: the order-11 subgroup of Z_23^* is {2^i mod 23}.
TEST(Group, ToyGroupMatchesBruteForce) {
  Group g = Group::toy();
  EXPECT_EQ(g.order(), 11);
  std::set<unsigned long> subgroup;
  unsigned long x = 1;
  for (int i = 0; i < 11; ++i) {
    subgroup.insert(x);
    x = x * 2 % 23;
  }
  EXPECT_EQ(subgroup.size(), 11U);
  for (unsigned long e = 0; e < 11; ++e) {
    unsigned long expect = 1;
    for (unsigned long k = 0; k < e; ++k) expect = expect * 2 % 23;
    Bytes el = g.pow_generator(e);
    EXPECT_EQ(mpz_from_bytes(el), expect);
    EXPECT_TRUE(g.is_element(el));
  }
  for (unsigned long v = 1; v < 23; ++v) {
    Bytes el = mpz_to_bytes(mpz_class(v), g.element_size());
    EXPECT_EQ(g.is_element(el), subgroup.count(v) == 1) << v;
  }
}

TEST(Group, ToyExponentLaws) {
  Group g = Group::toy();
  for (unsigned a = 0; a < 11; ++a) {
    for (unsigned b = 0; b < 11; ++b) {
      EXPECT_EQ(g.pow(g.pow_generator(a), b), g.pow_generator((a * b) % 11));
    }
  }
}

TEST(Group, P256RejectsInvalidPoints) {
  Group g = Group::p256();
  EXPECT_EQ(g.element_size(), 33U);
  Bytes bogus(33, 0xff);
  bogus[0] = 0x02;
  EXPECT_FALSE(g.is_element(bogus));
  EXPECT_THROW(g.pow(bogus, 3), CryptoError);
  Bytes h = g.hash_to_group(to_bytes("hello"));
  EXPECT_TRUE(g.is_element(h));
  EXPECT_EQ(g.pow(h, g.order()), g.identity());
}

TEST(Group, SerializationRoundTrip) {
  for (const Group& g : {Group::toy(), Group::p256()}) {
    ByteWriter w;
    g.serialize(w);
    Bytes b = w.take();
    ByteReader r(b);
    EXPECT_EQ(Group::deserialize(r), g);
  }
}

TEST(Group, ModpValidatesParameters) {
  EXPECT_THROW(Group::modp(23, 10, 2), Error);
  EXPECT_THROW(Group::modp(23, 11, 5), Error);  // 5 has order 22
}

// Exhaustive composition law in the toy group.
TEST(Tpf, ToyCompositionLawExhaustive) {
  Group g = Group::toy();
  Bytes msg = to_bytes("w4");
  for (unsigned k1 = 1; k1 < 11; ++k1) {
    for (unsigned k2 = 1; k2 < 11; ++k2) {
      TpfKey a{k1}, b{k2};
      EXPECT_EQ(tpf_reenc(g, tpf_rnd(g, a, msg), tpf_reckeygen(g, a, b)), tpf_rnd(g, b, msg));
    }
  }
}

TEST(Tpf, LabelIsGeneratorToHashTimesKey) {
  Group g = Group::toy();
  Bytes msg = to_bytes("abc");
  TpfKey k{7};
  mpz_class e = g.hash_to_exponent(msg) * 7 % 11;
  EXPECT_EQ(tpf_rnd(g, k, msg).bytes, g.pow_generator(e));
}

TEST(Tpf, EpochKeyMatchesRepeatedReencryption) {
  Group g = Group::p256();
  Rng rng = Rng::from_seed(2);
  TpfKey k = tpf_keygen(g, rng);
  mpz_class r1 = random_nonzero_below(rng, g.order()), r2 = random_nonzero_below(rng, g.order());
  Bytes msg = to_bytes("term");
  TpfLabel label = tpf_rnd(g, k, msg);
  for (std::uint64_t epoch = 0; epoch < 4; ++epoch) {
    EXPECT_EQ(tpf_rnd(g, tpf_epoch_key(g, k, r1, r2, epoch), msg), label);
    label = tpf_reenc(g, label, ReEncKey{r1 * r2 % g.order()});
  }
}

TEST(Tpf, DistinctMessagesAndKeysGiveDistinctLabels) {
  Group g = Group::p256();
  Rng rng = Rng::from_seed(8);
  TpfKey k1 = tpf_keygen(g, rng), k2 = tpf_keygen(g, rng);
  EXPECT_NE(tpf_rnd(g, k1, to_bytes("a")), tpf_rnd(g, k1, to_bytes("b")));
  EXPECT_NE(tpf_rnd(g, k1, to_bytes("a")), tpf_rnd(g, k2, to_bytes("a")));
}

// Oracle: textbook Paillier with g = 1 + n computed directly in the test.
TEST(Paillier, ToyModulusExhaustive) {
  PaillierKeyPair kp = paillier_from_primes(5, 7);
  EXPECT_EQ(kp.pub.n, 35);
  Rng rng = Rng::from_seed(11);
  auto [s1, s2] = tur_keygen(kp, rng);
  EXPECT_EQ(s1.index, 1);
  EXPECT_EQ(s2.index, 2);
  int seen = 0;
  for (unsigned long m = 0; m < 35; ++m) {
    for (unsigned long r = 1; r < 35; ++r) {
      if (std::gcd(r, 35UL) != 1) continue;
      PaillierCiphertext c{(1 + m * 35) * powm(r, 35, 1225) % 1225};
      ASSERT_EQ(paillier_decrypt(c, kp), m);
      ASSERT_EQ(tur_dec(tur_pdec(c, s1, kp.pub), s2, kp.pub), m);
      ASSERT_EQ(tur_dec(tur_pdec(c, s2, kp.pub), s1, kp.pub), m);
      ++seen;
    }
  }
  EXPECT_EQ(seen, 840);
}

TEST(Paillier, CombinedExponentProperties) {
  PaillierKeyPair kp = paillier_from_primes(5, 7);
  EXPECT_EQ(kp.sec.lambda, 12);
  EXPECT_EQ(kp.sec.d % kp.sec.lambda, 0);
  EXPECT_EQ(kp.sec.d % kp.pub.n, 1);
}

TEST(Paillier, HomomorphicAdditionAndReencryption) {
  Rng rng = Rng::from_seed(12);
  PaillierKeyPair kp = tur_setup(512, rng);
  EXPECT_EQ(kp.pub.modulus_bits(), 512U);
  for (int i = 0; i < 20; ++i) {
    mpz_class a = random_below(rng, kp.pub.n), b = random_below(rng, kp.pub.n);
    PaillierCiphertext ca = tur_enc(a, kp.pub, rng), cb = tur_enc(b, kp.pub, rng);
    EXPECT_EQ(paillier_decrypt(tur_add(ca, cb, kp.pub), kp), (a + b) % kp.pub.n);
    PaillierCiphertext again = tur_reenc(ca, kp.pub, rng);
    EXPECT_NE(again, ca);
    EXPECT_EQ(paillier_decrypt(again, kp), a);
  }
}

// Same generator state, same r: the factored path must give the same ciphertext.
TEST(Paillier, FactoredEncryptionMatchesPublic) {
  Rng rng = Rng::from_seed(13);
  PaillierKeyPair kp = tur_setup(512, rng);
  for (int i = 0; i < 50; ++i) {
    mpz_class m = random_below(rng, kp.pub.n);
    Rng a = rng, b = rng;
    EXPECT_EQ(tur_enc(m, kp, a), tur_enc(m, kp.pub, b));
    rng = a;
  }
}

TEST(BigInt, PowmAgreesWithGmp) {
  Rng rng = Rng::from_seed(14);
  for (std::size_t bits : {64, 255, 256, 300, 1024, 2049}) {
    for (int i = 0; i < 10; ++i) {
      mpz_class mod = random_bits(rng, bits);
      mpz_setbit(mod.get_mpz_t(), bits - 1);
      if (i % 2 == 0) mpz_setbit(mod.get_mpz_t(), 0);
      mpz_class base = random_bits(rng, bits + 8), exp = random_bits(rng, 600), want;
      mpz_powm(want.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
      EXPECT_EQ(powm(base, exp, mod), want) << bits;
    }
  }
  mpz_class mod = (mpz_class(1) << 521) - 1;
  EXPECT_EQ(powm(mpz_class(5), mpz_class(0), mod), 1);
  EXPECT_EQ(powm(mpz_class(0), mpz_class(3), mod), 0);
  EXPECT_EQ((powm(mpz_class(7), mpz_class(-3), mod) * 343) % mod, 1);
}

TEST(Paillier, SameShareTwiceIsProtocolError) {
  Rng rng = Rng::from_seed(13);
  PaillierKeyPair kp = tur_setup(512, rng);
  auto [s1, s2] = tur_keygen(kp, rng);
  PaillierCiphertext c = tur_enc(5, kp.pub, rng);
  EXPECT_THROW(tur_dec(tur_pdec(c, s1, kp.pub), s1, kp.pub), ProtocolError);
  EXPECT_EQ(tur_dec(tur_pdec(c, s1, kp.pub), s2, kp.pub), 5);
}

TEST(Paillier, PlaintextOutOfRangeRejected) {
  Rng rng = Rng::from_seed(14);
  PaillierKeyPair kp = tur_setup(512, rng);
  EXPECT_THROW(tur_enc(kp.pub.n, kp.pub, rng), InvalidArgument);
  EXPECT_THROW(tur_enc(-1, kp.pub, rng), InvalidArgument);
}

TEST(Paillier, CiphertextEncodingRoundTripAndValidation) {
  Rng rng = Rng::from_seed(15);
  PaillierKeyPair kp = tur_setup(512, rng);
  PaillierCiphertext c = tur_enc(42, kp.pub, rng);
  Bytes enc = encode_ciphertext(c, kp.pub);
  EXPECT_EQ(enc.size(), kp.pub.ciphertext_bytes());
  EXPECT_EQ(decode_ciphertext(enc, kp.pub), c);
  PaillierCiphertext bad{kp.pub.n};  // shares a factor with n
  EXPECT_FALSE(is_valid_ciphertext(bad, kp.pub));
  EXPECT_THROW(decode_ciphertext(encode_ciphertext(bad, kp.pub), kp.pub), CryptoError);
}

TEST(Paillier, KeySerialization) {
  Rng rng = Rng::from_seed(16);
  PaillierKeyPair kp = tur_setup(512, rng);
  ByteWriter w;
  write_key_pair(w, kp);
  Bytes b = w.take();
  ByteReader r(b);
  PaillierKeyPair back = read_key_pair(r);
  EXPECT_EQ(back.pub, kp.pub);
  EXPECT_EQ(back.sec.d, kp.sec.d);
}

TEST(Prf, DomainsSeparate) {
  TagKey k{Bytes(32, 1)};
  Bytes x = to_bytes("x");
  std::set<Tag> tags;
  for (PrfDomain d : {PrfDomain::kSide1, PrfDomain::kSide2, PrfDomain::kChain, PrfDomain::kPosition}) {
    tags.insert(prf_eval(k, d, x));
  }
  EXPECT_EQ(tags.size(), 4U);
  EXPECT_EQ(prf_eval(k, PrfDomain::kSide1, x), prf_eval(k, PrfDomain::kSide1, x));
}

TEST(Prf, ChainAppliesPeerHopFirst) {
  Tag base = prf_eval(TagKey{Bytes(32, 2)}, PrfDomain::kSide1, to_bytes("t"));
  Bytes r1 = to_bytes("r1"), r2 = to_bytes("r2");
  Tag side1 = base, side2 = base;
  for (int i = 0; i < 3; ++i) {
    side1 = tag_step(tag_step(side1, r2), r1);
    side2 = tag_step(tag_step(side2, r1), r2);
  }
  EXPECT_EQ(tag_chain(base, 1, r1, r2, 3), side1);
  EXPECT_EQ(tag_chain(base, 2, r1, r2, 3), side2);
  EXPECT_EQ(tag_chain(base, 1, r1, r2, 0), base);
}

TEST(Seal, RoundTripAndTamper) {
  Rng rng = Rng::from_seed(17);
  ObjectKey k = ObjectKey::generate(rng);
  Bytes msg = to_bytes("payload bytes");
  Bytes sealed = object_seal(k, msg, rng);
  EXPECT_EQ(sealed.size(), msg.size() + kSealOverhead);
  EXPECT_EQ(object_open(k, sealed), msg);
  EXPECT_NE(object_seal(k, msg, rng), sealed);
  sealed[15] ^= 1;
  EXPECT_THROW(object_open(k, sealed), CryptoError);
  EXPECT_THROW(object_open(ObjectKey::generate(rng), object_seal(k, msg, rng)), CryptoError);
}
