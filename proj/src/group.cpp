#include "brasp/group.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>
#include <openssl/sha.h>

#include "brasp/bigint.hpp"
#include "brasp/error.hpp"

namespace brasp {
namespace detail {

class GroupBackend {
 public:
  virtual ~GroupBackend() = default;
  virtual Group::Kind kind() const = 0;
  virtual std::string name() const = 0;
  virtual const mpz_class& order() const = 0;
  virtual std::size_t element_size() const = 0;
  virtual Bytes pow_generator(const mpz_class& e) const = 0;
  virtual Bytes pow(ByteView element, const mpz_class& e) const = 0;
  virtual bool is_element(ByteView element) const = 0;
  virtual void serialize(ByteWriter& w) const = 0;
  virtual bool same(const GroupBackend& other) const = 0;
};

namespace {

class ModpBackend final : public GroupBackend {
 public:
  ModpBackend(mpz_class p, mpz_class q, mpz_class g)
      : p_(std::move(p)), q_(std::move(q)), g_(std::move(g)), width_(byte_length(p_)) {}

  Group::Kind kind() const override { return Group::Kind::kModp; }
  std::string name() const override {
    return "modp-" + std::to_string(mpz_sizeinbase(p_.get_mpz_t(), 2)) + "/" +
           std::to_string(mpz_sizeinbase(q_.get_mpz_t(), 2));
  }
  const mpz_class& order() const override { return q_; }
  std::size_t element_size() const override { return width_; }

  Bytes pow_generator(const mpz_class& e) const override {
    mpz_class r = e % q_;
    if (r < 0) r += q_;
    return mpz_to_bytes(powm(g_, r, p_), width_);
  }

  Bytes pow(ByteView element, const mpz_class& e) const override {
    if (!is_element(element)) throw CryptoError("invalid group element");
    mpz_class r = e % q_;
    if (r < 0) r += q_;
    return mpz_to_bytes(powm(mpz_from_bytes(element), r, p_), width_);
  }

  bool is_element(ByteView element) const override {
    if (element.size() != width_) return false;
    mpz_class x = mpz_from_bytes(element);
    if (x < 1 || x >= p_) return false;
    return powm(x, q_, p_) == 1;
  }

  void serialize(ByteWriter& w) const override {
    write_mpz(w, p_);
    write_mpz(w, q_);
    write_mpz(w, g_);
  }

  bool same(const GroupBackend& other) const override {
    auto* o = dynamic_cast<const ModpBackend*>(&other);
    return o != nullptr && o->p_ == p_ && o->q_ == q_ && o->g_ == g_;
  }

 private:
  mpz_class p_, q_, g_;
  std::size_t width_;
};

struct BnDeleter {
  void operator()(BIGNUM* b) const { BN_clear_free(b); }
};
struct CtxDeleter {
  void operator()(BN_CTX* c) const { BN_CTX_free(c); }
};
struct PointDeleter {
  void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct EcGroupDeleter {
  void operator()(EC_GROUP* g) const { EC_GROUP_free(g); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using CtxPtr = std::unique_ptr<BN_CTX, CtxDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;

// SEC1 compressed points; the point at infinity is encoded as all zeros so
// that every element has the same width.
class P256Backend final : public GroupBackend {
 public:
  static constexpr std::size_t kWidth = 33;

  P256Backend() : group_(EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1)) {
    if (!group_) throw CryptoError("P-256 unavailable");
    const BIGNUM* order = EC_GROUP_get0_order(group_.get());
    Bytes buf(static_cast<std::size_t>(BN_num_bytes(order)));
    BN_bn2bin(order, buf.data());
    q_ = mpz_from_bytes(buf);
  }

  Group::Kind kind() const override { return Group::Kind::kP256; }
  std::string name() const override { return "p256"; }
  const mpz_class& order() const override { return q_; }
  std::size_t element_size() const override { return kWidth; }

  Bytes pow_generator(const mpz_class& e) const override {
    CtxPtr ctx(BN_CTX_new());
    BnPtr k = scalar(e);
    PointPtr out(EC_POINT_new(group_.get()));
    if (!EC_POINT_mul(group_.get(), out.get(), k.get(), nullptr, nullptr, ctx.get())) {
      throw CryptoError("scalar multiplication failed");
    }
    return encode(out.get(), ctx.get());
  }

  Bytes pow(ByteView element, const mpz_class& e) const override {
    CtxPtr ctx(BN_CTX_new());
    PointPtr in = decode(element, ctx.get());
    if (!in) throw CryptoError("invalid group element");
    BnPtr k = scalar(e);
    PointPtr out(EC_POINT_new(group_.get()));
    if (!EC_POINT_mul(group_.get(), out.get(), nullptr, in.get(), k.get(), ctx.get())) {
      throw CryptoError("scalar multiplication failed");
    }
    return encode(out.get(), ctx.get());
  }

  bool is_element(ByteView element) const override {
    CtxPtr ctx(BN_CTX_new());
    return decode(element, ctx.get()) != nullptr;
  }

  void serialize(ByteWriter&) const override {}

  bool same(const GroupBackend& other) const override {
    return dynamic_cast<const P256Backend*>(&other) != nullptr;
  }

 private:
  BnPtr scalar(const mpz_class& e) const {
    mpz_class r = e % q_;
    if (r < 0) r += q_;
    Bytes buf = mpz_to_bytes(r, 32);
    return BnPtr(BN_bin2bn(buf.data(), static_cast<int>(buf.size()), nullptr));
  }

  Bytes encode(const EC_POINT* p, BN_CTX* ctx) const {
    Bytes out(kWidth, 0);
    if (EC_POINT_is_at_infinity(group_.get(), p)) return out;
    std::size_t len = EC_POINT_point2oct(group_.get(), p, POINT_CONVERSION_COMPRESSED,
                                         out.data(), out.size(), ctx);
    if (len != kWidth) throw CryptoError("point encoding failed");
    return out;
  }

  PointPtr decode(ByteView element, BN_CTX* ctx) const {
    if (element.size() != kWidth) return nullptr;
    PointPtr p(EC_POINT_new(group_.get()));
    bool all_zero = true;
    for (std::uint8_t b : element) all_zero = all_zero && b == 0;
    if (all_zero) {
      EC_POINT_set_to_infinity(group_.get(), p.get());
      return p;
    }
    if (element[0] != 0x02 && element[0] != 0x03) return nullptr;
    if (!EC_POINT_oct2point(group_.get(), p.get(), element.data(), element.size(), ctx)) {
      return nullptr;
    }
    return p;
  }

  std::unique_ptr<EC_GROUP, EcGroupDeleter> group_;
  mpz_class q_;
};

}  // namespace
}  // namespace detail

Group::Group() : Group(p256()) {}

Group Group::toy() { return modp(23, 11, 2); }

Group Group::modp(const mpz_class& p, const mpz_class& q, const mpz_class& g) {
  if (p < 3 || q < 2) throw InvalidArgument("group parameters too small");
  if (mpz_probab_prime_p(q.get_mpz_t(), 40) == 0) throw InvalidArgument("group order is not prime");
  if (mpz_probab_prime_p(p.get_mpz_t(), 40) == 0) throw InvalidArgument("modulus is not prime");
  if ((p - 1) % q != 0) throw InvalidArgument("group order does not divide p - 1");
  if (g <= 1 || g >= p || powm(g, q, p) != 1) {
    throw InvalidArgument("generator does not have order q");
  }
  return Group(std::make_shared<detail::ModpBackend>(p, q, g));
}

Group Group::p256() {
  static const auto backend = std::make_shared<const detail::P256Backend>();
  return Group(backend);
}

Group Group::for_security(unsigned bits) {
  if (bits == 128) return p256();
  throw InvalidArgument("unsupported security level: " + std::to_string(bits));
}

Group::Kind Group::kind() const { return impl_->kind(); }
std::string Group::name() const { return impl_->name(); }
const mpz_class& Group::order() const { return impl_->order(); }
std::size_t Group::element_size() const { return impl_->element_size(); }
Bytes Group::identity() const { return impl_->pow_generator(0); }
Bytes Group::pow_generator(const mpz_class& e) const { return impl_->pow_generator(e); }
Bytes Group::pow(ByteView element, const mpz_class& e) const { return impl_->pow(element, e); }
bool Group::is_element(ByteView element) const { return impl_->is_element(element); }

mpz_class Group::hash_to_exponent(ByteView message) const {
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  SHA256(message.data(), message.size(), digest);
  mpz_class h = mpz_from_bytes(ByteView(digest, sizeof(digest)));
  return h % order();
}

Bytes Group::hash_to_group(ByteView message) const {
  return pow_generator(hash_to_exponent(message));
}

void Group::serialize(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(kind()));
  impl_->serialize(w);
}

Group Group::deserialize(ByteReader& r) {
  auto kind = static_cast<Kind>(r.u8());
  switch (kind) {
    case Kind::kModp: {
      mpz_class p = read_mpz(r);
      mpz_class q = read_mpz(r);
      mpz_class g = read_mpz(r);
      return modp(p, q, g);
    }
    case Kind::kP256:
      return p256();
  }
  throw IoError("unknown group kind");
}

bool operator==(const Group& a, const Group& b) {
  return a.impl_ == b.impl_ || a.impl_->same(*b.impl_);
}

}  // namespace brasp
