#include "brasp/bitmap.hpp"

#include <bit>

#include "brasp/error.hpp"

namespace brasp {

Bitmap Bitmap::from_string(const std::string& bits) {
  Bitmap b(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      b.set(i);
    } else if (bits[i] != '0') {
      throw InvalidArgument("bitmap string must contain only 0 and 1");
    }
  }
  return b;
}

Bitmap Bitmap::from_ids(std::size_t size, const std::vector<std::size_t>& ids) {
  Bitmap b(size);
  for (std::size_t id : ids) b.set(id);
  return b;
}

bool Bitmap::test(std::size_t i) const {
  if (i >= size_) throw InvalidArgument("bitmap index out of range");
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void Bitmap::set(std::size_t i, bool value) {
  if (i >= size_) throw InvalidArgument("bitmap index out of range");
  std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (value) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

void Bitmap::resize(std::size_t size) {
  if (size < size_) throw InvalidArgument("bitmaps only grow");
  size_ = size;
  words_.resize((size + 63) / 64, 0);
}

std::size_t Bitmap::count() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::vector<std::size_t> Bitmap::ones() const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits != 0) {
      out.push_back(w * 64 + static_cast<std::size_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

std::string Bitmap::to_string() const {
  std::string out(size_, '0');
  for (std::size_t i : ones()) out[i] = '1';
  return out;
}

void Bitmap::check_same(const Bitmap& o) const {
  if (size_ != o.size_) throw InvalidArgument("bitmap length mismatch");
}

Bitmap Bitmap::operator|(const Bitmap& o) const {
  check_same(o);
  Bitmap r = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] |= o.words_[i];
  return r;
}

Bitmap Bitmap::operator&(const Bitmap& o) const {
  check_same(o);
  Bitmap r = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
  return r;
}

Bitmap Bitmap::operator^(const Bitmap& o) const {
  check_same(o);
  Bitmap r = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] ^= o.words_[i];
  return r;
}

void Bitmap::serialize(ByteWriter& w) const {
  w.u64(size_);
  for (std::uint64_t word : words_) w.u64(word);
}

Bitmap Bitmap::deserialize(ByteReader& r) {
  std::uint64_t size = r.u64();
  if (size > (std::uint64_t{1} << 32)) throw IoError("bitmap too large");
  Bitmap b(static_cast<std::size_t>(size));
  for (std::uint64_t& word : b.words_) word = r.u64();
  if (size % 64 != 0 && !b.words_.empty() && (b.words_.back() >> (size % 64)) != 0) {
    throw IoError("bitmap has bits beyond its length");
  }
  return b;
}

ShareBitmap split_shares(const Bitmap& bitmap, Rng& rng) {
  ShareBitmap s{Bitmap(bitmap.size()), Bitmap(bitmap.size())};
  for (std::size_t i : bitmap.ones()) {
    if (rng.coin()) {
      s.first.set(i);
    } else {
      s.second.set(i);
    }
  }
  return s;
}

Bitmap combine_shares(const Bitmap& b1, const Bitmap& b2) { return b1 ^ b2; }

}  // namespace brasp
