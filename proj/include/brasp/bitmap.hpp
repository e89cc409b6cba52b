#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brasp/bytes.hpp"
#include "brasp/rng.hpp"

namespace brasp {

// Fixed-length bit vector; bit i marks object i.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}
  // "10100" means objects 0 and 2 are set.
  static Bitmap from_string(const std::string& bits);
  static Bitmap from_ids(std::size_t size, const std::vector<std::size_t>& ids);

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);
  // Grows to `size` bits; new bits are zero.
  void resize(std::size_t size);

  std::size_t count() const;
  bool none() const { return count() == 0; }
  std::vector<std::size_t> ones() const;
  std::string to_string() const;

  Bitmap operator|(const Bitmap& o) const;
  Bitmap operator&(const Bitmap& o) const;
  Bitmap operator^(const Bitmap& o) const;

  friend bool operator==(const Bitmap&, const Bitmap&) = default;

  void serialize(ByteWriter& w) const;
  static Bitmap deserialize(ByteReader& r);

 private:
  void check_same(const Bitmap& o) const;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Disjoint split of one bitmap; share k is stored at server k.
struct ShareBitmap {
  Bitmap first;
  Bitmap second;

  const Bitmap& side(int i) const { return i == 1 ? first : second; }
};

// Every set bit goes to a uniformly chosen share.
ShareBitmap split_shares(const Bitmap& bitmap, Rng& rng);

// Slotwise (b1 + b2) mod 2; equals OR for disjoint shares.
Bitmap combine_shares(const Bitmap& b1, const Bitmap& b2);

}  // namespace brasp
