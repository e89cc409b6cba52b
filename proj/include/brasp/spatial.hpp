#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brasp/bytes.hpp"

namespace brasp {

// Bounding box quantized into a 2^order x 2^order grid traversed by a Hilbert
// curve. Hilbert values use gamma = 2 * order bits.
struct GridSpec {
  double x_min = 0;
  double y_min = 0;
  double x_max = 1;
  double y_max = 1;
  unsigned order = 3;

  // Validates a non-degenerate box and 1 <= order <= 16.
  static GridSpec make(double x_min, double y_min, double x_max, double y_max, unsigned order);
  // Box [0, 2^order]^2 so that integer coordinates address cells directly.
  static GridSpec unit_cells(unsigned order);

  unsigned bits() const { return 2 * order; }
  std::uint64_t side() const { return std::uint64_t{1} << order; }
  std::uint64_t cell_count() const { return std::uint64_t{1} << bits(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

using HilbertValue = std::uint64_t;

struct Cell {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Point {
  double x = 0;
  double y = 0;
};

// Axis-aligned query rectangle in coordinate units; corners in any order.
struct Rect {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;
};

Cell quantize(Point p, const GridSpec& grid);
HilbertValue hilbert_encode(Cell cell, const GridSpec& grid);
Cell hilbert_decode(HilbertValue v, const GridSpec& grid);

// A Hilbert-value prefix: the top `length` bits of a `width`-bit value are
// fixed to `value`, the rest are wildcards.
struct PrefixElement {
  std::uint64_t value = 0;
  std::uint8_t length = 0;
  std::uint8_t width = 0;

  bool covers(HilbertValue x) const;
  HilbertValue low() const;
  HilbertValue high() const;
  // {0,1,*}^width, e.g. "0101**".
  std::string canonical() const;
  static PrefixElement parse(std::string_view text);

  friend bool operator==(const PrefixElement&, const PrefixElement&) = default;
  friend auto operator<=>(const PrefixElement&, const PrefixElement&) = default;
};

// From the full value down to the all-wildcard element: width + 1 entries.
std::vector<PrefixElement> prefix_family(HilbertValue x, unsigned width);

// Every prefix with 1 <= length <= width; 2^(width+1) - 2 elements.
std::vector<PrefixElement> prefix_universe(unsigned width);

struct Interval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Sorted, disjoint, non-adjacent intervals over Hilbert values.
class SpatialRange {
 public:
  SpatialRange() = default;
  // Sorts and merges overlapping or adjacent intervals. Throws InvalidArgument
  // on lo > hi or hi >= 2^width.
  static SpatialRange from_intervals(std::vector<Interval> intervals, unsigned width);
  static SpatialRange from_values(std::vector<HilbertValue> values, unsigned width);

  const std::vector<Interval>& intervals() const { return intervals_; }
  unsigned width() const { return width_; }
  bool empty() const { return intervals_.empty(); }
  bool contains(HilbertValue x) const;
  std::uint64_t size() const;

  friend bool operator==(const SpatialRange&, const SpatialRange&) = default;

 private:
  std::vector<Interval> intervals_;
  unsigned width_ = 0;
};

struct RangeCover {
  std::vector<PrefixElement> prefixes;  // sorted by low()
  unsigned width = 0;

  std::vector<std::string> canonical() const;
};

// Exact, minimal cover: each interval is decomposed into maximal aligned
// blocks, and the per-interval covers are unioned.
RangeCover min_prefix_cover(const SpatialRange& range, unsigned width);

// Hilbert values of every cell the rectangle touches after clipping to the
// grid box, merged into maximal intervals. Empty when the rectangle misses
// the box.
SpatialRange region_to_intervals(const Rect& rect, const GridSpec& grid);

// True iff prefix_family(x) intersects the cover.
bool membership_check(HilbertValue x, const RangeCover& cover);

void write_prefix(ByteWriter& w, const PrefixElement& p);
PrefixElement read_prefix(ByteReader& r, unsigned width);

}  // namespace brasp
