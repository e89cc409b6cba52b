#include "brasp/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "brasp/error.hpp"

namespace brasp {

GridSpec GridSpec::make(double x_min, double y_min, double x_max, double y_max, unsigned order) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("degenerate bounding box");
  if (order < 1 || order > 16) throw InvalidArgument("Hilbert order must be in [1, 16]");
  return GridSpec{x_min, y_min, x_max, y_max, order};
}

GridSpec GridSpec::unit_cells(unsigned order) {
  double side = std::ldexp(1.0, static_cast<int>(order));
  return make(0, 0, side, side, order);
}

namespace {

std::uint64_t quantize_axis(double v, double lo, double hi, std::uint64_t side) {
  double scaled = std::floor((v - lo) / (hi - lo) * static_cast<double>(side));
  if (scaled < 0) scaled = 0;
  auto cell = static_cast<std::uint64_t>(scaled);
  return std::min(cell, side - 1);
}

// Rotates/reflects a quadrant of size s so that the sub-curve has the
// canonical orientation.
void rotate(std::uint64_t s, std::uint64_t& x, std::uint64_t& y, std::uint64_t rx,
            std::uint64_t ry) {
  if (ry == 0) {
    if (rx == 1) {
      x = s - 1 - x;
      y = s - 1 - y;
    }
    std::swap(x, y);
  }
}

std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

Cell quantize(Point p, const GridSpec& grid) {
  if (p.x < grid.x_min || p.x > grid.x_max || p.y < grid.y_min || p.y > grid.y_max ||
      std::isnan(p.x) || std::isnan(p.y)) {
    throw InvalidArgument("point outside the grid bounding box");
  }
  return Cell{quantize_axis(p.x, grid.x_min, grid.x_max, grid.side()),
              quantize_axis(p.y, grid.y_min, grid.y_max, grid.side())};
}

HilbertValue hilbert_encode(Cell cell, const GridSpec& grid) {
  const std::uint64_t n = grid.side();
  if (cell.x >= n || cell.y >= n) throw InvalidArgument("cell outside the grid");
  std::uint64_t x = cell.x;
  std::uint64_t y = cell.y;
  HilbertValue d = 0;
  for (std::uint64_t s = n / 2; s > 0; s /= 2) {
    std::uint64_t rx = (x & s) > 0 ? 1 : 0;
    std::uint64_t ry = (y & s) > 0 ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    rotate(n, x, y, rx, ry);
  }
  return d;
}

Cell hilbert_decode(HilbertValue v, const GridSpec& grid) {
  const std::uint64_t n = grid.side();
  if (v >= grid.cell_count()) throw InvalidArgument("Hilbert value outside the grid");
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t t = v;
  for (std::uint64_t s = 1; s < n; s *= 2) {
    std::uint64_t rx = 1 & (t / 2);
    std::uint64_t ry = 1 & (t ^ rx);
    rotate(s, x, y, rx, ry);
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return Cell{x, y};
}

bool PrefixElement::covers(HilbertValue x) const {
  if (length == 0) return true;
  return (x >> (width - length)) == value;
}

HilbertValue PrefixElement::low() const {
  return length == 0 ? 0 : value << (width - length);
}

HilbertValue PrefixElement::high() const {
  return low() | width_mask(static_cast<unsigned>(width - length));
}

std::string PrefixElement::canonical() const {
  std::string out(width, '*');
  for (unsigned i = 0; i < length; ++i) {
    out[i] = ((value >> (length - 1 - i)) & 1U) ? '1' : '0';
  }
  return out;
}

PrefixElement PrefixElement::parse(std::string_view text) {
  if (text.empty() || text.size() > 64) throw InvalidArgument("prefix width out of range");
  PrefixElement p;
  p.width = static_cast<std::uint8_t>(text.size());
  bool wildcard = false;
  for (char c : text) {
    if (c == '*') {
      wildcard = true;
    } else if ((c == '0' || c == '1') && !wildcard) {
      p.value = (p.value << 1) | static_cast<std::uint64_t>(c - '0');
      ++p.length;
    } else {
      throw InvalidArgument("malformed prefix: " + std::string(text));
    }
  }
  return p;
}

std::vector<PrefixElement> prefix_family(HilbertValue x, unsigned width) {
  if (width == 0 || width > 63) throw InvalidArgument("prefix width out of range");
  if (x > width_mask(width)) throw InvalidArgument("value wider than the prefix width");
  std::vector<PrefixElement> family;
  family.reserve(width + 1);
  for (unsigned len = width + 1; len-- > 0;) {
    family.push_back(PrefixElement{x >> (width - len), static_cast<std::uint8_t>(len),
                                   static_cast<std::uint8_t>(width)});
  }
  return family;
}

std::vector<PrefixElement> prefix_universe(unsigned width) {
  if (width == 0 || width > 20) throw InvalidArgument("prefix universe width out of range");
  std::vector<PrefixElement> out;
  for (unsigned len = 1; len <= width; ++len) {
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
      out.push_back(PrefixElement{v, static_cast<std::uint8_t>(len),
                                  static_cast<std::uint8_t>(width)});
    }
  }
  return out;
}

SpatialRange SpatialRange::from_intervals(std::vector<Interval> intervals, unsigned width) {
  for (const Interval& iv : intervals) {
    if (iv.lo > iv.hi) throw InvalidArgument("interval with lo > hi");
    if (iv.hi > width_mask(width)) throw InvalidArgument("interval exceeds the value range");
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  SpatialRange range;
  range.width_ = width;
  for (const Interval& iv : intervals) {
    if (!range.intervals_.empty() && iv.lo <= range.intervals_.back().hi + 1) {
      range.intervals_.back().hi = std::max(range.intervals_.back().hi, iv.hi);
    } else {
      range.intervals_.push_back(iv);
    }
  }
  return range;
}

SpatialRange SpatialRange::from_values(std::vector<HilbertValue> values, unsigned width) {
  std::vector<Interval> intervals;
  intervals.reserve(values.size());
  for (HilbertValue v : values) intervals.push_back(Interval{v, v});
  return from_intervals(std::move(intervals), width);
}

bool SpatialRange::contains(HilbertValue x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](HilbertValue v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  --it;
  return x <= it->hi;
}

std::uint64_t SpatialRange::size() const {
  std::uint64_t total = 0;
  for (const Interval& iv : intervals_) total += iv.hi - iv.lo + 1;
  return total;
}

std::vector<std::string> RangeCover::canonical() const {
  std::vector<std::string> out;
  out.reserve(prefixes.size());
  for (const PrefixElement& p : prefixes) out.push_back(p.canonical());
  return out;
}

RangeCover min_prefix_cover(const SpatialRange& range, unsigned width) {
  if (width == 0 || width > 63) throw InvalidArgument("prefix width out of range");
  if (!range.empty() && range.intervals().back().hi > width_mask(width)) {
    throw InvalidArgument("range wider than the prefix width");
  }
  RangeCover cover;
  cover.width = width;
  for (const Interval& iv : range.intervals()) {
    std::uint64_t lo = iv.lo;
    for (;;) {
      // Largest aligned block starting at lo that stays inside [lo, hi]. The
      // all-wildcard prefix is not indexed, so blocks stop at half the domain.
      unsigned free_bits = 0;
      while (free_bits + 1 < width) {
        std::uint64_t size = std::uint64_t{1} << (free_bits + 1);
        if ((lo & (size - 1)) != 0 || lo + size - 1 > iv.hi) break;
        ++free_bits;
      }
      cover.prefixes.push_back(PrefixElement{lo >> free_bits,
                                             static_cast<std::uint8_t>(width - free_bits),
                                             static_cast<std::uint8_t>(width)});
      std::uint64_t next = lo + (std::uint64_t{1} << free_bits);
      if (next - 1 >= iv.hi) break;
      lo = next;
    }
  }
  return cover;
}

SpatialRange region_to_intervals(const Rect& rect, const GridSpec& grid) {
  double x_lo = std::max(std::min(rect.x1, rect.x2), grid.x_min);
  double x_hi = std::min(std::max(rect.x1, rect.x2), grid.x_max);
  double y_lo = std::max(std::min(rect.y1, rect.y2), grid.y_min);
  double y_hi = std::min(std::max(rect.y1, rect.y2), grid.y_max);
  if (x_lo > x_hi || y_lo > y_hi) return SpatialRange::from_intervals({}, grid.bits());
  Cell a = quantize(Point{x_lo, y_lo}, grid);
  Cell b = quantize(Point{x_hi, y_hi}, grid);
  std::vector<HilbertValue> values;
  values.reserve((b.x - a.x + 1) * (b.y - a.y + 1));
  for (std::uint64_t x = a.x; x <= b.x; ++x) {
    for (std::uint64_t y = a.y; y <= b.y; ++y) values.push_back(hilbert_encode(Cell{x, y}, grid));
  }
  return SpatialRange::from_values(std::move(values), grid.bits());
}

bool membership_check(HilbertValue x, const RangeCover& cover) {
  for (const PrefixElement& fam : prefix_family(x, cover.width)) {
    for (const PrefixElement& p : cover.prefixes) {
      if (fam == p) return true;
    }
  }
  return false;
}

void write_prefix(ByteWriter& w, const PrefixElement& p) {
  w.u64(p.value);
  w.u8(p.length);
}

PrefixElement read_prefix(ByteReader& r, unsigned width) {
  PrefixElement p;
  p.value = r.u64();
  p.length = r.u8();
  p.width = static_cast<std::uint8_t>(width);
  if (p.length > width || (p.length < 64 && (p.value >> p.length) != 0)) {
    throw IoError("corrupt prefix encoding");
  }
  return p;
}

}  // namespace brasp
