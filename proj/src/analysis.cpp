#include "brasp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "brasp/error.hpp"
#include "brasp/maintenance.hpp"

namespace brasp {

std::vector<std::uint64_t> pbrq_oracle(const std::vector<SpatioTextualObject>& db,
                                       const BooleanRangeQuery& q) {
  std::vector<std::string> wanted;
  for (const std::string& w : q.keywords) wanted.push_back(normalize_keyword(w));
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!q.range.contains(db[i].location)) continue;
    std::set<std::string> have;
    for (const std::string& w : db[i].keywords) have.insert(normalize_keyword(w));
    bool all = std::all_of(wanted.begin(), wanted.end(),
                           [&](const std::string& w) { return have.count(w) != 0; });
    if (all) out.push_back(i);
  }
  return out;
}

PatternMatrix pattern_matrices(const std::vector<BooleanRangeQuery>& history,
                               const std::vector<SpatioTextualObject>& db) {
  PatternMatrix m;
  const std::size_t t = history.size();
  for (const BooleanRangeQuery& q : history) {
    std::vector<std::uint8_t> row(db.size(), 0);
    for (std::uint64_t id : pbrq_oracle(db, q)) row[id] = 1;
    m.alpha.push_back(std::move(row));
  }
  auto canonical = [](const BooleanRangeQuery& q) {
    std::set<std::string> kw;
    for (const std::string& w : q.keywords) kw.insert(normalize_keyword(w));
    return std::make_pair(q.range, kw);
  };
  m.sigma.assign(t, std::vector<std::uint8_t>(t, 0));
  for (std::size_t a = 0; a < t; ++a) {
    for (std::size_t b = 0; b < t; ++b) {
      m.sigma[a][b] = canonical(history[a]) == canonical(history[b]) ? 1 : 0;
    }
  }
  return m;
}

namespace {

constexpr std::size_t kNoCover = std::numeric_limits<std::size_t>::max() / 4;

// Cost of covering range ∩ block(value, length) exactly, with the chosen
// prefixes appended to `out` when `emit` is set.
std::size_t cover_cost(const SpatialRange& range, unsigned width, std::uint64_t value,
                       unsigned length, bool emit, std::vector<PrefixElement>& out) {
  const std::uint64_t lo = value << (width - length);
  const std::uint64_t hi = lo + (std::uint64_t{1} << (width - length)) - 1;
  std::uint64_t inside = 0;
  for (const Interval& iv : range.intervals()) {
    std::uint64_t a = std::max(lo, iv.lo);
    std::uint64_t b = std::min(hi, iv.hi);
    if (a <= b) inside += b - a + 1;
  }
  if (inside == 0) return 0;
  if (length > 0 && inside == hi - lo + 1) {
    if (emit) {
      out.push_back(PrefixElement{value, static_cast<std::uint8_t>(length),
                                  static_cast<std::uint8_t>(width)});
    }
    return 1;
  }
  if (length == width) return kNoCover;
  return cover_cost(range, width, value << 1, length + 1, emit, out) +
         cover_cost(range, width, (value << 1) | 1, length + 1, emit, out);
}

}  // namespace

RangeCover min_cover_oracle(const SpatialRange& range, unsigned width) {
  if (width == 0 || width > 10) throw InvalidArgument("oracle width must be in [1, 10]");
  RangeCover cover;
  cover.width = width;
  cover_cost(range, width, 0, 0, true, cover.prefixes);
  std::sort(cover.prefixes.begin(), cover.prefixes.end(),
            [](const PrefixElement& a, const PrefixElement& b) { return a.low() < b.low(); });
  return cover;
}

double LinkageReport::query_link_rate() const {
  return query_pairs_repeated == 0 ? 0.0
                                   : static_cast<double>(query_pairs_linked) / query_pairs_repeated;
}

double LinkageReport::byte_link_rate() const {
  return entries_compared == 0
             ? 0.0
             : static_cast<double>(label_links + ciphertext_links + tag_links) / entries_compared;
}

double LinkageReport::position_rate() const {
  return position_trials == 0 ? 0.0 : static_cast<double>(position_persistent) / position_trials;
}

std::string LinkageReport::verdict() const {
  bool linked = query_link_rate() > 0 || byte_link_rate() > 0 || query_pairs_false_links > 0;
  if (position_trials > 0 && chance_baseline > 0) {
    CountBand band = binomial_band(position_trials, chance_baseline, 2.576);
    linked = linked || !band.contains(static_cast<double>(position_persistent));
  }
  return linked ? "linkable" : "chance";
}

std::string LinkageReport::to_json() const {
  nlohmann::ordered_json j;
  j["repeated_query_pairs"] = query_pairs_repeated;
  j["repeated_query_pairs_linked"] = query_pairs_linked;
  j["query_link_rate"] = query_link_rate();
  j["distinct_query_pairs"] = query_pairs_distinct;
  j["distinct_query_pairs_linked"] = query_pairs_false_links;
  j["entries_compared"] = entries_compared;
  j["label_links"] = label_links;
  j["ciphertext_links"] = ciphertext_links;
  j["tag_links"] = tag_links;
  j["byte_link_rate"] = byte_link_rate();
  j["position_trials"] = position_trials;
  j["position_persistent"] = position_persistent;
  j["position_rate"] = position_rate();
  j["chance_baseline"] = chance_baseline;
  j["verdict"] = verdict();
  return j.dump(2);
}

std::vector<TpfLabel> token_labels(const Envelope& e, const PublicParams& params) {
  if (e.phase != Phase::kQueryToken) throw InvalidArgument("not a query token envelope");
  ByteReader r(e.payload);
  r.u8();  // result mode
  TrapdoorSet t = read_trapdoors(r, params);
  std::vector<TpfLabel> out = t.keyword;
  out.insert(out.end(), t.prefix.begin(), t.prefix.end());
  return out;
}

LinkageReport adversary_linkage(const Transcript& transcript, ActorId observer,
                                const std::vector<std::string>& query_keys,
                                const PublicParams& params) {
  LinkageReport rep;
  std::vector<std::set<TpfLabel>> queries;
  // Per share side, the sequence of index views seen during shuffles.
  std::map<int, std::vector<std::vector<EncryptedIndexEntry>>> views;

  for (const Envelope& e : transcript.envelopes()) {
    if (e.receiver != observer && e.sender != observer) continue;
    if (e.phase == Phase::kQueryToken && e.receiver == observer) {
      std::vector<TpfLabel> labels = token_labels(e, params);
      queries.emplace_back(labels.begin(), labels.end());
    } else if (e.phase == Phase::kShuffleOut || e.phase == Phase::kShuffleBack) {
      ByteReader r(e.payload);
      std::vector<EncryptedIndexEntry> view;
      int side = 0;
      for (int k = 0; k < 2; ++k) {
        EncryptedIndex idx = read_index(r, params);
        side = idx.side;
        view.insert(view.end(), idx.entries.begin(), idx.entries.end());
      }
      views[side].push_back(std::move(view));
    }
  }
  if (query_keys.size() != queries.size()) {
    throw InvalidArgument("ground truth does not match the observed queries");
  }

  for (std::size_t a = 0; a < queries.size(); ++a) {
    for (std::size_t b = a + 1; b < queries.size(); ++b) {
      bool linked = std::any_of(queries[a].begin(), queries[a].end(),
                                [&](const TpfLabel& l) { return queries[b].count(l) != 0; });
      if (query_keys[a] == query_keys[b]) {
        ++rep.query_pairs_repeated;
        if (linked) ++rep.query_pairs_linked;
      } else {
        ++rep.query_pairs_distinct;
        if (linked) ++rep.query_pairs_false_links;
      }
    }
  }

  for (const auto& [side, seq] : views) {
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      std::set<TpfLabel> labels;
      std::set<Tag> tags;
      std::set<mpz_class> cts;
      for (const EncryptedIndexEntry& e : seq[k]) {
        labels.insert(e.label);
        tags.insert(e.tag);
        for (const PaillierCiphertext& c : e.id_field.chunks) cts.insert(c.value);
      }
      for (const EncryptedIndexEntry& e : seq[k + 1]) {
        ++rep.entries_compared;
        if (labels.count(e.label) != 0) ++rep.label_links;
        if (tags.count(e.tag) != 0) ++rep.tag_links;
        for (const PaillierCiphertext& c : e.id_field.chunks) {
          if (cts.count(c.value) != 0) ++rep.ciphertext_links;
        }
      }
    }
  }
  return rep;
}

std::uint64_t persistent_positions(const EncryptedIndex& before, const EncryptedIndex& after,
                                   const PublicParams& params, const ShuffleParams& shuffle) {
  if (before.size() != after.size()) throw InvalidArgument("index sizes differ");
  const ReEncKey round{(shuffle.r1 * shuffle.r2) % params.group.order()};
  std::map<TpfLabel, std::size_t> position;
  for (std::size_t i = 0; i < before.size(); ++i) {
    position[tpf_reenc(params.group, before.entries[i].label, round)] = i;
  }
  std::uint64_t same = 0;
  for (std::size_t j = 0; j < after.size(); ++j) {
    auto it = position.find(after.entries[j].label);
    if (it == position.end()) throw InvalidArgument("entry does not follow the label law");
    if (it->second == j) ++same;
  }
  return same;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw InvalidArgument("x values are constant");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

CountBand binomial_band(std::uint64_t trials, double p, double z) {
  const double mean = static_cast<double>(trials) * p;
  const double sd = std::sqrt(static_cast<double>(trials) * p * (1 - p));
  return CountBand{mean - z * sd, mean + z * sd};
}

}  // namespace brasp
