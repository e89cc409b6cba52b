#include "brasp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "brasp/error.hpp"

namespace brasp {

const char* bench_csv_header() { return "phase,n,m,mq,wo,rep,millis,bytes,paillier_bits,seed"; }

std::string to_csv(const BenchRecord& r) {
  char millis[32];
  std::snprintf(millis, sizeof(millis), "%.3f", r.millis);
  return r.phase + "," + std::to_string(r.n) + "," + std::to_string(r.m) + "," +
         std::to_string(r.mq) + "," + std::to_string(r.wo) + "," + std::to_string(r.rep) + "," +
         millis + "," + std::to_string(r.bytes) + "," + std::to_string(r.paillier_bits) + "," +
         std::to_string(r.seed);
}

Workload random_workload(std::size_t n, std::size_t m, std::size_t per_object, const GridSpec& grid,
                         Rng& rng) {
  if (n == 0) throw InvalidArgument("workload needs at least one object");
  if (m > n * std::max<std::size_t>(per_object, 1)) throw InvalidArgument("vocabulary too large");
  Workload w;
  for (std::size_t j = 0; j < m; ++j) w.vocabulary.push_back("kw" + std::to_string(j));
  w.db.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.db[i].id = i;
    w.db[i].location = rng.uniform(grid.cell_count());
    w.db[i].payload = to_bytes("object-" + std::to_string(i));
  }
  // Round-robin guarantees coverage of the vocabulary; the rest is random.
  for (std::size_t j = 0; j < m; ++j) w.db[j % n].keywords.push_back(w.vocabulary[j]);
  for (SpatioTextualObject& o : w.db) {
    std::set<std::string> kw(o.keywords.begin(), o.keywords.end());
    while (m > 0 && kw.size() < std::min(per_object, m)) kw.insert(w.vocabulary[rng.uniform(m)]);
    o.keywords.assign(kw.begin(), kw.end());
  }
  return w;
}

BooleanRangeQuery random_query(const Workload& w, std::size_t mq, const GridSpec& grid, Rng& rng) {
  BooleanRangeQuery q;
  std::uint64_t a = rng.uniform(grid.cell_count());
  std::uint64_t b = rng.uniform(grid.cell_count());
  q.range = SpatialRange::from_intervals({{std::min(a, b), std::max(a, b)}}, grid.bits());
  std::vector<std::string> pool = w.vocabulary;
  shuffle_in_place(pool, rng);
  pool.resize(std::min(mq, pool.size()));
  q.keywords = pool;
  return q;
}

std::vector<std::string> bench_suites() { return {"build", "token", "search", "shuffle", "update", "all"}; }

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

void run_bench(const BenchOptions& opts, const std::function<void(const BenchRecord&)>& sink) {
  const std::vector<std::string> suites = bench_suites();
  if (std::find(suites.begin(), suites.end(), opts.suite) == suites.end()) {
    throw InvalidArgument("unknown bench suite: " + opts.suite);
  }
  auto wants = [&](const char* s) { return opts.suite == "all" || opts.suite == s; };
  const GridSpec grid = GridSpec::unit_cells(3);

  for (std::size_t n : opts.ns) {
    for (std::size_t m : opts.ms) {
      for (unsigned rep = 0; rep < opts.reps; ++rep) {
        const std::uint64_t seed = opts.seed * 1000003ULL + n * 7919ULL + m * 104729ULL + rep;
        Rng rng = Rng::from_seed(seed);
        HarnessConfig cfg;
        cfg.seed = seed;
        cfg.paillier_bits = opts.paillier_bits;
        cfg.slot_bits = opts.slot_bits;
        cfg.grid = grid;
        cfg.auto_shuffle = false;
        Deployment d(cfg);
        Workload w = random_workload(n, m, opts.per_object, grid, rng);
        d.ingest(w.db);

        BenchRecord base;
        base.n = n;
        base.m = m;
        base.rep = rep;
        base.paillier_bits = opts.paillier_bits;
        base.seed = seed;

        auto t0 = Clock::now();
        d.build();
        if (wants("build")) {
          BenchRecord r = base;
          r.phase = "build";
          r.millis = millis_since(t0);
          r.bytes = d.transcript().bytes_in(Phase::kBuild);
          sink(r);
        }

        if (wants("shuffle")) {
          std::uint64_t before = d.transcript().total_bytes();
          t0 = Clock::now();
          d.shuffle();
          BenchRecord r = base;
          r.phase = "shuffle";
          r.millis = millis_since(t0);
          r.bytes = d.transcript().total_bytes() - before;
          sink(r);
        }

        for (std::size_t mq : opts.mqs) {
          if (!wants("token") && !wants("search")) break;
          BooleanRangeQuery q = random_query(w, mq, grid, rng);
          if (wants("token")) {
            const ClientState& c = d.client();
            t0 = Clock::now();
            QueryPlan plan = token_generation(q, c.params, c.keys, c.states);
            BenchRecord r = base;
            r.phase = "token";
            r.mq = mq;
            r.millis = millis_since(t0);
            r.bytes = plan.trapdoors.size() * c.params.group.element_size() * 2;
            sink(r);
          }
          if (wants("search")) {
            std::uint64_t before = d.transcript().total_bytes();
            t0 = Clock::now();
            d.query(q);
            d.redistribute();
            d.shuffle();
            BenchRecord r = base;
            r.phase = "search";
            r.mq = mq;
            r.millis = millis_since(t0);
            r.bytes = d.transcript().total_bytes() - before;
            sink(r);
          }
        }

        if (wants("update")) {
          for (std::size_t wo : opts.wos) {
            SpatioTextualObject obj;
            obj.location = rng.uniform(grid.cell_count());
            for (std::size_t k = 0; k < wo; ++k) {
              obj.keywords.push_back(k < w.vocabulary.size() ? w.vocabulary[k]
                                                            : "fresh" + std::to_string(k));
            }
            obj.payload = to_bytes("inserted");
            std::uint64_t before = d.transcript().total_bytes();
            t0 = Clock::now();
            d.update(obj);
            BenchRecord r = base;
            r.phase = "update";
            r.wo = wo;
            r.millis = millis_since(t0);
            r.bytes = d.transcript().total_bytes() - before;
            sink(r);
          }
        }
      }
    }
  }
}

}  // namespace brasp
