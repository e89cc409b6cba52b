#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brasp/harness.hpp"

namespace brasp {

struct BenchRecord {
  std::string phase;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t mq = 0;
  std::size_t wo = 0;
  unsigned rep = 0;
  double millis = 0;
  std::uint64_t bytes = 0;
  unsigned paillier_bits = 0;
  std::uint64_t seed = 0;
};

const char* bench_csv_header();
std::string to_csv(const BenchRecord& r);

// n objects with uniform locations over the grid and a vocabulary of m
// keywords; every keyword is used at least once (m <= n * per_object).
struct Workload {
  std::vector<SpatioTextualObject> db;
  std::vector<std::string> vocabulary;
};
Workload random_workload(std::size_t n, std::size_t m, std::size_t per_object, const GridSpec& grid,
                         Rng& rng);
// Random non-empty interval plus mq distinct vocabulary keywords.
BooleanRangeQuery random_query(const Workload& w, std::size_t mq, const GridSpec& grid, Rng& rng);

struct BenchOptions {
  std::string suite = "all";  // build, token, search, shuffle, update, all
  std::vector<std::size_t> ns = {200, 400, 600, 800, 1000};
  std::vector<std::size_t> ms = {100};
  std::vector<std::size_t> mqs = {2};
  std::vector<std::size_t> wos = {5, 10, 20};
  unsigned reps = 10;
  unsigned paillier_bits = 1024;
  unsigned slot_bits = 16;
  std::size_t per_object = 4;
  std::uint64_t seed = 1;
};

std::vector<std::string> bench_suites();

// Runs the suite and hands every record to `sink` as it completes.
void run_bench(const BenchOptions& opts, const std::function<void(const BenchRecord&)>& sink);

}  // namespace brasp
