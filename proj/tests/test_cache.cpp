/* SPDX-License-Identifier: Apache-2.0 */

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "icache_ci/cache.hpp"
#include "icache_ci/synth.hpp"
#include "oracles.hpp"

using namespace icache_ci;

namespace {

CacheConfig geometry(std::uint64_t capacity, std::uint64_t block, std::uint32_t ways, Replacement r) {
  CacheConfig c;
  c.capacity = capacity;
  c.block_size = block;
  c.ways = ways;
  c.replacement = r;
  return c;
}

StaticProgram flat_program(std::uint32_t n) {
  std::vector<InstructionRecord> recs(n);
  for (std::uint32_t i = 0; i < n; ++i) recs[i].index = i;
  return StaticProgram(std::move(recs));
}

}  // namespace

TEST_CASE("cold sequential fetch of one block: one miss then B-1 hits") {
  for (std::uint64_t block : {8u, 16u, 32u, 64u}) {
    std::uint32_t B = static_cast<std::uint32_t>(block / 4);
    auto prog = flat_program(B);
    auto trace = DynamicTrace({{0, B - 1, 1}});
    auto s = simulate(prog, trace, geometry(1024, block, 2, Replacement::lru));
    CHECK(s.misses == 1);
    CHECK(s.hits == B - 1);
  }
}

TEST_CASE("empty trace") {
  auto s = simulate(flat_program(4), DynamicTrace{}, CacheConfig{});
  CHECK(s == AccessStats{});
  CHECK(s.total() == 0);
  CHECK(s.hit_rate() == 0.0);
  CHECK(s.miss_rate() == 0.0);
}

TEST_CASE("uniform-random workload matches the naive per-set model") {
  auto w = synth_trace("uniform-random:64,10000,3");
  auto cfg = geometry(1024, 32, 2, Replacement::lru);
  auto got = simulate(w.program, w.trace, cfg);
  auto want = oracle::naive_cache(oracle::addresses_of(w.program, w.trace), 1024, 32, 2, true);
  CHECK(got == want);
  CHECK(got.total() == 10000);
}

TEST_CASE("LRU and FIFO diverge on a re-reference") {
  // One set of two ways; blocks A B A C A.
  auto prog = flat_program(32);
  auto trace = DynamicTrace::from_events(std::vector<std::uint32_t>{0, 8, 0, 16, 0});
  auto lru = simulate(prog, trace, geometry(64, 32, 2, Replacement::lru));
  auto fifo = simulate(prog, trace, geometry(64, 32, 2, Replacement::fifo));
  CHECK(lru == AccessStats{2, 3});
  CHECK(fifo == AccessStats{1, 4});
}

TEST_CASE("random configurations agree with the naive model") {
  std::mt19937_64 rng(11);
  const std::uint32_t way_choices[] = {1, 2, 4, 8, CacheConfig::kFullyAssociative};
  for (int iter = 0; iter < 40; ++iter) {
    std::uint64_t cap = std::uint64_t{512} << (rng() % 7);
    std::uint64_t block = std::uint64_t{8} << (rng() % 4);
    std::uint32_t ways = way_choices[rng() % 5];
    auto repl = rng() % 2 ? Replacement::lru : Replacement::fifo;
    auto w = synth_trace(GeneratorSpec{GeneratorKind::uniform_random, {1 + rng() % 4096, 3000}, rng()});
    auto got = simulate(w.program, w.trace, geometry(cap, block, ways, repl));
    auto want = oracle::naive_cache(oracle::addresses_of(w.program, w.trace), cap, block, ways,
                                    repl == Replacement::lru);
    INFO("cap=" << cap << " block=" << block << " ways=" << ways << " repl=" << to_string(repl));
    REQUIRE(got == want);
  }
}

TEST_CASE("sweep: total is size independent and FA-LRU misses never grow") {
  auto w = synth_trace("uniform-random:2048,20000,5");
  std::vector<std::uint64_t> sizes = {1024, 2048, 4096, 8192, 16384, 32768};
  auto sweep = simulate_sweep(w.program, w.trace, sizes, geometry(1024, 32, CacheConfig::kFullyAssociative, Replacement::lru));
  REQUIRE(sweep.size() == 6);
  std::uint64_t prev_misses = UINT64_MAX;
  for (const auto& [size, s] : sweep) {
    CHECK(s.total() == 20000);
    CHECK(s.misses <= prev_misses);
    prev_misses = s.misses;
  }
}

TEST_CASE("a loop that fits only pays cold fills") {
  auto w = synth_trace("straight-loop:256,100");
  auto sweep = simulate_sweep(w.program, w.trace, {1024, 4096}, CacheConfig{});
  // 256 instructions x 4 B = 1 KB = 32 blocks of 32 B.
  CHECK(sweep.at(4096).misses == 32);
  CHECK(sweep.at(4096).hits == 25600 - 32);
  CHECK(sweep.at(1024).misses >= 32);
}

TEST_CASE("simulation is deterministic") {
  auto w = synth_trace("uniform-random:300,5000,1");
  auto cfg = geometry(2048, 16, 4, Replacement::fifo);
  CHECK(simulate(w.program, w.trace, cfg) == simulate(w.program, w.trace, cfg));
}

TEST_CASE("instruction width comes from the program") {
  std::vector<InstructionRecord> recs(16);
  for (std::uint32_t i = 0; i < 16; ++i) recs[i].index = i;
  StaticProgram narrow(recs, 2);
  auto s = simulate(narrow, DynamicTrace({{0, 15, 1}}), CacheConfig{});
  CHECK(s.misses == 1);  // 16 x 2 B in one 32 B block
  CHECK(s.hits == 15);
}

TEST_CASE("invalid geometries are config errors") {
  auto bad = [](CacheConfig c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::config;
    }
    return false;
  };
  CHECK(bad(geometry(1000, 32, 2, Replacement::lru)));
  CHECK(bad(geometry(1024, 24, 2, Replacement::lru)));
  CHECK(bad(geometry(1024, 2048, 1, Replacement::lru)));
  CHECK(bad(geometry(1024, 32, 3, Replacement::lru)));
  CHECK(bad(geometry(64, 32, 4, Replacement::lru)));
  CHECK_FALSE(bad(geometry(64, 32, CacheConfig::kFullyAssociative, Replacement::lru)));
  CHECK(geometry(1024, 32, 2, Replacement::lru).block_instructions() == 8);
  CHECK(geometry(1024, 32, CacheConfig::kFullyAssociative, Replacement::lru).num_sets() == 1);
}

TEST_CASE("stats CSV rows") {
  SweepStats s{{1024, {90, 10}}, {2048, {95, 5}}};
  std::ostringstream out;
  write_stats_csv(out, s, CacheConfig{});
  CHECK(out.str() ==
        "size,ways,block,replacement,hits,misses,total\n"
        "1024,2,32,lru,90,10,100\n"
        "2048,2,32,lru,95,5,100\n");
}
