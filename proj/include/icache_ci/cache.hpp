/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// Trace-driven instruction cache. Read-only: a miss installs the whole containing
// block, there is no dirty state and no prefetch.

#include <cstdint>
#include <future>
#include <list>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "icache_ci/error.hpp"
#include "icache_ci/program.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

enum class Replacement { lru, fifo };

inline const char* to_string(Replacement r) { return r == Replacement::lru ? "lru" : "fifo"; }

inline Replacement parse_replacement(std::string_view s) {
  if (s == "lru" || s == "LRU") return Replacement::lru;
  if (s == "fifo" || s == "FIFO") return Replacement::fifo;
  throw Error(ErrorKind::config, "unknown replacement policy '" + std::string(s) + "'");
}

struct CacheConfig {
  static constexpr std::uint32_t kFullyAssociative = 0;

  std::uint64_t capacity = 1024;
  std::uint64_t block_size = 32;
  std::uint32_t ways = 2;  // kFullyAssociative for a single set
  Replacement replacement = Replacement::lru;
  std::uint32_t instruction_width = StaticProgram::kDefaultWidth;

  bool fully_associative() const noexcept { return ways == kFullyAssociative; }
  std::uint64_t num_blocks() const noexcept { return capacity / block_size; }
  std::uint64_t effective_ways() const noexcept { return fully_associative() ? num_blocks() : ways; }
  std::uint64_t num_sets() const noexcept { return num_blocks() / effective_ways(); }
  /// B: instructions per block.
  std::uint64_t block_instructions() const noexcept { return block_size / instruction_width; }

  std::string ways_label() const { return fully_associative() ? "full" : std::to_string(ways); }

  void validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorKind::config, why); };
    if (!is_power_of_two(capacity)) fail("capacity " + std::to_string(capacity) + " is not a power of two");
    if (!is_power_of_two(block_size)) fail("block size " + std::to_string(block_size) + " is not a power of two");
    if (block_size > capacity) fail("block size exceeds capacity");
    if (!fully_associative()) {
      if (!is_power_of_two(ways)) fail("associativity must be a power of two or full");
      if (capacity % (block_size * ways) != 0)
        fail("capacity " + std::to_string(capacity) + " not divisible by block x ways");
    }
    if (instruction_width == 0 || block_size % instruction_width != 0)
      fail("block size is not a whole number of instructions");
  }

  bool operator==(const CacheConfig&) const = default;
};

inline CacheConfig with_capacity(CacheConfig config, std::uint64_t capacity) {
  config.capacity = capacity;
  return config;
}

struct AccessStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;

  std::uint64_t total() const noexcept { return hits + misses; }
  double hit_rate() const noexcept { return total() ? static_cast<double>(hits) / total() : 0.0; }
  double miss_rate() const noexcept { return total() ? static_cast<double>(misses) / total() : 0.0; }

  AccessStats& operator+=(const AccessStats& o) noexcept {
    hits += o.hits;
    misses += o.misses;
    return *this;
  }
  bool operator==(const AccessStats&) const = default;
};

struct LruPolicy {
  static constexpr bool promote_on_hit = true;
};
struct FifoPolicy {
  static constexpr bool promote_on_hit = false;
};

/// Set-associative block cache. Each set is a recency (LRU) or insertion (FIFO)
/// ordered list, front = newest; the victim is always the back.
template <class Policy>
class BlockCache {
 public:
  explicit BlockCache(const CacheConfig& config)
      : block_size_(config.block_size), ways_(config.effective_ways()), sets_(config.num_sets()) {
    config.validate();
    index_.reserve(config.num_blocks() * 2);
  }

  /// Returns true on hit.
  bool access(std::uint64_t address) {
    std::uint64_t block = address / block_size_;
    auto& set = sets_[block % sets_.size()];
    if (auto it = index_.find(block); it != index_.end()) {
      if constexpr (Policy::promote_on_hit) set.splice(set.begin(), set, it->second);
      ++stats_.hits;
      return true;
    }
    ++stats_.misses;
    if (set.size() == ways_) {
      index_.erase(set.back());
      set.pop_back();
    }
    set.push_front(block);
    index_.emplace(block, set.begin());
    return false;
  }

  const AccessStats& stats() const noexcept { return stats_; }

 private:
  std::uint64_t block_size_;
  std::uint64_t ways_;
  std::vector<std::list<std::uint64_t>> sets_;
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> index_;
  AccessStats stats_;
};

namespace detail {

template <class Policy>
AccessStats replay(const StaticProgram& program, const DynamicTrace& trace, const CacheConfig& config) {
  BlockCache<Policy> cache(config);
  const std::uint64_t base = program.base();
  const std::uint64_t width = program.instruction_width();
  for (const auto& run : trace.runs())
    for (std::uint64_t rep = 0; rep < run.repeat; ++rep)
      for (std::uint64_t i = run.first; i <= run.last; ++i) cache.access(base + i * width);
  return cache.stats();
}

}  // namespace detail

/// The instruction width is always taken from the program.
inline AccessStats simulate(const StaticProgram& program, const DynamicTrace& trace, CacheConfig config) {
  config.instruction_width = program.instruction_width();
  config.validate();
  trace.validate_against(program);
  return config.replacement == Replacement::lru ? detail::replay<LruPolicy>(program, trace, config)
                                                : detail::replay<FifoPolicy>(program, trace, config);
}

using SweepStats = std::map<std::uint64_t, AccessStats>;

/// Independent simulation per capacity; points run concurrently.
inline SweepStats simulate_sweep(const StaticProgram& program, const DynamicTrace& trace,
                                 const std::vector<std::uint64_t>& sizes, const CacheConfig& templ) {
  for (std::uint64_t size : sizes) {
    CacheConfig c = with_capacity(templ, size);
    c.instruction_width = program.instruction_width();
    c.validate();
  }
  std::vector<std::pair<std::uint64_t, std::future<AccessStats>>> jobs;
  for (std::uint64_t size : sizes)
    jobs.emplace_back(size, std::async(std::launch::async, [&, size] {
                        return simulate(program, trace, with_capacity(templ, size));
                      }));
  SweepStats out;
  for (auto& [size, job] : jobs) out[size] = job.get();
  return out;
}

inline void write_stats_csv(std::ostream& out, const SweepStats& stats, const CacheConfig& templ) {
  out << "size,ways,block,replacement,hits,misses,total\n";
  for (const auto& [size, s] : stats)
    out << size << ',' << templ.ways_label() << ',' << templ.block_size << ',' << to_string(templ.replacement)
        << ',' << s.hits << ',' << s.misses << ',' << s.total() << '\n';
}

}  // namespace icache_ci
