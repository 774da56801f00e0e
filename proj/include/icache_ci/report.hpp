/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// CSV emission for run reports, and replay of a published AMAT grid through the
// downsizing rule.
//
// AMAT fixture format:
//
//   format v1
//   sizes 1K 2K 4K 8K 16K 32K
//   amat rawC no-ci   3.0188 0.238 0.2643 0.2662 0.2764 0.3056
//   amat rawC with-ci 2.4594 0.232 0.258  0.2595 0.2693 0.298

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "icache_ci/cache.hpp"
#include "icache_ci/ci.hpp"
#include "icache_ci/energy.hpp"
#include "icache_ci/error.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

inline constexpr int kReportFormatVersion = 1;

inline const std::vector<std::string>& reduction_csv_columns() {
  static const std::vector<std::string> cols = {
      "size", "ways", "block", "replacement", "base_hits", "base_misses", "base_total",
      "ext_hits", "ext_misses", "ext_total", "access_red_pct", "hit_red_pct", "miss_red_pct"};
  return cols;
}

inline const std::vector<std::string>& energy_csv_columns() {
  static const std::vector<std::string> cols = {
      "size", "ways", "block", "replacement", "k_factor", "hit_energy_nj", "hit_delay_ns", "miss_energy_nj",
      "miss_penalty_ns", "base_hits", "base_misses", "base_energy_nj", "base_amat_ns", "ext_hits", "ext_misses",
      "ext_energy_nj", "ext_amat_ns", "energy_saving_pct"};
  return cols;
}

inline const std::vector<std::string>& verdict_csv_columns() {
  static const std::vector<std::string> cols = {
      "baseline_size", "candidate_size", "ways", "block", "replacement", "amat_baseline_no_ci_ns",
      "amat_candidate_with_ci_ns", "accepted", "dyn_energy_reduction_pct"};
  return cols;
}

inline const std::vector<std::string>& fixture_verdict_csv_columns() {
  static const std::vector<std::string> cols = {"benchmark", "baseline_size", "candidate_size",
                                                "amat_baseline_no_ci", "amat_candidate_with_ci", "accepted"};
  return cols;
}

namespace detail {

inline void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

inline std::string geometry(const CacheConfig& c) {
  return c.ways_label() + "," + std::to_string(c.block_size) + "," + to_string(c.replacement);
}

}  // namespace detail

inline void write_reduction_csv(std::ostream& out, const SweepStats& base, const SweepStats& ext,
                                const CacheConfig& templ) {
  detail::write_header(out, reduction_csv_columns());
  for (const auto& [size, b] : base) {
    const auto& e = ext.at(size);
    auto red = reduction_stats(b, e);
    out << size << ',' << detail::geometry(templ) << ',' << b.hits << ',' << b.misses << ',' << b.total() << ','
        << e.hits << ',' << e.misses << ',' << e.total() << ',' << format_number(red.access_red_pct) << ','
        << format_number(red.hit_red_pct) << ',' << format_number(red.miss_red_pct) << '\n';
  }
}

inline void write_energy_csv(std::ostream& out, const SizingReport& report, const EnergyParams& params,
                             const CacheConfig& templ) {
  detail::write_header(out, energy_csv_columns());
  for (const auto& row : report.rows) {
    out << row.size << ',' << detail::geometry(templ) << ',' << format_number(params.k_factor) << ','
        << format_number(params.hit_energy(row.size)) << ',' << format_number(params.hit_delay(row.size)) << ','
        << format_number(params.miss_energy(row.size)) << ',' << format_number(params.miss_penalty(row.size)) << ','
        << row.baseline.hits << ',' << row.baseline.misses << ',' << format_number(row.baseline.total_energy_nj)
        << ',' << format_number(row.baseline.amat_ns) << ',' << row.extended.hits << ',' << row.extended.misses
        << ',' << format_number(row.extended.total_energy_nj) << ',' << format_number(row.extended.amat_ns) << ','
        << format_number(row.energy_saving_pct) << '\n';
  }
}

inline void write_verdicts_csv(std::ostream& out, const SizingReport& report, const CacheConfig& templ) {
  detail::write_header(out, verdict_csv_columns());
  for (const auto& v : report.verdicts) {
    out << v.baseline_size << ',' << v.candidate_size << ',' << detail::geometry(templ) << ','
        << format_number(v.amat_baseline_no_ci) << ',' << format_number(v.amat_candidate_with_ci) << ','
        << (v.accepted ? "accept" : "reject") << ',';
    if (v.dyn_energy_reduction_pct) out << format_number(*v.dyn_energy_reduction_pct);
    out << '\n';
  }
}

struct AmatFixture {
  struct Benchmark {
    std::string name;
    std::vector<std::optional<double>> no_ci;
    std::vector<std::optional<double>> with_ci;
  };
  std::vector<std::uint64_t> sizes;
  std::vector<Benchmark> benchmarks;  // file order

  const Benchmark* find(const std::string& name) const {
    auto it = std::find_if(benchmarks.begin(), benchmarks.end(), [&](const auto& b) { return b.name == name; });
    return it == benchmarks.end() ? nullptr : &*it;
  }
};

/// Cells may be `-` (missing); that is only an error once a verdict needs the cell.
inline AmatFixture parse_amat_fixture(std::istream& in) {
  AmatFixture fx;
  std::string text;
  std::size_t line_no = 0;
  bool seen = false;
  while (std::getline(in, text)) {
    ++line_no;
    auto tokens = tokenize_line(text);
    if (tokens.empty()) continue;
    if (detail::consume_format_line(tokens, seen, line_no)) {
      seen = true;
      continue;
    }
    seen = true;
    if (tokens[0] == "sizes") {
      if (!fx.sizes.empty()) throw Error(ErrorKind::fixture, "duplicate sizes line", line_no);
      for (std::size_t t = 1; t < tokens.size(); ++t) {
        try {
          fx.sizes.push_back(parse_size(tokens[t]));
        } catch (const Error& e) {
          throw Error(ErrorKind::fixture, e.detail(), line_no);
        }
      }
      if (fx.sizes.empty() || !std::is_sorted(fx.sizes.begin(), fx.sizes.end()))
        throw Error(ErrorKind::fixture, "sizes must be nonempty and ascending", line_no);
      continue;
    }
    if (tokens[0] != "amat" || tokens.size() < 3)
      throw Error(ErrorKind::fixture, "expected 'amat <benchmark> no-ci|with-ci <values...>'", line_no);
    if (fx.sizes.empty()) throw Error(ErrorKind::fixture, "'sizes' line must precede amat rows", line_no);
    std::string name(tokens[1]);
    bool with = tokens[2] == "with-ci";
    if (!with && tokens[2] != "no-ci") throw Error(ErrorKind::fixture, "variant must be no-ci or with-ci", line_no);
    if (tokens.size() - 3 > fx.sizes.size())
      throw Error(ErrorKind::fixture, "more values than sizes for " + name, line_no);
    std::vector<std::optional<double>> values(fx.sizes.size());
    for (std::size_t t = 3; t < tokens.size(); ++t) {
      if (tokens[t] == "-") continue;
      double v = 0;
      if (!parse_double(tokens[t], v)) throw Error(ErrorKind::fixture, "bad value '" + std::string(tokens[t]) + "'", line_no);
      values[t - 3] = v;
    }
    auto bench = std::find_if(fx.benchmarks.begin(), fx.benchmarks.end(), [&](const auto& b) { return b.name == name; });
    if (bench == fx.benchmarks.end()) bench = fx.benchmarks.insert(fx.benchmarks.end(), {name, {}, {}});
    auto& slot = with ? bench->with_ci : bench->no_ci;
    if (!slot.empty()) throw Error(ErrorKind::fixture, "duplicate row for " + name, line_no);
    slot = std::move(values);
  }
  return fx;
}

inline AmatFixture load_amat_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::fixture, "cannot open AMAT fixture '" + path + "'");
  return parse_amat_fixture(in);
}

struct FixtureVerdict {
  std::string benchmark;
  SizingVerdict verdict;
};

/// One verdict per (benchmark, baseline size, smaller candidate size).
inline std::vector<FixtureVerdict> fixture_verdicts(const AmatFixture& fx) {
  std::vector<FixtureVerdict> out;
  for (const auto& bench : fx.benchmarks) {
    auto cell = [&](bool with, std::size_t i) {
      const auto& row = with ? bench.with_ci : bench.no_ci;
      if (row.empty() || !row[i])
        throw Error(ErrorKind::fixture, "missing " + std::string(with ? "with-ci" : "no-ci") + " cell for " +
                                            bench.name + " at " + size_label(fx.sizes[i]));
      return *row[i];
    };
    for (std::size_t b = fx.sizes.size(); b-- > 0;)
      for (std::size_t c = b; c-- > 0;)
        out.push_back({bench.name, downsize_decision(cell(false, b), cell(true, c), fx.sizes[b], fx.sizes[c])});
  }
  return out;
}

inline void write_fixture_verdicts_csv(std::ostream& out, const std::vector<FixtureVerdict>& verdicts) {
  detail::write_header(out, fixture_verdict_csv_columns());
  for (const auto& [bench, v] : verdicts)
    out << bench << ',' << v.baseline_size << ',' << v.candidate_size << ',' << format_number(v.amat_baseline_no_ci)
        << ',' << format_number(v.amat_candidate_with_ci) << ',' << (v.accepted ? "accept" : "reject") << '\n';
}

}  // namespace icache_ci
