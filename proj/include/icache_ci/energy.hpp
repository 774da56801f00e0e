/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// Access-driven cache energy, average memory access time and the downsizing rule.
//
// A miss costs k_factor times a hit, in both energy and time. The RAM access, stall
// and block-fill components of a miss are not modelled separately.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "icache_ci/cache.hpp"
#include "icache_ci/error.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

enum class AmatConvention {
  paper,     // hit_rate * hit_delay + miss_rate * miss_penalty
  textbook,  // hit_delay + miss_rate * miss_penalty
};

inline AmatConvention parse_amat_convention(std::string_view s) {
  if (s == "paper") return AmatConvention::paper;
  if (s == "textbook") return AmatConvention::textbook;
  throw Error(ErrorKind::config, "unknown AMAT convention '" + std::string(s) + "'");
}

inline const char* to_string(AmatConvention c) { return c == AmatConvention::paper ? "paper" : "textbook"; }

struct SizeParams {
  double hit_energy_nj = 0;
  double hit_delay_ns = 0;
  bool operator==(const SizeParams&) const = default;
};

struct EnergyParams {
  static constexpr double kDefaultKFactor = 100.0;

  std::map<std::uint64_t, SizeParams> per_size;
  double k_factor = kDefaultKFactor;
  AmatConvention convention = AmatConvention::paper;
  std::string label = "custom";

  const SizeParams& at(std::uint64_t size) const {
    auto it = per_size.find(size);
    if (it == per_size.end())
      throw Error(ErrorKind::parameter, "no energy parameters for cache size " + size_label(size));
    return it->second;
  }
  double hit_energy(std::uint64_t size) const { return at(size).hit_energy_nj; }
  double hit_delay(std::uint64_t size) const { return at(size).hit_delay_ns; }
  double miss_energy(std::uint64_t size) const { return k_factor * at(size).hit_energy_nj; }
  double miss_penalty(std::uint64_t size) const { return k_factor * at(size).hit_delay_ns; }

  void validate() const {
    if (!(k_factor > 0)) throw Error(ErrorKind::parameter, "k_factor must be positive");
    for (const auto& [size, p] : per_size)
      if (!(p.hit_energy_nj > 0) || !(p.hit_delay_ns > 0))
        throw Error(ErrorKind::parameter, "non-positive energy or delay for size " + size_label(size));
  }

  /// Non-fatal findings, e.g. a k_factor outside the cited 50-200 range.
  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (k_factor < 50 || k_factor > 200)
      out.push_back("k_factor " + format_number(k_factor) + " outside the typical 50-200 range");
    return out;
  }
};

/// 45 nm, CACTI-derived per-size hit energy and hit delay, 1 KB to 32 KB.
inline EnergyParams table1_defaults() {
  EnergyParams p;
  p.label = "45 nm / CACTI-derived";
  p.per_size = {
      {1024, {0.00516, 0.295112}},    {2 * 1024, {0.005368, 0.295543}},  {4 * 1024, {0.008101, 0.33874}},
      {8 * 1024, {0.008965, 0.347022}}, {16 * 1024, {0.012822, 0.366523}}, {32 * 1024, {0.019736, 0.406605}},
  };
  return p;
}

struct EnergyResult {
  std::uint64_t size = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double total_energy_nj = 0;
  double amat_ns = 0;
};

inline double amat(const AccessStats& stats, std::uint64_t size, const EnergyParams& params) {
  if (stats.total() == 0) return 0.0;
  double base = params.convention == AmatConvention::paper ? stats.hit_rate() : 1.0;
  return base * params.hit_delay(size) + stats.miss_rate() * params.miss_penalty(size);
}

inline EnergyResult energy(const AccessStats& stats, std::uint64_t size, const EnergyParams& params) {
  EnergyResult r;
  r.size = size;
  r.hits = stats.hits;
  r.misses = stats.misses;
  r.total_energy_nj = static_cast<double>(stats.hits) * params.hit_energy(size) +
                      static_cast<double>(stats.misses) * params.miss_energy(size);
  r.amat_ns = amat(stats, size, params);
  return r;
}

struct SizingVerdict {
  std::uint64_t baseline_size = 0;
  std::uint64_t candidate_size = 0;
  double amat_baseline_no_ci = 0;
  double amat_candidate_with_ci = 0;
  bool accepted = false;
  std::optional<double> dyn_energy_reduction_pct;
};

/// A smaller cache is acceptable when the extended program's AMAT on it does not exceed
/// the unextended program's AMAT on the baseline cache. Ties accept.
inline SizingVerdict downsize_decision(double amat_no_ci_at_baseline, double amat_with_ci_at_candidate,
                                       std::uint64_t baseline_size, std::uint64_t candidate_size) {
  SizingVerdict v;
  v.baseline_size = baseline_size;
  v.candidate_size = candidate_size;
  v.amat_baseline_no_ci = amat_no_ci_at_baseline;
  v.amat_candidate_with_ci = amat_with_ci_at_candidate;
  v.accepted = amat_with_ci_at_candidate <= amat_no_ci_at_baseline;
  return v;
}

/// 100 * (1 - E_small / E_large). Negative when the small cache costs more.
inline double dyn_energy_reduction(const EnergyResult& small, const EnergyResult& large) {
  if (large.total_energy_nj == 0)
    throw Error(ErrorKind::report, "dynamic energy reduction undefined: reference energy is zero");
  return 100.0 * (1.0 - small.total_energy_nj / large.total_energy_nj);
}

struct SizeRow {
  std::uint64_t size = 0;
  EnergyResult baseline;
  EnergyResult extended;
  double energy_saving_pct = 0;  // same size, extended vs baseline
};

struct SizingReport {
  std::vector<SizeRow> rows;
  std::vector<SizingVerdict> verdicts;  // every (baseline, smaller candidate) pair
};

inline SizingReport sweep_report(const SweepStats& baseline, const SweepStats& extended, const EnergyParams& params) {
  if (baseline.size() != extended.size())
    throw Error(ErrorKind::report, "baseline and extended sweeps cover different size lists");
  for (auto b = baseline.begin(), e = extended.begin(); b != baseline.end(); ++b, ++e)
    if (b->first != e->first) throw Error(ErrorKind::report, "baseline and extended sweeps cover different size lists");

  SizingReport report;
  std::map<std::uint64_t, EnergyResult> base_e, ext_e;
  for (const auto& [size, stats] : baseline) {
    SizeRow row;
    row.size = size;
    row.baseline = base_e[size] = energy(stats, size, params);
    row.extended = ext_e[size] = energy(extended.at(size), size, params);
    row.energy_saving_pct = row.baseline.total_energy_nj == 0
                                ? 0.0
                                : 100.0 * (1.0 - row.extended.total_energy_nj / row.baseline.total_energy_nj);
    report.rows.push_back(row);
  }
  for (auto it = base_e.rbegin(); it != base_e.rend(); ++it) {
    std::uint64_t large = it->first;
    for (auto c = ext_e.rbegin(); c != ext_e.rend(); ++c) {
      std::uint64_t small = c->first;
      if (small >= large) continue;
      auto v = downsize_decision(it->second.amat_ns, c->second.amat_ns, large, small);
      if (v.accepted && ext_e[large].total_energy_nj > 0)
        v.dyn_energy_reduction_pct = dyn_energy_reduction(c->second, ext_e[large]);
      report.verdicts.push_back(v);
    }
  }
  return report;
}

// Parameter file: `size=<cap> hit_energy_nj=<v> hit_delay_ns=<v>` lines and `k_factor=<v>`.

inline EnergyParams parse_energy_params(std::istream& in) {
  EnergyParams p;
  p.label = "user table";
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    auto tokens = tokenize_line(text);
    if (tokens.empty()) continue;
    std::map<std::string_view, std::string_view> kv;
    for (auto tok : tokens) {
      auto eq = tok.find('=');
      if (eq == std::string_view::npos) throw Error(ErrorKind::parse, "expected key=value, got '" + std::string(tok) + "'", line_no);
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto number = [&](std::string_view key) {
      double v = 0;
      if (!kv.contains(key) || !parse_double(kv[key], v))
        throw Error(ErrorKind::parse, "missing or bad '" + std::string(key) + "'", line_no);
      return v;
    };
    if (kv.contains("k_factor") && kv.size() == 1) {
      p.k_factor = number("k_factor");
      continue;
    }
    if (!kv.contains("size")) throw Error(ErrorKind::parse, "expected size= or k_factor= line", line_no);
    std::uint64_t size = 0;
    try {
      size = parse_size(kv["size"]);
    } catch (const Error& e) {
      throw Error(ErrorKind::parse, e.detail(), line_no);
    }
    if (p.per_size.contains(size)) throw Error(ErrorKind::parameter, "duplicate size " + size_label(size), line_no);
    p.per_size[size] = {number("hit_energy_nj"), number("hit_delay_ns")};
  }
  p.validate();
  return p;
}

inline EnergyParams load_energy_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parameter, "cannot open energy parameter file '" + path + "'");
  return parse_energy_params(in);
}

inline void write_energy_params(std::ostream& out, const EnergyParams& p) {
  out << "k_factor=" << format_number(p.k_factor) << '\n';
  for (const auto& [size, sp] : p.per_size) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "size=%s hit_energy_nj=%.17g hit_delay_ns=%.17g\n", size_label(size).c_str(),
                  sp.hit_energy_nj, sp.hit_delay_ns);
    out << buf;
  }
}

}  // namespace icache_ci
