/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// identify -> select -> substitute -> simulate -> energy -> advise, over a size sweep.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "icache_ci/cache.hpp"
#include "icache_ci/ci.hpp"
#include "icache_ci/energy.hpp"
#include "icache_ci/error.hpp"
#include "icache_ci/program.hpp"
#include "icache_ci/report.hpp"
#include "icache_ci/synth.hpp"

namespace icache_ci {

enum class CiMode { automatic, file, none };

inline const char* to_string(CiMode m) {
  switch (m) {
    case CiMode::automatic: return "auto";
    case CiMode::file: return "file";
    case CiMode::none: return "none";
  }
  return "?";
}

struct RunConfig {
  std::optional<std::string> program_path;
  std::optional<std::string> trace_path;
  std::optional<std::string> synth;
  std::uint64_t seed = 0;
  std::uint32_t instruction_width = StaticProgram::kDefaultWidth;
  std::uint64_t base_address = 0;

  CiMode ci_mode = CiMode::automatic;
  std::string ci_file;
  CiConstraints constraints;
  bool max_len_explicit = false;  // otherwise max_len = instructions per block
  std::size_t budget = kUnlimitedBudget;

  CacheConfig cache;  // capacity is overridden per sweep point
  std::vector<std::uint64_t> sizes = {1024, 2048, 4096, 8192, 16384, 32768};

  std::optional<std::string> energy_params_path;
  std::optional<double> k_factor;
  AmatConvention amat_convention = AmatConvention::paper;

  std::string out_dir;

  void validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorKind::config, why); };
    bool files = program_path || trace_path;
    if (files && synth) fail("give either --program/--trace or --synth, not both");
    if (!files && !synth) fail("no workload: give --program and --trace, or --synth");
    if (files && (!program_path || !trace_path)) fail("--program and --trace must be given together");
    if (sizes.empty()) fail("size list is empty");
    for (std::uint64_t s : sizes) {
      CacheConfig c = with_capacity(cache, s);
      c.instruction_width = instruction_width;
      c.validate();
    }
    if (ci_mode == CiMode::file && ci_file.empty()) fail("--ci file= needs a path");
    if (max_len_explicit && constraints.max_len < 2) fail("max_len must be at least 2");
    if (instruction_width == 0) fail("instruction width must be positive");
    if (out_dir.empty()) fail("no output directory");
  }
};

struct RunOutcome {
  Workload workload;
  CiConstraints constraints;  // as applied
  CiSelection selection;
  RewriteResult rewrite;
  SweepStats baseline;
  SweepStats extended;
  EnergyParams params;
  SizingReport report;
  std::vector<std::string> warnings;
};

namespace detail {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.detail(), e.line());
  }
}

}  // namespace detail

inline RunOutcome run_pipeline(const RunConfig& config) {
  detail::stage("config", [&] { config.validate(); });
  RunOutcome out;

  out.workload = detail::stage("load", [&] {
    if (config.synth) {
      auto spec = parse_generator_spec(*config.synth, config.seed);
      auto w = synth_trace(spec);
      if (config.instruction_width != w.program.instruction_width() || config.base_address != 0) {
        std::vector<InstructionRecord> recs(w.program.instructions().begin(), w.program.instructions().end());
        w.program = StaticProgram(std::move(recs), config.instruction_width, config.base_address);
      }
      return w;
    }
    Workload w;
    w.program = load_program(*config.program_path, config.instruction_width, config.base_address);
    w.trace = load_trace(*config.trace_path, w.program);
    return w;
  });
  const auto& program = out.workload.program;
  const auto& trace = out.workload.trace;

  out.constraints = config.constraints;
  if (!config.max_len_explicit) {
    CacheConfig c = config.cache;
    c.instruction_width = program.instruction_width();
    out.constraints.max_len = std::max<std::uint64_t>(2, c.block_instructions());
  }

  out.selection = detail::stage("identify", [&] {
    switch (config.ci_mode) {
      case CiMode::none: return CiSelection{};
      case CiMode::file: return load_selection(config.ci_file);
      case CiMode::automatic:
        if (trace.empty()) return CiSelection{};
        return greedy_select(enumerate_candidates(program, trace, out.constraints), config.budget);
    }
    return CiSelection{};
  });

  out.rewrite = detail::stage("substitute", [&] { return substitute(program, trace, out.selection); });

  detail::stage("simulate", [&] {
    out.baseline = simulate_sweep(program, trace, config.sizes, config.cache);
    out.extended = simulate_sweep(out.rewrite.program, out.rewrite.trace, config.sizes, config.cache);
  });

  detail::stage("energy", [&] {
    out.params = config.energy_params_path ? load_energy_params(*config.energy_params_path) : table1_defaults();
    if (config.k_factor) out.params.k_factor = *config.k_factor;
    out.params.convention = config.amat_convention;
    out.params.validate();
    out.warnings = out.params.warnings();
    for (std::uint64_t s : config.sizes) (void)out.params.at(s);
    out.report = sweep_report(out.baseline, out.extended, out.params);
  });
  return out;
}

inline nlohmann::json provenance_json(const RunConfig& config, const RunOutcome& out) {
  using nlohmann::json;
  json j;
  j["format_version"] = kReportFormatVersion;
  j["tool"] = "icache-ci";

  json workload;
  if (config.synth) {
    workload["source"] = "synth";
    workload["generator"] = parse_generator_spec(*config.synth, config.seed).to_string();
  } else {
    workload["source"] = "files";
    workload["program"] = *config.program_path;
    workload["trace"] = *config.trace_path;
  }
  workload["seed"] = config.seed;
  workload["instruction_width"] = out.workload.program.instruction_width();
  workload["base_address"] = out.workload.program.base();
  workload["code_size_before"] = out.rewrite.code_size_before;
  workload["code_size_after"] = out.rewrite.code_size_after;
  workload["trace_events_before"] = out.workload.trace.size();
  workload["trace_events_after"] = out.rewrite.trace.size();
  j["workload"] = workload;

  json ci;
  ci["mode"] = to_string(config.ci_mode);
  if (config.ci_mode == CiMode::file) ci["file"] = config.ci_file;
  ci["max_len"] = out.constraints.max_len;
  ci["max_inputs"] = out.constraints.max_inputs;
  ci["max_outputs"] = out.constraints.max_outputs;
  json forbid = json::array();
  for (auto c : out.constraints.forbid_classes) forbid.push_back(to_string(c));
  ci["forbid_classes"] = forbid;
  ci["budget"] = config.budget == kUnlimitedBudget ? json(nullptr) : json(config.budget);
  json chosen = json::array();
  for (std::size_t id = 0; id < out.selection.chosen.size(); ++id) {
    const auto& c = out.selection.chosen[id];
    chosen.push_back({{"id", id}, {"start", c.start_index}, {"len", c.length}, {"inputs", c.ext_inputs},
                      {"outputs", c.ext_outputs}, {"execs", c.exec_count}, {"merit", c.merit()}});
  }
  ci["selection"] = chosen;
  j["ci"] = ci;

  j["cache"] = {{"block", config.cache.block_size},
                {"ways", config.cache.ways_label()},
                {"replacement", to_string(config.cache.replacement)},
                {"sizes", config.sizes}};

  json table = json::array();
  for (const auto& [size, p] : out.params.per_size)
    table.push_back({{"size", size}, {"hit_energy_nj", p.hit_energy_nj}, {"hit_delay_ns", p.hit_delay_ns}});
  j["energy"] = {{"label", out.params.label},
                 {"source", config.energy_params_path ? *config.energy_params_path : std::string("built-in")},
                 {"k_factor", out.params.k_factor},
                 {"amat_convention", to_string(out.params.convention)},
                 {"table", table}};

  auto stats_json = [](const SweepStats& s) {
    json a = json::array();
    for (const auto& [size, st] : s)
      a.push_back({{"size", size}, {"hits", st.hits}, {"misses", st.misses}, {"total", st.total()}});
    return a;
  };
  j["stats"] = {{"baseline", stats_json(out.baseline)}, {"extended", stats_json(out.extended)}};
  j["csv_schemas"] = {{"reduction.csv", reduction_csv_columns()},
                      {"energy.csv", energy_csv_columns()},
                      {"verdicts.csv", verdict_csv_columns()}};
  j["warnings"] = out.warnings;
  return j;
}

inline void write_reports(const RunConfig& config, const RunOutcome& out) {
  detail::stage("report", [&] {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw Error(ErrorKind::report, "cannot create output directory '" + config.out_dir + "'");
    auto open = [&](const char* name) {
      std::ofstream f(fs::path(config.out_dir) / name);
      if (!f) throw Error(ErrorKind::report, std::string("cannot write ") + name);
      return f;
    };
    CacheConfig templ = config.cache;
    {
      auto f = open("reduction.csv");
      write_reduction_csv(f, out.baseline, out.extended, templ);
    }
    {
      auto f = open("energy.csv");
      write_energy_csv(f, out.report, out.params, templ);
    }
    {
      auto f = open("verdicts.csv");
      write_verdicts_csv(f, out.report, templ);
    }
    {
      auto f = open("stats_baseline.csv");
      write_stats_csv(f, out.baseline, templ);
    }
    {
      auto f = open("stats_extended.csv");
      write_stats_csv(f, out.extended, templ);
    }
    {
      auto f = open("ci_selection.txt");
      write_selection(f, out.selection);
    }
    {
      auto f = open("run.json");
      f << provenance_json(config, out).dump(2) << '\n';
    }
  });
}

inline RunOutcome run(const RunConfig& config) {
  auto out = run_pipeline(config);
  write_reports(config, out);
  return out;
}

/// Process exit code for an error: 2 config, 3 data, 4 pipeline.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::spec: return 2;
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::integrity:
    case ErrorKind::parameter:
    case ErrorKind::fixture: return 3;
    case ErrorKind::substitution:
    case ErrorKind::report: return 4;
  }
  return 4;
}

inline std::vector<FixtureVerdict> run_fixture_verdicts(const std::string& fixture_path, const std::string& out_dir) {
  auto verdicts = detail::stage("fixture", [&] { return fixture_verdicts(load_amat_fixture(fixture_path)); });
  detail::stage("report", [&] {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream f(std::filesystem::path(out_dir) / "verdicts.csv");
    if (ec || !f) throw Error(ErrorKind::report, "cannot write verdicts.csv in '" + out_dir + "'");
    write_fixture_verdicts_csv(f, verdicts);
  });
  return verdicts;
}

}  // namespace icache_ci
