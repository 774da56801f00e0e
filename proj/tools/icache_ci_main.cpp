/* SPDX-License-Identifier: Apache-2.0 */

// icache-ci: custom-instruction impact on instruction-cache accesses, energy and sizing.
//
//   icache-ci run --synth straight-loop:256,100 --ci auto --sizes 1K,2K,4K --out out/
//   icache-ci verdicts --amat-fixture data/amat_fixture.txt --out out/
//
// Options may also come from a TOML/INI file passed with --config; command-line flags win.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "icache_ci/icache_ci.hpp"

using namespace icache_ci;

namespace {

std::set<OpcodeClass> parse_forbid(const std::string& text) {
  std::set<OpcodeClass> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item == "none") continue;
    auto c = opcode_class_from_name(item);
    if (!c) throw Error(ErrorKind::config, "unknown opcode class '" + item + "'");
    out.insert(*c);
  }
  return out;
}

void print_summary(const RunOutcome& out) {
  std::printf("code size %zu -> %zu instructions, %zu CI(s), trace %llu -> %llu fetches\n",
              out.rewrite.code_size_before, out.rewrite.code_size_after, out.selection.chosen.size(),
              static_cast<unsigned long long>(out.workload.trace.size()),
              static_cast<unsigned long long>(out.rewrite.trace.size()));
  std::printf("%8s %10s %10s %8s %8s %8s %10s\n", "size", "base_miss", "ext_miss", "acc_red%", "hit_red%",
              "miss_red%", "e_save%");
  for (const auto& row : out.report.rows) {
    auto red = reduction_stats(out.baseline.at(row.size), out.extended.at(row.size));
    std::printf("%8s %10llu %10llu %8.3f %8.3f %8.3f %10.3f\n", size_label(row.size).c_str(),
                static_cast<unsigned long long>(row.baseline.misses),
                static_cast<unsigned long long>(row.extended.misses), red.access_red_pct, red.hit_red_pct,
                red.miss_red_pct, row.energy_saving_pct);
  }
  std::size_t accepted = 0;
  for (const auto& v : out.report.verdicts) accepted += v.accepted;
  std::printf("%zu of %zu downsizing verdicts accepted\n", accepted, out.report.verdicts.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-cache impact of custom-instruction ISA extension"};
  app.set_config("--config", "", "TOML/INI file with default option values");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string program, trace, synth, ci = "auto", sizes = "1K,2K,4K,8K,16K,32K", ways = "2", repl = "lru";
  std::string energy_params, convention = "paper", forbid = "branch,load,store";
  double k_factor = 0;
  std::size_t max_len = 0, budget = 0;

  auto* run_cmd = app.add_subcommand("run", "simulate baseline vs extended ISA over a cache size sweep");
  run_cmd->add_option("--program", program, "static program file");
  run_cmd->add_option("--trace", trace, "dynamic trace file");
  run_cmd->add_option("--synth", synth, "generator: straight-loop:N,ITERS | hot-cold:H,C,R | uniform-random:N,E[,SEED]");
  run_cmd->add_option("--ci", ci, "auto | file=PATH | none")->capture_default_str();
  run_cmd->add_option("--sizes", sizes, "comma-separated capacities")->capture_default_str();
  run_cmd->add_option("--block", cfg.cache.block_size, "block size in bytes")->capture_default_str();
  run_cmd->add_option("--ways", ways, "associativity or 'full'")->capture_default_str();
  run_cmd->add_option("--repl", repl, "lru | fifo")->capture_default_str();
  run_cmd->add_option("--width", cfg.instruction_width, "bytes per instruction")->capture_default_str();
  run_cmd->add_option("--energy-params", energy_params, "per-size energy parameter file (default: built-in table)");
  run_cmd->add_option("--k-factor", k_factor, "miss/hit cost ratio (overrides the parameter file)");
  run_cmd->add_option("--amat-convention", convention, "paper | textbook")->capture_default_str();
  run_cmd->add_option("--max-len", max_len, "longest CI (default: instructions per block)");
  run_cmd->add_option("--max-inputs", cfg.constraints.max_inputs)->capture_default_str();
  run_cmd->add_option("--max-outputs", cfg.constraints.max_outputs)->capture_default_str();
  run_cmd->add_option("--forbid", forbid, "opcode classes kept out of CIs")->capture_default_str();
  run_cmd->add_option("--budget", budget, "maximum number of CIs (0 = unlimited)")->capture_default_str();
  run_cmd->add_option("--seed", cfg.seed, "seed for random generators")->capture_default_str();
  run_cmd->add_option("--out", cfg.out_dir, "output directory")->required();

  std::string fixture, verdict_out;
  auto* verdicts_cmd = app.add_subcommand("verdicts", "replay a published AMAT grid through the downsizing rule");
  verdicts_cmd->add_option("--amat-fixture", fixture, "AMAT fixture file")->required();
  verdicts_cmd->add_option("--out", verdict_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verdicts_cmd) {
      auto verdicts = run_fixture_verdicts(fixture, verdict_out);
      std::size_t accepted = 0;
      for (const auto& v : verdicts) accepted += v.verdict.accepted;
      std::printf("%zu verdicts, %zu accepted -> %s/verdicts.csv\n", verdicts.size(), accepted, verdict_out.c_str());
      return 0;
    }

    if (!program.empty()) cfg.program_path = program;
    if (!trace.empty()) cfg.trace_path = trace;
    if (!synth.empty()) cfg.synth = synth;
    if (ci == "auto") {
      cfg.ci_mode = CiMode::automatic;
    } else if (ci == "none") {
      cfg.ci_mode = CiMode::none;
    } else if (ci.starts_with("file=")) {
      cfg.ci_mode = CiMode::file;
      cfg.ci_file = ci.substr(5);
    } else {
      throw Error(ErrorKind::config, "--ci must be auto, none or file=PATH");
    }
    cfg.sizes = parse_size_list(sizes);
    cfg.cache.ways = ways == "full" ? CacheConfig::kFullyAssociative : static_cast<std::uint32_t>(std::stoul(ways));
    cfg.cache.replacement = parse_replacement(repl);
    if (!energy_params.empty()) cfg.energy_params_path = energy_params;
    if (run_cmd->count("--k-factor")) cfg.k_factor = k_factor;
    cfg.amat_convention = parse_amat_convention(convention);
    if (max_len) {
      cfg.constraints.max_len = max_len;
      cfg.max_len_explicit = true;
    }
    cfg.constraints.forbid_classes = parse_forbid(forbid);
    cfg.budget = budget == 0 ? kUnlimitedBudget : budget;

    auto out = run(cfg);
    for (const auto& w : out.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    print_summary(out);
    std::printf("reports written to %s\n", cfg.out_dir.c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "icache-ci: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "icache-ci: config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "icache-ci: pipeline error: %s\n", e.what());
    return 4;
  }
}
