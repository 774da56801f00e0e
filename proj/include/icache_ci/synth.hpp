/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// Synthetic workloads with analytically known cache behaviour.
//
//   straight-loop:N,ITERS         N-instruction loop body run ITERS times
//   hot-cold:HOT,COLD,REPEATS     HOT-instruction kernel run REPEATS times, then COLD straight code once
//   uniform-random:N,EVENTS[,SEED] random program, uniformly random fetch indices
//
// `name(a,b,c)` is accepted as well as `name:a,b,c`.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "icache_ci/error.hpp"
#include "icache_ci/program.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

enum class GeneratorKind { straight_loop, hot_cold, uniform_random };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::straight_loop;
  std::vector<std::uint64_t> params;
  std::uint64_t seed = 0;

  std::string to_string() const {
    std::string out;
    switch (kind) {
      case GeneratorKind::straight_loop: out = "straight-loop:"; break;
      case GeneratorKind::hot_cold: out = "hot-cold:"; break;
      case GeneratorKind::uniform_random: out = "uniform-random:"; break;
    }
    for (std::size_t i = 0; i < params.size(); ++i) out += (i ? "," : "") + std::to_string(params[i]);
    if (kind == GeneratorKind::uniform_random) out += "," + std::to_string(seed);
    return out;
  }
};

struct Workload {
  StaticProgram program;
  DynamicTrace trace;
};

inline GeneratorSpec parse_generator_spec(std::string_view text, std::uint64_t default_seed = 0) {
  auto fail = [&](const std::string& why) -> GeneratorSpec {
    throw Error(ErrorKind::spec, "'" + std::string(text) + "': " + why);
  };
  std::size_t open = text.find_first_of(":(");
  if (open == std::string_view::npos) return fail("expected name:args");
  std::string_view name = text.substr(0, open);
  std::string_view args = text.substr(open + 1);
  if (text[open] == '(') {
    if (args.empty() || args.back() != ')') return fail("unbalanced parenthesis");
    args.remove_suffix(1);
  }

  GeneratorSpec spec;
  spec.seed = default_seed;
  if (name == "straight-loop")
    spec.kind = GeneratorKind::straight_loop;
  else if (name == "hot-cold")
    spec.kind = GeneratorKind::hot_cold;
  else if (name == "uniform-random")
    spec.kind = GeneratorKind::uniform_random;
  else
    return fail("unknown generator");

  std::size_t pos = 0;
  while (pos <= args.size()) {
    std::size_t comma = args.find(',', pos);
    if (comma == std::string_view::npos) comma = args.size();
    std::string_view item = args.substr(pos, comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    if (item.starts_with("seed=")) item.remove_prefix(5);
    std::uint64_t v = 0;
    if (!parse_uint(item, v)) return fail("bad argument '" + std::string(item) + "'");
    spec.params.push_back(v);
    pos = comma + 1;
  }

  std::size_t want = spec.kind == GeneratorKind::straight_loop ? 2 : 3;
  if (spec.kind == GeneratorKind::uniform_random && spec.params.size() == 2) {
    // seed comes from the run config
  } else if (spec.params.size() != want) {
    return fail("expected " + std::to_string(want) + " arguments");
  }
  if (spec.kind == GeneratorKind::uniform_random && spec.params.size() == 3) {
    spec.seed = spec.params.back();
    spec.params.pop_back();
  }
  for (std::uint64_t p : spec.params)
    if (p == 0) return fail("sizes must be positive");
  return spec;
}

namespace detail {

// Dependence chain: each instruction reads its predecessor's result plus r1, so every
// window has exactly two external inputs and at most one live-out.
inline InstructionRecord chain_instruction(std::uint32_t i, std::uint32_t chain_pos) {
  InstructionRecord rec;
  rec.index = i;
  rec.mnemonic = "add";
  rec.dst = static_cast<Reg>(8 + chain_pos % 16);
  if (chain_pos == 0)
    rec.srcs = {1, 2};
  else
    rec.srcs = {static_cast<Reg>(8 + (chain_pos - 1) % 16), 1};
  return rec;
}

inline InstructionRecord cold_instruction(std::uint32_t i) {
  InstructionRecord rec;
  rec.index = i;
  switch (i % 4) {
    case 0: rec.mnemonic = "ld"; rec.dst = 3; rec.srcs = {29}; break;
    case 1: rec.mnemonic = "add"; rec.dst = 4; rec.srcs = {3, 5}; break;
    case 2: rec.mnemonic = "st"; rec.srcs = {4, 29}; break;
    default: rec.mnemonic = "br"; rec.srcs = {4}; break;
  }
  rec.opcode_class = classify_mnemonic(rec.mnemonic);
  return rec;
}

}  // namespace detail

inline Workload synth_trace(const GeneratorSpec& spec) {
  for (std::uint64_t p : spec.params)
    if (p == 0) throw Error(ErrorKind::spec, "sizes must be positive");
  if (spec.params.size() < 2) throw Error(ErrorKind::spec, "missing generator arguments");

  std::vector<InstructionRecord> records;
  std::vector<TraceRun> runs;
  switch (spec.kind) {
    case GeneratorKind::straight_loop: {
      auto n = static_cast<std::uint32_t>(spec.params[0]);
      for (std::uint32_t i = 0; i < n; ++i) records.push_back(detail::chain_instruction(i, i));
      runs.push_back({0, n - 1, spec.params[1]});
      break;
    }
    case GeneratorKind::hot_cold: {
      if (spec.params.size() != 3) throw Error(ErrorKind::spec, "hot-cold needs 3 arguments");
      auto hot = static_cast<std::uint32_t>(spec.params[0]);
      auto cold = static_cast<std::uint32_t>(spec.params[1]);
      for (std::uint32_t i = 0; i < hot; ++i) records.push_back(detail::chain_instruction(i, i));
      for (std::uint32_t i = hot; i < hot + cold; ++i) records.push_back(detail::cold_instruction(i));
      runs.push_back({0, hot - 1, spec.params[2]});
      runs.push_back({hot, hot + cold - 1, 1});
      break;
    }
    case GeneratorKind::uniform_random: {
      auto n = static_cast<std::uint32_t>(spec.params[0]);
      std::uint64_t events = spec.params[1];
      std::mt19937_64 rng(spec.seed);
      for (std::uint32_t i = 0; i < n; ++i) {
        InstructionRecord rec;
        rec.index = i;
        static constexpr const char* mnemonics[] = {"add", "sub", "and", "or", "ld", "st", "br"};
        rec.mnemonic = mnemonics[rng() % 7];
        rec.opcode_class = classify_mnemonic(rec.mnemonic);
        if (rec.opcode_class != OpcodeClass::store && rec.opcode_class != OpcodeClass::branch)
          rec.dst = static_cast<Reg>(rng() % kNumRegisters);
        std::size_t nsrc = rec.opcode_class == OpcodeClass::load || rec.opcode_class == OpcodeClass::branch ? 1 : 2;
        for (std::size_t s = 0; s < nsrc; ++s) rec.srcs.push_back(static_cast<Reg>(rng() % kNumRegisters));
        records.push_back(std::move(rec));
      }
      std::vector<std::uint32_t> trace(events);
      for (auto& e : trace) e = static_cast<std::uint32_t>(rng() % n);
      return {StaticProgram(std::move(records)), DynamicTrace::from_events(trace)};
    }
  }
  return {StaticProgram(std::move(records)), DynamicTrace(std::move(runs))};
}

inline Workload synth_trace(std::string_view spec_text, std::uint64_t default_seed = 0) {
  return synth_trace(parse_generator_spec(spec_text, default_seed));
}

}  // namespace icache_ci
