/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// Custom-instruction candidates over contiguous static sequences, greedy selection,
// and the program/trace rewrite that models the extended ISA.

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icache_ci/cache.hpp"
#include "icache_ci/error.hpp"
#include "icache_ci/program.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

struct CiConstraints {
  std::size_t max_len = 8;
  std::size_t max_inputs = 2;   // two read ports
  std::size_t max_outputs = 1;  // one write port
  std::set<OpcodeClass> forbid_classes = {OpcodeClass::branch, OpcodeClass::load, OpcodeClass::store};
};

struct CiCandidate {
  std::uint32_t start_index = 0;
  std::uint32_t length = 0;
  std::uint32_t ext_inputs = 0;
  std::uint32_t ext_outputs = 0;
  std::uint64_t exec_count = 0;

  std::uint32_t end_index() const noexcept { return start_index + length; }
  /// Fetches saved over the whole trace.
  std::uint64_t merit() const noexcept { return length ? exec_count * (length - 1) : 0; }
  bool overlaps(const CiCandidate& o) const noexcept {
    return start_index < o.end_index() && o.start_index < end_index();
  }
  bool operator==(const CiCandidate&) const = default;
};

struct CiSelection {
  std::vector<CiCandidate> chosen;  // position = CI id

  std::uint64_t saved_instructions() const {
    std::uint64_t s = 0;
    for (const auto& c : chosen) s += c.length - 1;
    return s;
  }
  bool operator==(const CiSelection&) const = default;
};

struct RewriteResult {
  StaticProgram program;
  DynamicTrace trace;
  std::vector<std::uint32_t> index_map;  // old static index -> new static index
  std::size_t code_size_before = 0;
  std::size_t code_size_after = 0;
};

/// Register dataflow of one window.
struct WindowDataflow {
  std::bitset<kNumRegisters> inputs;   // read before any in-window write
  std::bitset<kNumRegisters> outputs;  // written, and the next static reference after the window is a read
};

namespace detail {

enum class RefKind : std::uint8_t { none, read, write };

/// next_ref[e][r]: kind of the first reference to r in instructions [e, n).
inline std::vector<std::array<RefKind, kNumRegisters>> next_references(const StaticProgram& program) {
  std::vector<std::array<RefKind, kNumRegisters>> next(program.size() + 1);
  next[program.size()].fill(RefKind::none);
  for (std::size_t e = program.size(); e-- > 0;) {
    next[e] = next[e + 1];
    const auto& rec = program[e];
    if (rec.dst) next[e][*rec.dst] = RefKind::write;
    for (Reg s : rec.srcs) next[e][s] = RefKind::read;  // read happens before the write
  }
  return next;
}

inline WindowDataflow window_dataflow(const StaticProgram& program, std::size_t start, std::size_t len,
                                      const std::array<RefKind, kNumRegisters>& after) {
  WindowDataflow flow;
  std::bitset<kNumRegisters> written;
  for (std::size_t i = start; i < start + len; ++i) {
    const auto& rec = program[i];
    for (Reg s : rec.srcs)
      if (!written[s]) flow.inputs.set(s);
    if (rec.dst) written.set(*rec.dst);
  }
  for (unsigned r = 0; r < kNumRegisters; ++r)
    if (written[r] && after[r] == RefKind::read) flow.outputs.set(r);
  return flow;
}

}  // namespace detail

inline WindowDataflow window_dataflow(const StaticProgram& program, std::size_t start, std::size_t len) {
  if (start + len > program.size()) throw Error(ErrorKind::validation, "window exceeds program");
  auto next = detail::next_references(program);
  return detail::window_dataflow(program, start, len, next[start + len]);
}

/// Every contiguous window of length 2..max_len that is always executed whole, has at
/// least one execution, avoids forbidden classes and fits the port constraints.
/// Sorted by (start, length).
inline std::vector<CiCandidate> enumerate_candidates(const StaticProgram& program, const DynamicTrace& trace,
                                                     const CiConstraints& constraints) {
  if (constraints.max_len < 2) throw Error(ErrorKind::config, "max_len must be at least 2");
  if (trace.empty()) throw Error(ErrorKind::config, "candidate enumeration needs a nonempty trace");
  trace.validate_against(program);

  const std::size_t n = program.size();
  std::vector<std::uint64_t> count(n, 0);
  // follows[i]: every occurrence of i is immediately followed by i+1.
  // preceded[i]: every occurrence of i is immediately preceded by i-1.
  std::vector<char> follows(n, 1), preceded(n, 1);
  {
    auto events = trace.expand();
    for (std::size_t p = 0; p < events.size(); ++p) {
      std::uint32_t e = events[p];
      ++count[e];
      if (p + 1 >= events.size() || events[p + 1] != e + 1) follows[e] = 0;
      if (p == 0 || e == 0 || events[p - 1] != e - 1) preceded[e] = 0;
    }
  }

  auto next = detail::next_references(program);
  std::vector<CiCandidate> out;
  for (std::size_t k = 0; k < n; ++k) {
    if (count[k] == 0 || constraints.forbid_classes.contains(program[k].opcode_class)) continue;
    for (std::size_t len = 2; len <= constraints.max_len && k + len <= n; ++len) {
      std::size_t last = k + len - 1;
      // Extending the window only adds constraints, so stop at the first failure of these.
      if (!follows[last - 1] || !preceded[last]) break;
      if (constraints.forbid_classes.contains(program[last].opcode_class)) break;
      auto flow = detail::window_dataflow(program, k, len, next[k + len]);
      if (flow.inputs.count() > constraints.max_inputs || flow.outputs.count() > constraints.max_outputs)
        continue;
      out.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(len),
                     static_cast<std::uint32_t>(flow.inputs.count()),
                     static_cast<std::uint32_t>(flow.outputs.count()), count[k]});
    }
  }
  return out;
}

inline constexpr std::size_t kUnlimitedBudget = std::numeric_limits<std::size_t>::max();

/// Highest merit first; ties go to the lower start index, then the longer length.
inline CiSelection greedy_select(std::vector<CiCandidate> candidates, std::size_t budget = kUnlimitedBudget) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const CiCandidate& a, const CiCandidate& b) {
    if (a.merit() != b.merit()) return a.merit() > b.merit();
    if (a.start_index != b.start_index) return a.start_index < b.start_index;
    return a.length > b.length;
  });
  CiSelection sel;
  for (const auto& c : candidates) {
    if (sel.chosen.size() >= budget) break;
    bool clash = std::any_of(sel.chosen.begin(), sel.chosen.end(), [&](const auto& s) { return s.overlaps(c); });
    if (!clash) sel.chosen.push_back(c);
  }
  return sel;
}

inline void validate_selection(const CiSelection& selection, const StaticProgram& program) {
  for (std::size_t a = 0; a < selection.chosen.size(); ++a) {
    const auto& c = selection.chosen[a];
    if (c.length < 2)
      throw Error(ErrorKind::validation, "CI " + std::to_string(a) + " has length < 2");
    if (c.end_index() > program.size())
      throw Error(ErrorKind::validation, "CI " + std::to_string(a) + " exceeds the program");
    for (std::size_t b = a + 1; b < selection.chosen.size(); ++b)
      if (c.overlaps(selection.chosen[b]))
        throw Error(ErrorKind::validation,
                    "CI " + std::to_string(a) + " overlaps CI " + std::to_string(b));
  }
}

/// Collapses each chosen range to one custom record and remaps the trace so that each
/// execution of a CI is a single fetch.
inline RewriteResult substitute(const StaticProgram& program, const DynamicTrace& trace,
                                const CiSelection& selection) {
  validate_selection(selection, program);
  trace.validate_against(program);

  const std::size_t n = program.size();
  std::vector<int> owner(n, -1);
  for (std::size_t id = 0; id < selection.chosen.size(); ++id)
    for (std::uint32_t i = selection.chosen[id].start_index; i < selection.chosen[id].end_index(); ++i)
      owner[i] = static_cast<int>(id);

  auto next = detail::next_references(program);
  RewriteResult result;
  result.code_size_before = n;
  result.index_map.resize(n);
  std::vector<InstructionRecord> records;
  for (std::size_t i = 0; i < n;) {
    auto new_index = static_cast<std::uint32_t>(records.size());
    if (owner[i] < 0) {
      InstructionRecord rec = program[i];
      rec.index = new_index;
      records.push_back(std::move(rec));
      result.index_map[i] = new_index;
      ++i;
      continue;
    }
    const auto id = static_cast<std::uint32_t>(owner[i]);
    const auto& c = selection.chosen[id];
    auto flow = detail::window_dataflow(program, c.start_index, c.length, next[c.end_index()]);
    InstructionRecord rec;
    rec.index = new_index;
    rec.opcode_class = OpcodeClass::custom;
    rec.mnemonic = "ci" + std::to_string(id);
    rec.ci_id = id;
    for (unsigned r = 0; r < kNumRegisters; ++r) {
      if (flow.inputs[r]) rec.srcs.push_back(static_cast<Reg>(r));
      if (flow.outputs[r] && !rec.dst) rec.dst = static_cast<Reg>(r);
    }
    records.push_back(std::move(rec));
    for (std::uint32_t k = c.start_index; k < c.end_index(); ++k) result.index_map[k] = new_index;
    i = c.end_index();
  }
  result.code_size_after = records.size();
  result.program = StaticProgram(std::move(records), program.instruction_width(), program.base());

  auto events = trace.expand();
  std::vector<std::uint32_t> remapped;
  remapped.reserve(events.size());
  for (std::size_t p = 0; p < events.size();) {
    std::uint32_t e = events[p];
    if (owner[e] < 0) {
      remapped.push_back(result.index_map[e]);
      ++p;
      continue;
    }
    const auto id = static_cast<std::size_t>(owner[e]);
    const auto& c = selection.chosen[id];
    auto partial = [&](std::size_t at) {
      return Error(ErrorKind::substitution, "CI " + std::to_string(id) + " [" + std::to_string(c.start_index) +
                                                "," + std::to_string(c.end_index()) +
                                                ") partially executed at trace position " + std::to_string(at));
    };
    if (e != c.start_index) throw partial(p);
    for (std::uint32_t k = 1; k < c.length; ++k)
      if (p + k >= events.size() || events[p + k] != c.start_index + k) throw partial(p + k);
    remapped.push_back(result.index_map[e]);
    p += c.length;
  }
  result.trace = DynamicTrace::from_events(remapped);
  return result;
}

struct ReductionStats {
  double access_red_pct = 0;
  double hit_red_pct = 0;
  double miss_red_pct = 0;
};

inline ReductionStats reduction_stats(const AccessStats& before, const AccessStats& after) {
  auto pct = [](std::uint64_t b, std::uint64_t a) {
    return b == 0 ? 0.0 : 100.0 * (static_cast<double>(b) - static_cast<double>(a)) / static_cast<double>(b);
  };
  return {pct(before.total(), after.total()), pct(before.hits, after.hits), pct(before.misses, after.misses)};
}

// Selection file: `ci <id> start=<k> len=<j> inputs=<n> outputs=<m> execs=<c>`

inline void write_selection(std::ostream& out, const CiSelection& selection) {
  for (std::size_t id = 0; id < selection.chosen.size(); ++id) {
    const auto& c = selection.chosen[id];
    out << "ci " << id << " start=" << c.start_index << " len=" << c.length << " inputs=" << c.ext_inputs
        << " outputs=" << c.ext_outputs << " execs=" << c.exec_count << '\n';
  }
}

inline CiSelection parse_selection(std::istream& in) {
  std::map<std::uint64_t, CiCandidate> by_id;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    auto tokens = tokenize_line(text);
    if (tokens.empty()) continue;
    std::uint64_t id = 0;
    if (tokens.size() != 7 || tokens[0] != "ci" || !parse_uint(tokens[1], id))
      throw Error(ErrorKind::parse, "expected 'ci <id> start= len= inputs= outputs= execs='", line_no);
    std::map<std::string_view, std::uint64_t> fields;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      auto eq = tokens[t].find('=');
      std::uint64_t v = 0;
      if (eq == std::string_view::npos || !parse_uint(tokens[t].substr(eq + 1), v))
        throw Error(ErrorKind::parse, "bad field '" + std::string(tokens[t]) + "'", line_no);
      fields[tokens[t].substr(0, eq)] = v;
    }
    for (auto key : {"start", "len", "inputs", "outputs", "execs"})
      if (!fields.contains(key)) throw Error(ErrorKind::parse, std::string("missing field ") + key, line_no);
    if (by_id.contains(id)) throw Error(ErrorKind::validation, "duplicate CI id " + std::to_string(id), line_no);
    by_id[id] = {static_cast<std::uint32_t>(fields["start"]), static_cast<std::uint32_t>(fields["len"]),
                 static_cast<std::uint32_t>(fields["inputs"]), static_cast<std::uint32_t>(fields["outputs"]),
                 fields["execs"]};
  }
  CiSelection sel;
  std::uint64_t expect = 0;
  for (auto& [id, c] : by_id) {
    if (id != expect++) throw Error(ErrorKind::validation, "CI ids must be dense from 0");
    sel.chosen.push_back(c);
  }
  return sel;
}

inline CiSelection load_selection(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open CI selection file '" + path + "'");
  return parse_selection(in);
}

inline void save_selection(const std::string& path, const CiSelection& selection) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse, "cannot write CI selection file '" + path + "'");
  write_selection(out, selection);
}

}  // namespace icache_ci
