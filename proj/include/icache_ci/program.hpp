/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

// Static program image and dynamic fetch trace, plus their text formats.
//
// Program format (one instruction per line, `#` comments):
//
//   format v1
//   0 add r1 r2 r3
//   1 ld  r4 r1
//   2 br  -  r4
//
// Trace format (events are static indices; `a..b xN` repeats an inclusive span):
//
//   format v1
//   trace 806
//   0..7 x100
//   0 1 2 0 1 2

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icache_ci/error.hpp"
#include "icache_ci/units.hpp"

namespace icache_ci {

enum class OpcodeClass { arithmetic, load, store, branch, custom };

inline const char* to_string(OpcodeClass c) {
  switch (c) {
    case OpcodeClass::arithmetic: return "arithmetic";
    case OpcodeClass::load: return "load";
    case OpcodeClass::store: return "store";
    case OpcodeClass::branch: return "branch";
    case OpcodeClass::custom: return "custom";
  }
  return "?";
}

inline std::optional<OpcodeClass> opcode_class_from_name(std::string_view name) {
  if (name == "arithmetic") return OpcodeClass::arithmetic;
  if (name == "load") return OpcodeClass::load;
  if (name == "store") return OpcodeClass::store;
  if (name == "branch") return OpcodeClass::branch;
  if (name == "custom") return OpcodeClass::custom;
  return std::nullopt;
}

inline OpcodeClass classify_mnemonic(std::string_view m) {
  static constexpr std::string_view loads[] = {"ld", "lw", "lh", "lhu", "lb", "lbu", "ldr", "load"};
  static constexpr std::string_view stores[] = {"st", "sw", "sh", "sb", "sd", "str", "store"};
  static constexpr std::string_view branches[] = {"br",  "b",   "beq", "bne",  "blt", "bge",
                                                  "bgt", "ble", "j",   "jal",  "jr",  "jalr",
                                                  "jmp", "call", "ret", "branch"};
  auto in = [&](auto& set) { return std::find(std::begin(set), std::end(set), m) != std::end(set); };
  if (in(loads)) return OpcodeClass::load;
  if (in(stores)) return OpcodeClass::store;
  if (in(branches)) return OpcodeClass::branch;
  return OpcodeClass::arithmetic;
}

inline constexpr unsigned kNumRegisters = 32;
using Reg = std::uint8_t;

struct InstructionRecord {
  std::uint32_t index = 0;
  OpcodeClass opcode_class = OpcodeClass::arithmetic;
  std::string mnemonic = "add";
  std::optional<Reg> dst;
  std::vector<Reg> srcs;
  std::optional<std::uint32_t> ci_id;  // set iff opcode_class == custom

  bool operator==(const InstructionRecord&) const = default;
};

class StaticProgram {
 public:
  static constexpr std::uint32_t kDefaultWidth = 4;

  StaticProgram() = default;

  explicit StaticProgram(std::vector<InstructionRecord> instructions,
                         std::uint32_t instruction_width = kDefaultWidth, std::uint64_t base = 0)
      : instructions_(std::move(instructions)), width_(instruction_width), base_(base) {
    validate();
  }

  std::size_t size() const noexcept { return instructions_.size(); }
  bool empty() const noexcept { return instructions_.empty(); }
  const InstructionRecord& operator[](std::size_t i) const { return instructions_[i]; }
  std::span<const InstructionRecord> instructions() const noexcept { return instructions_; }
  std::uint32_t instruction_width() const noexcept { return width_; }
  std::uint64_t base() const noexcept { return base_; }

  std::uint64_t address_of(std::uint64_t index) const noexcept { return base_ + index * width_; }

  bool operator==(const StaticProgram&) const = default;

 private:
  void validate() const {
    if (width_ == 0) throw Error(ErrorKind::validation, "instruction width must be positive");
    for (std::size_t i = 0; i < instructions_.size(); ++i) {
      const auto& r = instructions_[i];
      if (r.index != i) {
        if (r.index < i)
          throw Error(ErrorKind::validation, "duplicate or out-of-order index " + std::to_string(r.index));
        throw Error(ErrorKind::validation, "gap at index " + std::to_string(i));
      }
      auto check_reg = [&](Reg reg) {
        if (reg >= kNumRegisters)
          throw Error(ErrorKind::validation, "register r" + std::to_string(reg) +
                                                 " out of range at index " + std::to_string(i));
      };
      if (r.dst) check_reg(*r.dst);
      for (Reg s : r.srcs) check_reg(s);
      bool custom = r.opcode_class == OpcodeClass::custom;
      if (!custom && r.srcs.size() > 2)
        throw Error(ErrorKind::validation,
                    "base instruction at index " + std::to_string(i) + " has more than 2 sources");
      if (custom != r.ci_id.has_value())
        throw Error(ErrorKind::validation,
                    "custom record without ci id (or ci id on base record) at index " +
                        std::to_string(i));
    }
  }

  std::vector<InstructionRecord> instructions_;
  std::uint32_t width_ = kDefaultWidth;
  std::uint64_t base_ = 0;
};

/// Inclusive span [first, last] executed `repeat` times back to back.
struct TraceRun {
  std::uint32_t first = 0;
  std::uint32_t last = 0;
  std::uint64_t repeat = 1;

  std::uint64_t span_length() const noexcept { return std::uint64_t{last} - first + 1; }
  std::uint64_t event_count() const noexcept { return span_length() * repeat; }
  bool operator==(const TraceRun&) const = default;
};

class DynamicTrace {
 public:
  DynamicTrace() = default;

  explicit DynamicTrace(std::vector<TraceRun> runs) : runs_(std::move(runs)) {
    for (const auto& r : runs_) {
      if (r.first > r.last) throw Error(ErrorKind::validation, "descending trace span");
      if (r.repeat == 0) throw Error(ErrorKind::validation, "zero repeat count");
      size_ += r.event_count();
    }
  }

  /// Builds the run-length form: ascending +1 spans, identical neighbours merged.
  static DynamicTrace from_events(std::span<const std::uint32_t> events) {
    std::vector<TraceRun> runs;
    std::size_t i = 0;
    while (i < events.size()) {
      std::size_t j = i + 1;
      while (j < events.size() && events[j] == events[j - 1] + 1) ++j;
      TraceRun run{events[i], events[j - 1], 1};
      if (!runs.empty() && runs.back().first == run.first && runs.back().last == run.last)
        ++runs.back().repeat;
      else
        runs.push_back(run);
      i = j;
    }
    return DynamicTrace(std::move(runs));
  }

  std::uint64_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  const std::vector<TraceRun>& runs() const noexcept { return runs_; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& r : runs_)
      for (std::uint64_t rep = 0; rep < r.repeat; ++rep)
        for (std::uint32_t i = r.first;; ++i) {
          fn(i);
          if (i == r.last) break;
        }
  }

  std::vector<std::uint32_t> expand() const {
    std::vector<std::uint32_t> out;
    out.reserve(size_);
    for_each([&](std::uint32_t i) { out.push_back(i); });
    return out;
  }

  std::uint32_t max_index() const noexcept {
    std::uint32_t m = 0;
    for (const auto& r : runs_) m = std::max(m, r.last);
    return m;
  }

  void validate_against(const StaticProgram& program) const {
    for (const auto& r : runs_)
      if (r.last >= program.size()) {
        std::uint32_t bad = r.first >= program.size() ? r.first : static_cast<std::uint32_t>(program.size());
        throw Error(ErrorKind::validation, "index " + std::to_string(bad) + " out of range");
      }
  }

  /// Event-sequence equality; the run decomposition may differ.
  friend bool operator==(const DynamicTrace& a, const DynamicTrace& b) {
    return a.size_ == b.size_ && a.expand() == b.expand();
  }

 private:
  std::vector<TraceRun> runs_;
  std::uint64_t size_ = 0;
};

namespace detail {

inline std::optional<Reg> parse_register(std::string_view tok, std::size_t line) {
  if (tok == "-") return std::nullopt;
  std::string_view digits = tok;
  if (!digits.empty() && (digits.front() == 'r' || digits.front() == 'R')) digits.remove_prefix(1);
  std::uint64_t v = 0;
  if (!parse_uint(digits, v)) throw Error(ErrorKind::parse, "bad register '" + std::string(tok) + "'", line);
  if (v >= kNumRegisters)
    throw Error(ErrorKind::validation, "register " + std::string(tok) + " out of range 0-31", line);
  return static_cast<Reg>(v);
}

/// Consumes an optional leading `format v1` line; returns true if `tokens` was that line.
inline bool consume_format_line(const std::vector<std::string_view>& tokens, bool seen_content,
                                std::size_t line) {
  if (tokens.empty() || tokens[0] != "format") return false;
  if (seen_content) throw Error(ErrorKind::parse, "format line must come first", line);
  if (tokens.size() != 2 || tokens[1] != "v1")
    throw Error(ErrorKind::parse, "unsupported format version", line);
  return true;
}

}  // namespace detail

inline StaticProgram parse_program(std::istream& in,
                                   std::uint32_t instruction_width = StaticProgram::kDefaultWidth,
                                   std::uint64_t base = 0) {
  std::vector<InstructionRecord> records;
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
    if (tokens.size() < 2) throw Error(ErrorKind::parse, "expected 'index opcode [dst] [srcs...]'", line_no);

    InstructionRecord rec;
    std::uint64_t index = 0;
    if (!parse_uint(tokens[0], index) || index > UINT32_MAX)
      throw Error(ErrorKind::parse, "bad index '" + std::string(tokens[0]) + "'", line_no);
    std::size_t expected = records.size();
    if (index < expected)
      throw Error(ErrorKind::validation, "duplicate index " + std::to_string(index), line_no);
    if (index > expected) throw Error(ErrorKind::validation, "gap at index " + std::to_string(expected), line_no);
    rec.index = static_cast<std::uint32_t>(index);

    rec.mnemonic = std::string(tokens[1]);
    std::uint64_t ci = 0;
    if (rec.mnemonic.size() > 2 && rec.mnemonic.starts_with("ci") &&
        parse_uint(std::string_view(rec.mnemonic).substr(2), ci)) {
      rec.opcode_class = OpcodeClass::custom;
      rec.ci_id = static_cast<std::uint32_t>(ci);
    } else {
      rec.opcode_class = classify_mnemonic(rec.mnemonic);
    }

    if (tokens.size() > 2) rec.dst = detail::parse_register(tokens[2], line_no);
    for (std::size_t t = 3; t < tokens.size(); ++t)
      if (auto r = detail::parse_register(tokens[t], line_no)) rec.srcs.push_back(*r);
    if (rec.opcode_class != OpcodeClass::custom && rec.srcs.size() > 2)
      throw Error(ErrorKind::validation, "base instruction has more than 2 sources", line_no);
    records.push_back(std::move(rec));
  }
  return StaticProgram(std::move(records), instruction_width, base);
}

inline StaticProgram parse_program(std::string_view text,
                                   std::uint32_t instruction_width = StaticProgram::kDefaultWidth,
                                   std::uint64_t base = 0) {
  std::istringstream in{std::string(text)};
  return parse_program(in, instruction_width, base);
}

inline StaticProgram load_program(const std::string& path,
                                  std::uint32_t instruction_width = StaticProgram::kDefaultWidth,
                                  std::uint64_t base = 0) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open program file '" + path + "'");
  return parse_program(in, instruction_width, base);
}

inline void write_program(std::ostream& out, const StaticProgram& program) {
  auto reg = [](std::optional<Reg> r) { return r ? "r" + std::to_string(*r) : std::string("-"); };
  out << "format v1\n";
  for (const auto& rec : program.instructions()) {
    out << rec.index << ' ' << rec.mnemonic << ' ' << reg(rec.dst);
    std::size_t shown = 0;
    for (Reg s : rec.srcs) {
      out << ' ' << reg(s);
      ++shown;
    }
    for (; shown < 2; ++shown) out << " -";
    out << '\n';
  }
}

inline void save_program(const std::string& path, const StaticProgram& program) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse, "cannot write program file '" + path + "'");
  write_program(out, program);
}

inline DynamicTrace parse_trace(std::istream& in, const StaticProgram& program) {
  std::vector<TraceRun> runs;
  std::optional<std::uint64_t> declared;
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
    if (!declared) {
      std::uint64_t n = 0;
      if (tokens.size() != 2 || tokens[0] != "trace" || !parse_uint(tokens[1], n))
        throw Error(ErrorKind::parse, "expected header 'trace <event_count>'", line_no);
      declared = n;
      continue;
    }
    bool repeat_allowed = false;
    for (auto tok : tokens) {
      if (tok.front() == 'x') {
        std::uint64_t rep = 0;
        if (!repeat_allowed || !parse_uint(tok.substr(1), rep) || rep == 0)
          throw Error(ErrorKind::parse, "misplaced or bad repeat '" + std::string(tok) + "'", line_no);
        runs.back().repeat = rep;
        repeat_allowed = false;
        continue;
      }
      std::uint64_t first = 0, last = 0;
      if (auto dots = tok.find(".."); dots != std::string_view::npos) {
        if (!parse_uint(tok.substr(0, dots), first) || !parse_uint(tok.substr(dots + 2), last))
          throw Error(ErrorKind::parse, "bad span '" + std::string(tok) + "'", line_no);
        if (first > last) throw Error(ErrorKind::parse, "descending span '" + std::string(tok) + "'", line_no);
      } else {
        if (!parse_uint(tok, first)) throw Error(ErrorKind::parse, "bad event '" + std::string(tok) + "'", line_no);
        last = first;
      }
      if (last >= program.size()) {
        std::uint64_t bad = first >= program.size() ? first : program.size();
        throw Error(ErrorKind::validation, "index " + std::to_string(bad) + " out of range", line_no);
      }
      runs.push_back({static_cast<std::uint32_t>(first), static_cast<std::uint32_t>(last), 1});
      repeat_allowed = true;
    }
  }
  if (!declared) throw Error(ErrorKind::parse, "missing 'trace <event_count>' header");
  DynamicTrace trace(std::move(runs));
  if (trace.size() != *declared)
    throw Error(ErrorKind::integrity, "header declares " + std::to_string(*declared) + " events, decoded " +
                                          std::to_string(trace.size()));
  return trace;
}

inline DynamicTrace parse_trace(std::string_view text, const StaticProgram& program) {
  std::istringstream in{std::string(text)};
  return parse_trace(in, program);
}

inline DynamicTrace load_trace(const std::string& path, const StaticProgram& program) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open trace file '" + path + "'");
  return parse_trace(in, program);
}

inline void write_trace(std::ostream& out, const DynamicTrace& trace) {
  out << "format v1\ntrace " << trace.size() << '\n';
  for (const auto& r : trace.runs()) {
    if (r.first == r.last)
      out << r.first;
    else
      out << r.first << ".." << r.last;
    if (r.repeat != 1) out << " x" << r.repeat;
    out << '\n';
  }
}

inline void save_trace(const std::string& path, const DynamicTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::parse, "cannot write trace file '" + path + "'");
  write_trace(out, trace);
}

}  // namespace icache_ci
