/* SPDX-License-Identifier: Apache-2.0 */
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace icache_ci {

enum class ErrorKind {
  parse,         // malformed input text
  validation,    // well-formed but violates an invariant
  integrity,     // declared counts disagree with content
  spec,          // bad generator spec
  config,        // bad run/cache configuration
  parameter,     // energy parameter table problems
  substitution,  // CI rewrite cannot be applied to the trace
  fixture,       // AMAT fixture problems
  report,        // inconsistent report inputs
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::spec: return "spec error";
    case ErrorKind::config: return "config error";
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::substitution: return "substitution error";
    case ErrorKind::fixture: return "fixture error";
    case ErrorKind::report: return "report error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(compose(kind, message, line)), kind_(kind), line_(line), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  /// Message without the kind/line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string compose(ErrorKind kind, const std::string& message,
                             std::optional<std::size_t> line) {
    std::string out = to_string(kind);
    if (line) out += " at line " + std::to_string(*line);
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::optional<std::size_t> line_;
  std::string detail_;
};

}  // namespace icache_ci
