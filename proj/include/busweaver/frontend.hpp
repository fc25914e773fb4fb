#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "busweaver/ir.hpp"

namespace busweaver {

struct SourceFile {
  std::string path;
  std::string text;
};

struct SourceDesign {
  std::vector<SourceFile> files;
  std::optional<std::string> top;
};

enum class Severity : std::uint8_t { Error, Warning };

struct SourceLocation {
  std::string file;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  SourceLocation location;
  std::string message;

  /// `file:line:col: severity: message`
  std::string format() const;
};

struct ParseResult {
  std::optional<HwDesign> design;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return design.has_value(); }
  std::size_t error_count() const;
};

/// Parses and elaborates the combinational subset: ANSI-style module
/// headers, `wire`, `assign`, bit/part selects, concatenation, replication,
/// unary `~ & | ^`, binary `& | ^ + -`, `?:`, sized literals, integer
/// parameters, and module instances with named or positional connections.
/// Any error leaves `design` empty.
ParseResult parse_design(const SourceDesign& src);
ParseResult parse_verilog(std::string_view text, std::string path = "<input>");

/// Reads a file from disk. Throws std::runtime_error when unreadable.
SourceFile read_source_file(const std::string& path);

}  // namespace busweaver
