#pragma once

// Private to the frontend: tokens, a syntax tree of the accepted subset, and
// the recursive-descent parser that produces it.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "busweaver/bitvector.hpp"
#include "busweaver/frontend.hpp"

namespace busweaver::detail {

struct SyntaxError : std::runtime_error {
  SyntaxError(SourceLocation l, const std::string& m) : std::runtime_error(m), loc(std::move(l)) {}
  SourceLocation loc;
};

enum class TokKind { Ident, Number, Symbol, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  SourceLocation loc;
};

std::vector<Token> tokenize(std::string_view text, const std::string& path);

struct Literal {
  std::optional<Width> size;  // nullopt for unsized literals
  BitVector value;            // at least `size` bits
  bool truncated = false;     // digits exceeded the declared size
};

struct Expr {
  enum class Kind { Ident, Number, Index, Range, Concat, Replicate, Unary, Binary, Ternary };
  Kind kind = Kind::Ident;
  SourceLocation loc;
  std::string name;  // Ident/Index/Range: identifier; Unary/Binary: operator spelling
  Literal literal;   // Number
  std::vector<Expr> args;
  // Index: args[0] = index. Range: args[0] = msb, args[1] = lsb.
  // Replicate: args[0] = count, args[1..] = elements. Unary: args[0].
  // Binary: args[0], args[1]. Ternary: cond, true, false.
};

struct RangeAst {
  Expr msb;
  Expr lsb;
};

struct PortAst {
  PortDir dir = PortDir::Input;
  std::optional<RangeAst> range;
  std::string name;
  SourceLocation loc;
};

struct NetAst {
  std::optional<RangeAst> range;
  std::string name;
  SourceLocation loc;
};

struct ParamAst {
  std::string name;
  Expr value;
  SourceLocation loc;
};

struct AssignAst {
  Expr lhs;
  Expr rhs;
  SourceLocation loc;
};

struct ConnectionAst {
  std::optional<std::string> port;  // nullopt for positional
  std::optional<Expr> expr;         // nullopt for `.p()`
  SourceLocation loc;
};

struct InstanceAst {
  std::string module;
  std::string name;
  std::vector<ConnectionAst> connections;
  SourceLocation loc;
};

struct ModuleAst {
  std::string name;
  SourceLocation loc;
  bool is_extern = false;
  std::vector<ParamAst> params;
  std::vector<PortAst> ports;
  std::vector<NetAst> nets;
  std::vector<AssignAst> assigns;
  std::vector<InstanceAst> instances;
};

/// Throws SyntaxError at the first problem.
std::vector<ModuleAst> parse_modules(const std::vector<Token>& tokens);

}  // namespace busweaver::detail
