#include "verilog_parser.hpp"

#include <array>
#include <cctype>
#include <set>

namespace busweaver::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

Literal parse_literal(const std::string& text, const SourceLocation& loc) {
  Literal lit;
  const auto tick = text.find('\'');
  std::string digits;
  char base = 'd';
  if (tick == std::string::npos) {
    digits = text;
  } else {
    if (tick > 0) {
      const auto size = std::stoul(text.substr(0, tick));
      if (size == 0 || size > (1u << 20)) throw SyntaxError(loc, "literal size out of range");
      lit.size = static_cast<Width>(size);
    }
    std::size_t p = tick + 1;
    if (p < text.size() && (text[p] == 's' || text[p] == 'S')) throw SyntaxError(loc, "signed literals are not supported");
    if (p >= text.size()) throw SyntaxError(loc, "malformed literal '" + text + "'");
    base = static_cast<char>(std::tolower(static_cast<unsigned char>(text[p])));
    digits = text.substr(p + 1);
  }
  std::string clean;
  for (char c : digits)
    if (c != '_') clean.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (clean.empty()) throw SyntaxError(loc, "malformed literal '" + text + "'");
  for (char c : clean)
    if (c == 'x' || c == 'z' || c == '?')
      throw SyntaxError(loc, "unsupported construct: x/z literal '" + text + "' (two-valued logic only)");

  // Accumulate into a wide-enough little-endian bit list.
  std::vector<bool> bits;
  auto push_digit_bits = [&](unsigned digit, unsigned nbits) {
    // Prepends `nbits` bits of `digit` at the low end, shifting existing bits up.
    std::vector<bool> next(nbits);
    for (unsigned b = 0; b < nbits; ++b) next[b] = (digit >> b) & 1u;
    next.insert(next.end(), bits.begin(), bits.end());
    bits.swap(next);
  };
  if (base == 'b' || base == 'o' || base == 'h') {
    const unsigned nbits = base == 'b' ? 1 : base == 'o' ? 3 : 4;
    for (char c : clean) {
      unsigned d;
      if (c >= '0' && c <= '9')
        d = static_cast<unsigned>(c - '0');
      else if (c >= 'a' && c <= 'f')
        d = static_cast<unsigned>(c - 'a' + 10);
      else
        throw SyntaxError(loc, "malformed literal '" + text + "'");
      if (d >= (1u << nbits)) throw SyntaxError(loc, "digit out of range in literal '" + text + "'");
      push_digit_bits(d, nbits);
    }
  } else if (base == 'd') {
    // Decimal: multiply-accumulate on a bit vector.
    for (char c : clean) {
      if (c < '0' || c > '9') throw SyntaxError(loc, "malformed literal '" + text + "'");
      unsigned carry = static_cast<unsigned>(c - '0');
      for (std::size_t b = 0; b < bits.size(); ++b) {
        const unsigned v = (bits[b] ? 10u : 0u) + carry;
        bits[b] = v & 1u;
        carry = v >> 1;
      }
      while (carry) {
        bits.push_back(carry & 1u);
        carry >>= 1;
      }
    }
  } else {
    throw SyntaxError(loc, "unknown literal base in '" + text + "'");
  }
  // Strip leading zeros beyond what's needed, then size.
  while (!bits.empty() && !bits.back()) bits.pop_back();
  const Width natural = std::max<Width>(1, static_cast<Width>(bits.size()));
  const Width width = lit.size ? *lit.size : std::max<Width>(32, natural);
  lit.truncated = bits.size() > width;
  lit.value = BitVector(width);
  for (Width b = 0; b < std::min<Width>(width, static_cast<Width>(bits.size())); ++b) lit.value.set(b, bits[b]);
  return lit;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, const std::string& path) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  auto loc = [&] { return SourceLocation{path, line, col}; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const std::array<std::string_view, 16> kMulti = {"(*", "*)", "~&", "~|", "~^", "^~", "==", "!=",
                                                          "<=", ">=", "&&", "||", "<<", ">>", "**", "+:"};
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      const auto start = loc();
      advance(2);
      while (i < text.size() && !(text[i] == '*' && i + 1 < text.size() && text[i + 1] == '/')) advance(1);
      if (i >= text.size()) throw SyntaxError(start, "unterminated block comment");
      advance(2);
      continue;
    }
    if (c == '`') throw SyntaxError(loc(), "unsupported construct: preprocessor directive");
    if (c == '\\') throw SyntaxError(loc(), "unsupported construct: escaped identifier");
    if (c == '"') throw SyntaxError(loc(), "unsupported construct: string literal");
    Token t;
    t.loc = loc();
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = TokKind::Ident;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (j < text.size() && text[j] == '.') throw SyntaxError(loc(), "unsupported construct: real number");
      std::size_t k = j;
      while (k < text.size() && (text[k] == ' ' || text[k] == '\t')) ++k;
      if (k < text.size() && text[k] == '\'') {
        k += 1;
        if (k < text.size() && (text[k] == 's' || text[k] == 'S')) ++k;
        if (k < text.size() && std::isalpha(static_cast<unsigned char>(text[k]))) ++k;
        while (k < text.size() && (std::isalnum(static_cast<unsigned char>(text[k])) || text[k] == '_' || text[k] == '?'))
          ++k;
        j = k;
      }
      if (j == i) throw SyntaxError(loc(), "unexpected character '''");
      t.kind = TokKind::Number;
      for (std::size_t p = i; p < j; ++p)
        if (text[p] != ' ' && text[p] != '\t') t.text.push_back(text[p]);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    t.kind = TokKind::Symbol;
    bool multi = false;
    for (auto m : kMulti) {
      if (text.substr(i, m.size()) == m) {
        t.text = std::string(m);
        multi = true;
        break;
      }
    }
    if (!multi) {
      static const std::string kSingle = "()[]{};:,.=?~&|^+-*/%!<>#@";
      if (kSingle.find(c) == std::string::npos)
        throw SyntaxError(loc(), std::string("unexpected character '") + c + "'");
      t.text = std::string(1, c);
    }
    advance(t.text.size());
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokKind::End;
  end.loc = loc();
  out.push_back(std::move(end));
  return out;
}

namespace {

const std::set<std::string, std::less<>> kUnsupportedKeywords = {
    "always", "always_comb", "always_ff", "initial", "reg",    "integer", "real",   "realtime", "time",
    "generate", "genvar",     "function",  "task",    "begin",  "end",     "for",    "if",       "case",
    "tri",    "supply0",      "supply1",   "logic",   "inout",  "signed",  "specify", "primitive", "defparam",
    "trireg", "wand",         "wor",       "event",   "fork",   "force",   "assert"};

class Parser {
public:
  explicit Parser(const std::vector<Token>& t) : toks_(t) {}

  std::vector<ModuleAst> run() {
    std::vector<ModuleAst> mods;
    while (!at_end()) {
      if (is_kw("extern")) {
        next();
        mods.push_back(parse_module(true));
      } else if (is_kw("module")) {
        mods.push_back(parse_module(false));
      } else if (is_kw("macromodule") || kUnsupportedKeywords.count(peek().text)) {
        unsupported();
      } else {
        throw SyntaxError(peek().loc, "expected 'module', found " + describe(peek()));
      }
    }
    return mods;
  }

private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokKind::End; }
  bool is_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == TokKind::Symbol && peek(k).text == s;
  }
  bool is_kw(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == TokKind::Ident && peek(k).text == s;
  }
  static std::string describe(const Token& t) {
    if (t.kind == TokKind::End) return "end of file";
    return "'" + t.text + "'";
  }
  [[noreturn]] void unsupported() const {
    throw SyntaxError(peek().loc, "unsupported construct: '" + peek().text + "'");
  }
  void expect_sym(std::string_view s) {
    if (!is_sym(s)) throw SyntaxError(peek().loc, "expected '" + std::string(s) + "', found " + describe(peek()));
    next();
  }
  void expect_kw(std::string_view s) {
    if (!is_kw(s)) throw SyntaxError(peek().loc, "expected '" + std::string(s) + "', found " + describe(peek()));
    next();
  }
  std::string expect_ident() {
    if (peek().kind != TokKind::Ident)
      throw SyntaxError(peek().loc, "expected identifier, found " + describe(peek()));
    if (kUnsupportedKeywords.count(peek().text)) unsupported();
    return next().text;
  }

  ModuleAst parse_module(bool is_extern) {
    ModuleAst m;
    m.loc = peek().loc;
    m.is_extern = is_extern;
    expect_kw("module");
    m.name = expect_ident();
    if (is_sym("#")) {
      next();
      expect_sym("(");
      if (!is_sym(")")) {
        while (true) {
          if (is_kw("parameter")) next();
          if (is_kw("integer")) next();
          ParamAst p;
          p.loc = peek().loc;
          p.name = expect_ident();
          expect_sym("=");
          p.value = parse_expr();
          m.params.push_back(std::move(p));
          if (!is_sym(",")) break;
          next();
        }
      }
      expect_sym(")");
    }
    if (is_sym("(")) {
      next();
      if (!is_sym(")")) parse_port_list(m);
      expect_sym(")");
    }
    expect_sym(";");
    if (is_extern) return m;
    while (!is_kw("endmodule")) {
      if (at_end()) throw SyntaxError(peek().loc, "expected 'endmodule', found end of file");
      parse_item(m);
    }
    next();
    return m;
  }

  void parse_port_list(ModuleAst& m) {
    std::optional<PortDir> dir;
    std::optional<RangeAst> range;
    while (true) {
      if (is_kw("input") || is_kw("output")) {
        dir = is_kw("input") ? PortDir::Input : PortDir::Output;
        next();
        range.reset();
        if (is_kw("wire")) next();
        if (kUnsupportedKeywords.count(peek().text)) unsupported();
        if (is_sym("[")) range = parse_range();
      } else if (!dir) {
        if (kUnsupportedKeywords.count(peek().text)) unsupported();
        throw SyntaxError(peek().loc, "unsupported construct: non-ANSI port list (port '" + peek().text + "')");
      }
      PortAst p;
      p.loc = peek().loc;
      p.dir = *dir;
      p.range = range;
      p.name = expect_ident();
      m.ports.push_back(std::move(p));
      if (!is_sym(",")) break;
      next();
    }
  }

  RangeAst parse_range() {
    expect_sym("[");
    RangeAst r;
    r.msb = parse_expr();
    expect_sym(":");
    r.lsb = parse_expr();
    expect_sym("]");
    return r;
  }

  void parse_item(ModuleAst& m) {
    const Token& t = peek();
    if (t.kind == TokKind::Symbol && t.text == ";") {
      next();
      return;
    }
    if (t.kind != TokKind::Ident) throw SyntaxError(t.loc, "expected module item, found " + describe(t));
    if (t.text == "wire") {
      next();
      if (kUnsupportedKeywords.count(peek().text)) unsupported();
      std::optional<RangeAst> range;
      if (is_sym("[")) range = parse_range();
      while (true) {
        NetAst n;
        n.loc = peek().loc;
        n.range = range;
        n.name = expect_ident();
        if (is_sym("=")) {
          const auto aloc = peek().loc;
          next();
          AssignAst a;
          a.loc = aloc;
          a.lhs.kind = Expr::Kind::Ident;
          a.lhs.name = n.name;
          a.lhs.loc = n.loc;
          a.rhs = parse_expr();
          m.assigns.push_back(std::move(a));
        }
        m.nets.push_back(std::move(n));
        if (!is_sym(",")) break;
        next();
      }
      expect_sym(";");
      return;
    }
    if (t.text == "assign") {
      next();
      if (is_sym("#")) throw SyntaxError(peek().loc, "unsupported construct: delay");
      while (true) {
        AssignAst a;
        a.loc = peek().loc;
        a.lhs = parse_lvalue();
        expect_sym("=");
        a.rhs = parse_expr();
        m.assigns.push_back(std::move(a));
        if (!is_sym(",")) break;
        next();
      }
      expect_sym(";");
      return;
    }
    if (t.text == "parameter" || t.text == "localparam") {
      next();
      if (is_kw("integer")) next();
      if (is_sym("[")) parse_range();
      while (true) {
        ParamAst p;
        p.loc = peek().loc;
        p.name = expect_ident();
        expect_sym("=");
        p.value = parse_expr();
        m.params.push_back(std::move(p));
        if (!is_sym(",")) break;
        next();
      }
      expect_sym(";");
      return;
    }
    if (t.text == "input" || t.text == "output")
      throw SyntaxError(t.loc, "unsupported construct: non-ANSI port declaration in module body");
    if (t.text == "module" || t.text == "endmodule" || t.text == "extern")
      throw SyntaxError(t.loc, "unexpected " + describe(t));
    if (kUnsupportedKeywords.count(t.text)) unsupported();

    // Instantiation: `mod inst(...), inst2(...);`
    InstanceAst proto;
    proto.loc = t.loc;
    proto.module = next().text;
    if (is_sym("#")) throw SyntaxError(peek().loc, "unsupported construct: parameter override on instance");
    while (true) {
      InstanceAst inst = proto;
      inst.loc = peek().loc;
      inst.name = expect_ident();
      expect_sym("(");
      if (!is_sym(")")) {
        while (true) {
          ConnectionAst c;
          c.loc = peek().loc;
          if (is_sym(".")) {
            next();
            c.port = expect_ident();
            expect_sym("(");
            if (!is_sym(")")) c.expr = parse_expr();
            expect_sym(")");
          } else {
            c.expr = parse_expr();
          }
          inst.connections.push_back(std::move(c));
          if (!is_sym(",")) break;
          next();
        }
      }
      expect_sym(")");
      m.instances.push_back(std::move(inst));
      if (!is_sym(",")) break;
      next();
    }
    expect_sym(";");
  }

  Expr parse_lvalue() {
    if (is_sym("{")) {
      Expr e;
      e.kind = Expr::Kind::Concat;
      e.loc = next().loc;
      while (true) {
        e.args.push_back(parse_lvalue());
        if (!is_sym(",")) break;
        next();
      }
      expect_sym("}");
      return e;
    }
    return parse_selectable();
  }

  Expr parse_selectable() {
    Expr e;
    e.loc = peek().loc;
    e.name = expect_ident();
    e.kind = Expr::Kind::Ident;
    if (is_sym("[")) {
      next();
      Expr first = parse_expr();
      if (is_sym("+:") || (is_sym("-") && is_sym(":", 1)))
        throw SyntaxError(peek().loc, "unsupported construct: indexed part-select");
      if (is_sym(":")) {
        next();
        e.kind = Expr::Kind::Range;
        e.args.push_back(std::move(first));
        e.args.push_back(parse_expr());
      } else {
        e.kind = Expr::Kind::Index;
        e.args.push_back(std::move(first));
      }
      expect_sym("]");
      if (is_sym("[")) throw SyntaxError(peek().loc, "unsupported construct: multi-dimensional select");
    }
    return e;
  }

  // Precedence, lowest first: ?:, ||, &&, |, ^ ~^, &, == !=, < <= > >=, << >>, + -, * / %, unary.
  Expr parse_expr() { return parse_ternary(); }

  Expr parse_ternary() {
    Expr cond = parse_binary(0);
    if (!is_sym("?")) return cond;
    Expr e;
    e.kind = Expr::Kind::Ternary;
    e.loc = next().loc;
    e.args.push_back(std::move(cond));
    e.args.push_back(parse_ternary());
    expect_sym(":");
    e.args.push_back(parse_ternary());
    return e;
  }

  static int level_of(const Token& t) {
    if (t.kind != TokKind::Symbol) return -1;
    const auto& s = t.text;
    if (s == "||") return 0;
    if (s == "&&") return 1;
    if (s == "|") return 2;
    if (s == "^" || s == "~^" || s == "^~") return 3;
    if (s == "&") return 4;
    if (s == "==" || s == "!=") return 5;
    if (s == "<" || s == "<=" || s == ">" || s == ">=") return 6;
    if (s == "<<" || s == ">>") return 7;
    if (s == "+" || s == "-") return 8;
    if (s == "*" || s == "/" || s == "%" || s == "**") return 9;
    return -1;
  }

  Expr parse_binary(int min_level) {
    Expr lhs = parse_unary();
    while (true) {
      const int lvl = level_of(peek());
      if (lvl < 0 || lvl < min_level) return lhs;
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.loc = peek().loc;
      e.name = next().text;
      e.args.push_back(std::move(lhs));
      e.args.push_back(parse_binary(lvl + 1));
      lhs = std::move(e);
    }
  }

  Expr parse_unary() {
    static const std::set<std::string, std::less<>> kUnary = {"~", "&", "|", "^", "~&", "~|", "~^", "^~", "!", "-", "+"};
    if (peek().kind == TokKind::Symbol && kUnary.count(peek().text)) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.loc = peek().loc;
      e.name = next().text;
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == TokKind::Number) {
      Expr e;
      e.kind = Expr::Kind::Number;
      e.loc = t.loc;
      e.literal = parse_literal(next().text, e.loc);
      return e;
    }
    if (t.kind == TokKind::Ident) {
      if (kUnsupportedKeywords.count(t.text)) unsupported();
      if (is_sym("(", 1)) throw SyntaxError(t.loc, "unsupported construct: function call '" + t.text + "'");
      return parse_selectable();
    }
    if (is_sym("(")) {
      next();
      Expr e = parse_expr();
      expect_sym(")");
      return e;
    }
    if (is_sym("{")) {
      const auto loc = next().loc;
      Expr first = parse_expr();
      if (is_sym("{")) {
        next();
        Expr e;
        e.kind = Expr::Kind::Replicate;
        e.loc = loc;
        e.args.push_back(std::move(first));
        while (true) {
          e.args.push_back(parse_expr());
          if (!is_sym(",")) break;
          next();
        }
        expect_sym("}");
        expect_sym("}");
        return e;
      }
      Expr e;
      e.kind = Expr::Kind::Concat;
      e.loc = loc;
      e.args.push_back(std::move(first));
      while (is_sym(",")) {
        next();
        e.args.push_back(parse_expr());
      }
      expect_sym("}");
      return e;
    }
    throw SyntaxError(t.loc, "expected expression, found " + describe(t));
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<ModuleAst> parse_modules(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

}  // namespace busweaver::detail
