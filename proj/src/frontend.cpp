#include "busweaver/frontend.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "verilog_parser.hpp"

namespace busweaver {

std::string ParseDiagnostic::format() const {
  std::ostringstream os;
  os << location.file << ":" << location.line << ":" << location.column << ": "
     << (severity == Severity::Error ? "error" : "warning") << ": " << message;
  return os.str();
}

std::size_t ParseResult::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(), [](const ParseDiagnostic& d) {
    return d.severity == Severity::Error;
  }));
}

SourceFile read_source_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return SourceFile{path, ss.str()};
}

namespace {

using detail::AssignAst;
using detail::Expr;
using detail::InstanceAst;
using detail::ModuleAst;
using detail::SyntaxError;

using ElabError = SyntaxError;

struct PortSig {
  std::string name;
  PortDir dir;
  Width width;
};

struct ModuleSig {
  std::vector<PortSig> ports;
  bool is_extern = false;
};

using ParamTable = std::map<std::string, std::int64_t, std::less<>>;

std::int64_t eval_const(const Expr& e, const ParamTable& params) {
  switch (e.kind) {
    case Expr::Kind::Number: {
      const auto& v = e.literal.value;
      for (std::size_t w = 1; w < v.words().size(); ++w)
        if (v.words()[w] != 0) throw ElabError(e.loc, "constant does not fit in 64 bits");
      return static_cast<std::int64_t>(v.to_u64());
    }
    case Expr::Kind::Ident: {
      auto it = params.find(e.name);
      if (it == params.end()) throw ElabError(e.loc, "expected a constant expression, found signal '" + e.name + "'");
      return it->second;
    }
    case Expr::Kind::Unary: {
      const auto v = eval_const(e.args[0], params);
      if (e.name == "-") return -v;
      if (e.name == "+") return v;
      break;
    }
    case Expr::Kind::Binary: {
      const auto a = eval_const(e.args[0], params);
      const auto b = eval_const(e.args[1], params);
      if (e.name == "+") return a + b;
      if (e.name == "-") return a - b;
      if (e.name == "*") return a * b;
      if (e.name == "/" || e.name == "%") {
        if (b == 0) throw ElabError(e.loc, "division by zero in constant expression");
        return e.name == "/" ? a / b : a % b;
      }
      if (e.name == "<<") return a << b;
      if (e.name == ">>") return a >> b;
      break;
    }
    default:
      break;
  }
  throw ElabError(e.loc, "expected a constant expression");
}

ParamTable eval_params(const ModuleAst& ast) {
  ParamTable params;
  for (const auto& p : ast.params) {
    if (params.count(p.name)) throw ElabError(p.loc, "parameter '" + p.name + "' redefined");
    params[p.name] = eval_const(p.value, params);
  }
  return params;
}

struct Bounds {
  std::int64_t msb = 0;
  std::int64_t lsb = 0;
  Width width() const { return static_cast<Width>(msb - lsb + 1); }
};

Bounds eval_range(const std::optional<detail::RangeAst>& r, const ParamTable& params, const SourceLocation& loc) {
  if (!r) return {};
  Bounds b{eval_const(r->msb, params), eval_const(r->lsb, params)};
  if (b.msb < b.lsb) throw ElabError(loc, "unsupported construct: ascending range [" + std::to_string(b.msb) + ":" +
                                              std::to_string(b.lsb) + "]");
  if (b.msb - b.lsb + 1 > (1 << 20)) throw ElabError(loc, "declared width is too large");
  return b;
}

class ModuleElaborator {
public:
  ModuleElaborator(const ModuleAst& ast, const std::map<std::string, ModuleSig, std::less<>>& sigs,
                   std::vector<ParseDiagnostic>& diags)
      : ast_(ast), sigs_(sigs), diags_(diags) {}

  HwModule run() {
    params_ = eval_params(ast_);
    m_.name = ast_.name;
    m_.is_extern = ast_.is_extern;
    declare_ports();
    if (ast_.is_extern) {
      for (const auto& p : ast_.ports) m_.ports.push_back(Port{p.name, p.dir, net(p.name).width});
      return m_;
    }
    declare_wires();
    for (std::size_t k = 0; k < ast_.assigns.size(); ++k) register_assign(k);
    for (std::size_t k = 0; k < ast_.instances.size(); ++k) register_instance(k);
    assign_values_.assign(ast_.assigns.size(), {});
    assign_state_.assign(ast_.assigns.size(), 0);
    instance_values_.assign(ast_.instances.size(), {});
    instance_state_.assign(ast_.instances.size(), 0);

    // Input operations first, in port order.
    for (const auto& p : ast_.ports) {
      auto& n = net(p.name);
      if (n.kind == NetKind::Input) {
        n.value = m_.add_input(n.name, n.width);
        n.state = 2;
      } else {
        m_.ports.push_back(Port{n.name, PortDir::Output, n.width});
      }
    }
    for (const auto& p : ast_.ports) {
      auto& n = net(p.name);
      if (n.kind == NetKind::Output) m_.outputs.push_back(NamedValue{n.name, net_value(n)});
    }
    for (const auto& w : ast_.nets) {
      auto& n = net(w.name);
      if (n.drivers.empty()) {
        if (n.state != 2)
          diags_.push_back({Severity::Warning, n.loc, "wire '" + n.name + "' is never driven and is dropped"});
        continue;
      }
      m_.wires.push_back(NamedValue{n.name, net_value(n)});
    }
    for (std::size_t k = 0; k < ast_.instances.size(); ++k) instance_value(k);
    compact_module(m_);
    return m_;
  }

private:
  enum class NetKind { Input, Output, Wire };

  struct DriverSource {
    bool from_instance = false;
    std::size_t index = 0;     // assign or instance index
    std::uint32_t result = 0;  // instance output index
    Width offset = 0;          // bit offset within the source value
  };

  struct Driver {
    Width lo = 0;
    Width width = 0;
    DriverSource source;
    SourceLocation loc;
  };

  struct Net {
    std::string name;
    NetKind kind = NetKind::Wire;
    Bounds bounds;
    Width width = 1;
    SourceLocation loc;
    std::vector<Driver> drivers;
    ValueRef value;
    int state = 0;  // 0 = pending, 1 = resolving, 2 = done
  };

  struct Piece {
    Net* net;
    Width lo;
    Width width;
  };

  Net& net(const std::string& name) { return nets_.at(name); }

  Net* lookup(const std::string& name, const SourceLocation& loc) {
    auto it = nets_.find(name);
    if (it == nets_.end()) {
      if (params_.count(name)) return nullptr;
      throw ElabError(loc, "undeclared identifier '" + name + "'");
    }
    return &it->second;
  }

  void declare(const std::string& name, NetKind kind, const std::optional<detail::RangeAst>& range,
               const SourceLocation& loc) {
    if (nets_.count(name) || params_.count(name)) throw ElabError(loc, "'" + name + "' is already declared");
    Net n;
    n.name = name;
    n.kind = kind;
    n.bounds = eval_range(range, params_, loc);
    n.width = n.bounds.width();
    n.loc = loc;
    nets_.emplace(name, std::move(n));
  }

  void declare_ports() {
    for (const auto& p : ast_.ports)
      declare(p.name, p.dir == PortDir::Input ? NetKind::Input : NetKind::Output, p.range, p.loc);
  }

  void declare_wires() {
    for (const auto& w : ast_.nets) declare(w.name, NetKind::Wire, w.range, w.loc);
  }

  Width bit_position(const Net& n, std::int64_t index, const SourceLocation& loc) const {
    if (index < n.bounds.lsb || index > n.bounds.msb)
      throw ElabError(loc, "index " + std::to_string(index) + " is outside '" + n.name + "' [" +
                               std::to_string(n.bounds.msb) + ":" + std::to_string(n.bounds.lsb) + "]");
    return static_cast<Width>(index - n.bounds.lsb);
  }

  void collect_pieces(const Expr& e, std::vector<Piece>& out) {
    switch (e.kind) {
      case Expr::Kind::Concat:
        for (const auto& a : e.args) collect_pieces(a, out);
        return;
      case Expr::Kind::Ident:
      case Expr::Kind::Index:
      case Expr::Kind::Range: {
        Net* n = lookup(e.name, e.loc);
        if (n == nullptr) throw ElabError(e.loc, "cannot assign to parameter '" + e.name + "'");
        if (n->kind == NetKind::Input) throw ElabError(e.loc, "cannot assign to input port '" + e.name + "'");
        if (e.kind == Expr::Kind::Ident) {
          out.push_back({n, 0, n->width});
        } else if (e.kind == Expr::Kind::Index) {
          out.push_back({n, bit_position(*n, eval_const(e.args[0], params_), e.loc), 1});
        } else {
          const auto hi = eval_const(e.args[0], params_);
          const auto lo = eval_const(e.args[1], params_);
          if (hi < lo) throw ElabError(e.loc, "part-select must be [msb:lsb]");
          const Width l = bit_position(*n, lo, e.loc);
          bit_position(*n, hi, e.loc);
          out.push_back({n, l, static_cast<Width>(hi - lo + 1)});
        }
        return;
      }
      default:
        throw ElabError(e.loc, "invalid assignment target");
    }
  }

  void add_driver(const Piece& p, DriverSource src, const SourceLocation& loc) {
    for (const auto& d : p.net->drivers) {
      if (p.lo < d.lo + d.width && d.lo < p.lo + p.width) {
        const Width lo = std::max(p.lo, d.lo);
        const Width hi = std::min(p.lo + p.width, d.lo + d.width) - 1;
        throw ElabError(loc, "bits [" + std::to_string(hi + p.net->bounds.lsb) + ":" +
                                 std::to_string(lo + p.net->bounds.lsb) + "] of '" + p.net->name +
                                 "' are driven more than once");
      }
    }
    p.net->drivers.push_back(Driver{p.lo, p.width, src, loc});
  }

  // Registers pieces MSB-first; the last piece sits at offset 0 of the source.
  void add_drivers(const std::vector<Piece>& pieces, DriverSource src, const SourceLocation& loc) {
    Width offset = 0;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
      DriverSource s = src;
      s.offset = offset;
      add_driver(*it, s, loc);
      offset += it->width;
    }
  }

  static Width total_width(const std::vector<Piece>& pieces) {
    Width w = 0;
    for (const auto& p : pieces) w += p.width;
    return w;
  }

  void register_assign(std::size_t k) {
    const AssignAst& a = ast_.assigns[k];
    std::vector<Piece> pieces;
    collect_pieces(a.lhs, pieces);
    DriverSource src;
    src.index = k;
    add_drivers(pieces, src, a.loc);
  }

  struct Binding {
    const detail::ConnectionAst* conn = nullptr;
  };

  // Matches connections to callee ports; result indexed by callee port order.
  std::vector<const detail::ConnectionAst*> match_ports(const InstanceAst& inst, const ModuleSig& sig) {
    std::vector<const detail::ConnectionAst*> bound(sig.ports.size(), nullptr);
    const bool named = !inst.connections.empty() && inst.connections.front().port.has_value();
    if (!named && inst.connections.size() > sig.ports.size())
      throw ElabError(inst.loc, "too many connections for module '" + inst.module + "'");
    for (std::size_t c = 0; c < inst.connections.size(); ++c) {
      const auto& conn = inst.connections[c];
      if (conn.port.has_value() != named)
        throw ElabError(conn.loc, "cannot mix named and positional connections");
      std::size_t idx = c;
      if (named) {
        idx = sig.ports.size();
        for (std::size_t p = 0; p < sig.ports.size(); ++p)
          if (sig.ports[p].name == *conn.port) idx = p;
        if (idx == sig.ports.size())
          throw ElabError(conn.loc, "module '" + inst.module + "' has no port '" + *conn.port + "'");
        if (bound[idx] != nullptr) throw ElabError(conn.loc, "port '" + *conn.port + "' connected twice");
      }
      bound[idx] = &conn;
    }
    return bound;
  }

  void register_instance(std::size_t k) {
    const InstanceAst& inst = ast_.instances[k];
    auto it = sigs_.find(inst.module);
    if (it == sigs_.end()) throw ElabError(inst.loc, "unknown module '" + inst.module + "'");
    if (inst.module == ast_.name) throw ElabError(inst.loc, "module '" + inst.module + "' instantiates itself");
    const ModuleSig& sig = it->second;
    const auto bound = match_ports(inst, sig);
    std::uint32_t result = 0;
    for (std::size_t p = 0; p < sig.ports.size(); ++p) {
      const auto& port = sig.ports[p];
      const auto* conn = bound[p];
      if (port.dir == PortDir::Input) {
        if (conn == nullptr || !conn->expr)
          throw ElabError(conn ? conn->loc : inst.loc, "input port '" + port.name + "' of instance '" + inst.name +
                                                           "' is not connected");
        continue;
      }
      const std::uint32_t r = result++;
      if (conn == nullptr || !conn->expr) continue;
      std::vector<Piece> pieces;
      collect_pieces(*conn->expr, pieces);
      if (total_width(pieces) != port.width)
        throw ElabError(conn->loc, "width mismatch on port '" + port.name + "': expected " +
                                       std::to_string(port.width) + " bits, connected " +
                                       std::to_string(total_width(pieces)));
      DriverSource src;
      src.from_instance = true;
      src.index = k;
      src.result = r;
      add_drivers(pieces, src, conn->loc);
    }
  }

  ValueRef source_value(const DriverSource& s, Width width) {
    ValueRef base;
    if (s.from_instance) {
      const ValueRef first = instance_value(s.index);
      const auto& op = m_.ops[first.op];
      base = ValueRef{first.op, s.result, op.result_widths[s.result]};
    } else {
      base = assign_value(s.index);
    }
    if (s.offset == 0 && width == base.width) return base;
    return m_.extract(base, s.offset, width);
  }

  ValueRef net_value(Net& n) {
    if (n.state == 2) return n.value;
    if (n.state == 1) throw ElabError(n.loc, "combinational loop through '" + n.name + "'");
    n.state = 1;
    if (n.drivers.empty()) throw ElabError(n.loc, "'" + n.name + "' is used but never driven");
    auto drivers = n.drivers;
    std::sort(drivers.begin(), drivers.end(), [](const Driver& a, const Driver& b) { return a.lo > b.lo; });
    // Coverage check, MSB to LSB.
    Width expect = n.width;
    for (const auto& d : drivers) {
      if (d.lo + d.width != expect)
        throw ElabError(n.loc, "bits [" + std::to_string(expect - 1 + n.bounds.lsb) + ":" +
                                   std::to_string(d.lo + d.width + n.bounds.lsb) + "] of '" + n.name +
                                   "' are never driven");
      expect = d.lo;
    }
    if (expect != 0)
      throw ElabError(n.loc, "bits [" + std::to_string(expect - 1 + n.bounds.lsb) + ":" +
                                 std::to_string(n.bounds.lsb) + "] of '" + n.name + "' are never driven");
    if (drivers.size() == 1) {
      n.value = source_value(drivers[0].source, drivers[0].width);
    } else {
      std::vector<ValueRef> parts;
      for (const auto& d : drivers) parts.push_back(source_value(d.source, d.width));
      n.value = m_.concat(parts);
    }
    n.state = 2;
    return n.value;
  }

  ValueRef assign_value(std::size_t k) {
    if (assign_state_[k] == 2) return assign_values_[k];
    const AssignAst& a = ast_.assigns[k];
    if (assign_state_[k] == 1) throw ElabError(a.loc, "combinational loop through this assignment");
    assign_state_[k] = 1;
    std::vector<Piece> pieces;
    collect_pieces(a.lhs, pieces);
    const ValueRef v = expr(a.rhs);
    if (v.width != total_width(pieces))
      throw ElabError(a.loc, "width mismatch in assignment: target is " + std::to_string(total_width(pieces)) +
                                 " bits, expression is " + std::to_string(v.width));
    assign_values_[k] = v;
    assign_state_[k] = 2;
    return v;
  }

  ValueRef instance_value(std::size_t k) {
    if (instance_state_[k] == 2) return instance_values_[k];
    const InstanceAst& inst = ast_.instances[k];
    if (instance_state_[k] == 1) throw ElabError(inst.loc, "combinational loop through instance '" + inst.name + "'");
    instance_state_[k] = 1;
    const ModuleSig& sig = sigs_.at(inst.module);
    const auto bound = match_ports(inst, sig);
    Operation op;
    op.kind = OpKind::Instance;
    op.name = inst.name;
    op.callee = inst.module;
    for (std::size_t p = 0; p < sig.ports.size(); ++p) {
      const auto& port = sig.ports[p];
      if (port.dir == PortDir::Output) {
        op.result_widths.push_back(port.width);
        continue;
      }
      const ValueRef v = expr(*bound[p]->expr);
      if (v.width != port.width)
        throw ElabError(bound[p]->loc, "width mismatch on port '" + port.name + "': expected " +
                                           std::to_string(port.width) + " bits, connected " +
                                           std::to_string(v.width));
      op.operands.push_back(v);
    }
    instance_values_[k] = m_.add(std::move(op));
    instance_state_[k] = 2;
    return instance_values_[k];
  }

  ValueRef param_constant(const std::string& name) {
    BitVector v(32, static_cast<std::uint64_t>(params_.at(name)));
    return m_.constant(v);
  }

  ValueRef reduce(OpKind kind, ValueRef v) {
    if (v.width == 1) return v;
    ValueRef acc = m_.extract(v, 0, 1);
    for (Width b = 1; b < v.width; ++b) acc = m_.binary(kind, acc, m_.extract(v, b, 1));
    return acc;
  }

  void require_same_width(const ValueRef& a, const ValueRef& b, const Expr& e) {
    if (a.width != b.width)
      throw ElabError(e.loc, "operand width mismatch for '" + e.name + "': " + std::to_string(a.width) + " vs " +
                                 std::to_string(b.width));
  }

  ValueRef expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Number:
        if (e.literal.truncated)
          diags_.push_back({Severity::Warning, e.loc, "literal truncated to " + std::to_string(e.literal.value.width()) +
                                                         " bits"});
        return m_.constant(e.literal.value);
      case Expr::Kind::Ident: {
        Net* n = lookup(e.name, e.loc);
        if (n == nullptr) return param_constant(e.name);
        return net_value(*n);
      }
      case Expr::Kind::Index: {
        Net* n = lookup(e.name, e.loc);
        if (n == nullptr) throw ElabError(e.loc, "cannot select bits of parameter '" + e.name + "'");
        const Width pos = bit_position(*n, eval_const(e.args[0], params_), e.loc);
        return m_.extract(net_value(*n), pos, 1);
      }
      case Expr::Kind::Range: {
        Net* n = lookup(e.name, e.loc);
        if (n == nullptr) throw ElabError(e.loc, "cannot select bits of parameter '" + e.name + "'");
        const auto hi = eval_const(e.args[0], params_);
        const auto lo = eval_const(e.args[1], params_);
        if (hi < lo) throw ElabError(e.loc, "part-select must be [msb:lsb]");
        const Width l = bit_position(*n, lo, e.loc);
        bit_position(*n, hi, e.loc);
        return m_.extract(net_value(*n), l, static_cast<Width>(hi - lo + 1));
      }
      case Expr::Kind::Concat: {
        std::vector<ValueRef> parts;
        for (const auto& a : e.args) parts.push_back(expr(a));
        return m_.concat(parts);
      }
      case Expr::Kind::Replicate: {
        const auto count = eval_const(e.args[0], params_);
        if (count < 1) throw ElabError(e.args[0].loc, "replication count must be positive");
        std::vector<ValueRef> parts;
        for (std::size_t k = 1; k < e.args.size(); ++k) parts.push_back(expr(e.args[k]));
        const ValueRef inner = parts.size() == 1 ? parts[0] : m_.concat(parts);
        return m_.replicate(inner, static_cast<std::uint32_t>(count));
      }
      case Expr::Kind::Unary: {
        const ValueRef v = expr(e.args[0]);
        const auto& op = e.name;
        if (op == "~") return m_.unary(OpKind::Not, v);
        if (op == "+") return v;
        if (op == "&") return reduce(OpKind::And, v);
        if (op == "|") return reduce(OpKind::Or, v);
        if (op == "^") return reduce(OpKind::Xor, v);
        if (op == "~&") return m_.unary(OpKind::Not, reduce(OpKind::And, v));
        if (op == "~|") return m_.unary(OpKind::Not, reduce(OpKind::Or, v));
        if (op == "~^" || op == "^~") return m_.unary(OpKind::Not, reduce(OpKind::Xor, v));
        if (op == "!" && v.width == 1) return m_.unary(OpKind::Not, v);
        throw ElabError(e.loc, "unsupported construct: unary operator '" + op + "'" +
                                   (op == "!" ? " on a multi-bit operand" : ""));
      }
      case Expr::Kind::Binary: {
        const auto& op = e.name;
        OpKind kind;
        bool invert = false;
        if (op == "&")
          kind = OpKind::And;
        else if (op == "|")
          kind = OpKind::Or;
        else if (op == "^")
          kind = OpKind::Xor;
        else if (op == "~^" || op == "^~") {
          kind = OpKind::Xor;
          invert = true;
        } else if (op == "+")
          kind = OpKind::Add;
        else if (op == "-")
          kind = OpKind::Sub;
        else
          throw ElabError(e.loc, "unsupported construct: operator '" + op + "'");
        const ValueRef a = expr(e.args[0]);
        const ValueRef b = expr(e.args[1]);
        require_same_width(a, b, e);
        const ValueRef r = m_.binary(kind, a, b);
        return invert ? m_.unary(OpKind::Not, r) : r;
      }
      case Expr::Kind::Ternary: {
        const ValueRef c = expr(e.args[0]);
        if (c.width != 1) throw ElabError(e.args[0].loc, "condition of '?:' must be 1 bit, got " + std::to_string(c.width));
        const ValueRef t = expr(e.args[1]);
        const ValueRef f = expr(e.args[2]);
        if (t.width != f.width)
          throw ElabError(e.loc, "arms of '?:' differ in width: " + std::to_string(t.width) + " vs " +
                                     std::to_string(f.width));
        return m_.mux(c, t, f);
      }
    }
    throw ElabError(e.loc, "unsupported expression");
  }

  const ModuleAst& ast_;
  const std::map<std::string, ModuleSig, std::less<>>& sigs_;
  std::vector<ParseDiagnostic>& diags_;
  ParamTable params_;
  std::map<std::string, Net, std::less<>> nets_;
  HwModule m_;
  std::vector<ValueRef> assign_values_;
  std::vector<int> assign_state_;
  std::vector<ValueRef> instance_values_;
  std::vector<int> instance_state_;
};

ModuleSig signature_of(const ModuleAst& ast) {
  const auto params = eval_params(ast);
  ModuleSig sig;
  sig.is_extern = ast.is_extern;
  for (const auto& p : ast.ports) sig.ports.push_back({p.name, p.dir, eval_range(p.range, params, p.loc).width()});
  return sig;
}

}  // namespace

ParseResult parse_design(const SourceDesign& src) {
  ParseResult result;
  auto error = [&](const SourceLocation& loc, const std::string& msg) {
    result.diagnostics.push_back({Severity::Error, loc, msg});
  };

  std::vector<ModuleAst> asts;
  for (const auto& f : src.files) {
    try {
      auto mods = detail::parse_modules(detail::tokenize(f.text, f.path));
      for (auto& m : mods) asts.push_back(std::move(m));
    } catch (const SyntaxError& e) {
      error(e.loc, e.what());
    }
  }
  if (result.error_count() > 0) return result;
  if (asts.empty()) {
    error(SourceLocation{src.files.empty() ? "<input>" : src.files.front().path, 1, 1}, "no module definitions found");
    return result;
  }

  std::map<std::string, ModuleSig, std::less<>> sigs;
  for (const auto& a : asts) {
    if (sigs.count(a.name)) {
      error(a.loc, "module '" + a.name + "' is defined more than once");
      continue;
    }
    try {
      sigs.emplace(a.name, signature_of(a));
    } catch (const SyntaxError& e) {
      error(e.loc, e.what());
    }
  }
  if (result.error_count() > 0) return result;

  HwDesign design;
  for (const auto& a : asts) {
    try {
      design.modules.push_back(ModuleElaborator(a, sigs, result.diagnostics).run());
    } catch (const SyntaxError& e) {
      error(e.loc, e.what());
    }
  }
  if (result.error_count() > 0) return result;

  // Recursive instantiation is rejected here; the verifier also checks it.
  for (const auto& v : verify(design)) error(SourceLocation{src.files.front().path, 1, 1}, v.module + ": " + v.message);
  if (result.error_count() > 0) return result;

  if (src.top) {
    if (design.find(*src.top) == nullptr) {
      error(SourceLocation{src.files.front().path, 1, 1}, "top module '" + *src.top + "' is not defined");
      return result;
    }
    design.top = *src.top;
  } else {
    std::set<std::string> instantiated;
    for (const auto& m : design.modules)
      for (const auto& op : m.ops)
        if (op.kind == OpKind::Instance) instantiated.insert(op.callee);
    for (const auto& m : design.modules)
      if (!m.is_extern && !instantiated.count(m.name)) design.top = m.name;
    if (design.top.empty()) design.top = design.modules.back().name;
  }
  result.design = std::move(design);
  return result;
}

ParseResult parse_verilog(std::string_view text, std::string path) {
  SourceDesign src;
  src.files.push_back(SourceFile{std::move(path), std::string(text)});
  return parse_design(src);
}

}  // namespace busweaver
