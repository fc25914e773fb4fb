#include "busweaver/ir.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace busweaver {

std::string_view op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::InputRef: return "input";
    case OpKind::Constant: return "constant";
    case OpKind::Extract: return "extract";
    case OpKind::Concat: return "concat";
    case OpKind::Reverse: return "reverse";
    case OpKind::Replicate: return "replicate";
    case OpKind::And: return "and";
    case OpKind::Or: return "or";
    case OpKind::Xor: return "xor";
    case OpKind::Not: return "not";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mux: return "mux";
    case OpKind::Instance: return "instance";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// HwModule

std::vector<Port> HwModule::input_ports() const {
  std::vector<Port> out;
  for (const auto& p : ports)
    if (p.dir == PortDir::Input) out.push_back(p);
  return out;
}

std::vector<Port> HwModule::output_ports() const {
  std::vector<Port> out;
  for (const auto& p : ports)
    if (p.dir == PortDir::Output) out.push_back(p);
  return out;
}

std::optional<ValueRef> HwModule::input_value(std::string_view port) const {
  for (OpId i = 0; i < ops.size(); ++i) {
    const auto& o = ops[i];
    if (o.kind == OpKind::InputRef && o.name == port) return ValueRef{i, 0, o.width};
  }
  return std::nullopt;
}

const NamedValue* HwModule::find_output(std::string_view port) const {
  for (const auto& nv : outputs)
    if (nv.name == port) return &nv;
  return nullptr;
}

const NamedValue* HwModule::find_wire(std::string_view wire) const {
  for (const auto& nv : wires)
    if (nv.name == wire) return &nv;
  return nullptr;
}

ValueRef HwModule::add(Operation op) {
  const auto id = static_cast<OpId>(ops.size());
  const Width w = op.kind == OpKind::Instance ? (op.result_widths.empty() ? 0 : op.result_widths[0]) : op.width;
  ops.push_back(std::move(op));
  return ValueRef{id, 0, w};
}

ValueRef HwModule::add_input(const std::string& port_name, Width width) {
  ports.push_back(Port{port_name, PortDir::Input, width});
  Operation op;
  op.kind = OpKind::InputRef;
  op.name = port_name;
  op.width = width;
  return add(std::move(op));
}

void HwModule::add_output(const std::string& port_name, ValueRef value) {
  ports.push_back(Port{port_name, PortDir::Output, value.width});
  outputs.push_back(NamedValue{port_name, value});
}

ValueRef HwModule::constant(const BitVector& value) {
  Operation op;
  op.kind = OpKind::Constant;
  op.width = value.width();
  op.value = value;
  return add(std::move(op));
}

ValueRef HwModule::extract(ValueRef v, std::uint32_t low, Width width) {
  Operation op;
  op.kind = OpKind::Extract;
  op.operands = {v};
  op.low = low;
  op.width = width;
  return add(std::move(op));
}

ValueRef HwModule::concat(const std::vector<ValueRef>& msb_first) {
  Operation op;
  op.kind = OpKind::Concat;
  op.operands = msb_first;
  op.width = 0;
  for (const auto& v : msb_first) op.width += v.width;
  return add(std::move(op));
}

ValueRef HwModule::reverse(ValueRef v) {
  Operation op;
  op.kind = OpKind::Reverse;
  op.operands = {v};
  op.width = v.width;
  return add(std::move(op));
}

ValueRef HwModule::replicate(ValueRef v, std::uint32_t count) {
  Operation op;
  op.kind = OpKind::Replicate;
  op.operands = {v};
  op.count = count;
  op.width = v.width * count;
  return add(std::move(op));
}

ValueRef HwModule::unary(OpKind kind, ValueRef v) {
  Operation op;
  op.kind = kind;
  op.operands = {v};
  op.width = v.width;
  return add(std::move(op));
}

ValueRef HwModule::binary(OpKind kind, ValueRef a, ValueRef b) {
  Operation op;
  op.kind = kind;
  op.operands = {a, b};
  op.width = a.width;
  return add(std::move(op));
}

ValueRef HwModule::mux(ValueRef cond, ValueRef if_true, ValueRef if_false) {
  Operation op;
  op.kind = OpKind::Mux;
  op.operands = {cond, if_true, if_false};
  op.width = if_true.width;
  return add(std::move(op));
}

// ---------------------------------------------------------------------------
// HwDesign

HwModule* HwDesign::find(std::string_view name) {
  for (auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

const HwModule* HwDesign::find(std::string_view name) const {
  for (const auto& m : modules)
    if (m.name == name) return &m;
  return nullptr;
}

std::vector<std::string> HwDesign::bottom_up_order() const {
  std::vector<std::string> order;
  std::unordered_map<std::string, int> state;  // 1 = in progress, 2 = done
  std::function<void(const HwModule&)> visit = [&](const HwModule& m) {
    auto& s = state[m.name];
    if (s != 0) return;
    s = 1;
    for (const auto& op : m.ops) {
      if (op.kind != OpKind::Instance) continue;
      if (const auto* callee = find(op.callee)) visit(*callee);
    }
    state[m.name] = 2;
    order.push_back(m.name);
  };
  for (const auto& m : modules) visit(m);
  return order;
}

// ---------------------------------------------------------------------------
// Counting and metrics

std::uint64_t count_instructions(const HwModule& module) {
  return static_cast<std::uint64_t>(std::count_if(module.ops.begin(), module.ops.end(), [](const Operation& op) {
    return op.kind != OpKind::InputRef;
  }));
}

std::uint64_t count_instructions(const HwDesign& design) {
  std::uint64_t total = 0;
  for (const auto& m : design.modules) total += count_instructions(m);
  return total;
}

std::vector<std::uint32_t> op_depths(const HwModule& module) {
  std::vector<std::uint32_t> depth(module.ops.size(), 0);
  for (OpId i = 0; i < module.ops.size(); ++i) {
    const auto& op = module.ops[i];
    if (op.kind == OpKind::InputRef) continue;
    std::uint32_t d = 0;
    for (const auto& v : op.operands)
      if (v.op < i) d = std::max(d, depth[v.op]);
    depth[i] = d + 1;
  }
  return depth;
}

IrMetrics metrics(const HwModule& module) {
  IrMetrics m;
  for (const auto& op : module.ops) {
    if (op.kind == OpKind::InputRef) continue;
    ++m.op_count;
    m.edge_count += op.operands.size();
  }
  for (auto d : op_depths(module)) m.max_depth = std::max<std::uint64_t>(m.max_depth, d);
  return m;
}

std::vector<std::uint32_t> use_counts(const HwModule& module) {
  std::vector<std::uint32_t> uses(module.ops.size(), 0);
  for (const auto& op : module.ops)
    for (const auto& v : op.operands)
      if (v.op < uses.size()) ++uses[v.op];
  return uses;
}

// ---------------------------------------------------------------------------
// Verifier

namespace {

class ModuleVerifier {
public:
  ModuleVerifier(const HwModule& m, const HwDesign* d, std::vector<Violation>& out) : m_(m), design_(d), out_(out) {}

  void run() {
    if (m_.is_extern) {
      if (!m_.ops.empty()) fail("extern module has a body");
      return;
    }
    check_ports();
    bool refs_ok = true;
    for (OpId i = 0; i < m_.ops.size(); ++i) refs_ok &= check_refs(i);
    if (!refs_ok) return;
    const bool acyclic = check_acyclic();
    for (OpId i = 0; i < m_.ops.size(); ++i) {
      if (acyclic) {
        for (const auto& v : m_.ops[i].operands)
          if (v.op >= i) fail(where(i) + "operand %" + std::to_string(v.op) + " used before its definition");
      }
      check_op(i);
    }
    check_bindings();
  }

private:
  void fail(std::string msg) { out_.push_back(Violation{m_.name, std::move(msg)}); }
  static std::string where(OpId i) { return "%" + std::to_string(i) + ": "; }

  void check_ports() {
    std::set<std::string> names;
    for (const auto& p : m_.ports) {
      if (!names.insert(p.name).second) fail("duplicate port '" + p.name + "'");
      if (p.width == 0) fail("port '" + p.name + "' has zero width");
    }
    for (const auto& p : m_.input_ports()) {
      int n = 0;
      for (const auto& op : m_.ops)
        if (op.kind == OpKind::InputRef && op.name == p.name) {
          ++n;
          if (op.width != p.width) fail("input '" + p.name + "' width disagrees with its port");
        }
      if (n != 1) fail("input port '" + p.name + "' must have exactly one input operation");
    }
  }

  bool check_ref(const ValueRef& v, const std::string& ctx) {
    if (!v.valid() || v.op >= m_.ops.size()) {
      fail(ctx + "reference to undefined value");
      return false;
    }
    const auto& d = m_.ops[v.op];
    if (v.result >= d.result_count()) {
      fail(ctx + "result index out of range");
      return false;
    }
    if (d.result_width(v.result) != v.width) {
      fail(ctx + "value width " + std::to_string(v.width) + " disagrees with definition width " +
           std::to_string(d.result_width(v.result)));
    }
    return true;
  }

  bool check_refs(OpId i) {
    bool ok = true;
    for (const auto& v : m_.ops[i].operands) ok &= check_ref(v, where(i));
    return ok;
  }

  bool check_acyclic() {
    std::vector<std::uint8_t> color(m_.ops.size(), 0);
    for (OpId start = 0; start < m_.ops.size(); ++start) {
      if (color[start] != 0) continue;
      std::vector<std::pair<OpId, std::size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const auto& operands = m_.ops[id].operands;
        if (next == operands.size()) {
          color[id] = 2;
          stack.pop_back();
          continue;
        }
        const OpId child = operands[next++].op;
        if (color[child] == 1) {
          fail(where(child) + "combinational cycle through this operation");
          return false;
        }
        if (color[child] == 0) {
          color[child] = 1;
          stack.emplace_back(child, 0);
        }
      }
    }
    return true;
  }

  void expect_operands(OpId i, std::size_t n) {
    if (m_.ops[i].operands.size() != n)
      fail(where(i) + std::string(op_kind_name(m_.ops[i].kind)) + " expects " + std::to_string(n) + " operands");
  }

  void check_op(OpId i) {
    const auto& op = m_.ops[i];
    const auto& ops = op.operands;
    auto width_of = [&](std::size_t k) { return k < ops.size() ? ops[k].width : 0u; };
    if (op.kind != OpKind::Instance && op.width == 0) fail(where(i) + "zero-width value");
    switch (op.kind) {
      case OpKind::InputRef:
        expect_operands(i, 0);
        break;
      case OpKind::Constant:
        expect_operands(i, 0);
        if (op.value.width() != op.width) fail(where(i) + "constant literal width disagrees with result width");
        break;
      case OpKind::Extract:
        expect_operands(i, 1);
        if (op.low + op.width > width_of(0)) fail(where(i) + "extract range exceeds operand width");
        break;
      case OpKind::Concat: {
        if (ops.empty()) fail(where(i) + "concat without operands");
        Width sum = 0;
        for (const auto& v : ops) sum += v.width;
        if (sum != op.width)
          fail(where(i) + "concat width " + std::to_string(op.width) + " is not the operand sum " + std::to_string(sum));
        break;
      }
      case OpKind::Reverse:
      case OpKind::Not:
        expect_operands(i, 1);
        if (width_of(0) != op.width) fail(where(i) + "result width must equal operand width");
        break;
      case OpKind::Replicate:
        expect_operands(i, 1);
        if (op.count == 0 || width_of(0) * op.count != op.width) fail(where(i) + "replicate width mismatch");
        break;
      case OpKind::And:
      case OpKind::Or:
      case OpKind::Xor:
      case OpKind::Add:
      case OpKind::Sub:
        expect_operands(i, 2);
        if (width_of(0) != op.width || width_of(1) != op.width) fail(where(i) + "binary operand width mismatch");
        break;
      case OpKind::Mux:
        expect_operands(i, 3);
        if (width_of(0) != 1) fail(where(i) + "mux condition must be 1 bit");
        if (width_of(1) != op.width || width_of(2) != op.width) fail(where(i) + "mux arm width mismatch");
        break;
      case OpKind::Instance:
        check_instance(i);
        break;
    }
  }

  void check_instance(OpId i) {
    const auto& op = m_.ops[i];
    if (design_ == nullptr) return;
    const HwModule* callee = design_->find(op.callee);
    if (callee == nullptr) {
      fail(where(i) + "instance '" + op.name + "' references unknown module '" + op.callee + "'");
      return;
    }
    const auto ins = callee->input_ports();
    const auto outs = callee->output_ports();
    if (ins.size() != op.operands.size()) {
      fail(where(i) + "instance '" + op.name + "' input count disagrees with '" + op.callee + "'");
    } else {
      for (std::size_t k = 0; k < ins.size(); ++k)
        if (ins[k].width != op.operands[k].width)
          fail(where(i) + "instance '" + op.name + "' port '" + ins[k].name + "' width mismatch");
    }
    if (outs.size() != op.result_widths.size()) {
      fail(where(i) + "instance '" + op.name + "' output count disagrees with '" + op.callee + "'");
    } else {
      for (std::size_t k = 0; k < outs.size(); ++k)
        if (outs[k].width != op.result_widths[k])
          fail(where(i) + "instance '" + op.name + "' port '" + outs[k].name + "' width mismatch");
    }
  }

  void check_bindings() {
    const auto outs = m_.output_ports();
    if (outs.size() != m_.outputs.size()) {
      fail("output binding count disagrees with port list");
      return;
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
      const auto& b = m_.outputs[k];
      if (b.name != outs[k].name) fail("output binding '" + b.name + "' out of port order");
      if (check_ref(b.value, "output '" + b.name + "': ") && b.value.width != outs[k].width)
        fail("output '" + b.name + "' width mismatch");
    }
    for (const auto& w : m_.wires) check_ref(w.value, "wire '" + w.name + "': ");
  }

  const HwModule& m_;
  const HwDesign* design_;
  std::vector<Violation>& out_;
};

}  // namespace

std::vector<Violation> verify_module(const HwModule& module, const HwDesign* design) {
  std::vector<Violation> out;
  ModuleVerifier(module, design, out).run();
  return out;
}

std::vector<Violation> verify(const HwDesign& design) {
  std::vector<Violation> out;
  std::set<std::string> names;
  for (const auto& m : design.modules) {
    if (!names.insert(m.name).second) out.push_back({m.name, "duplicate module name"});
    auto v = verify_module(m, &design);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (!design.top.empty() && design.find(design.top) == nullptr)
    out.push_back({design.top, "top module is not defined"});

  // Instantiation graph must be acyclic.
  std::unordered_map<std::string, int> color;
  std::function<bool(const HwModule&)> visit = [&](const HwModule& m) {
    color[m.name] = 1;
    for (const auto& op : m.ops) {
      if (op.kind != OpKind::Instance) continue;
      const HwModule* c = design.find(op.callee);
      if (c == nullptr) continue;
      if (color[c->name] == 1) {
        out.push_back({m.name, "recursive instantiation of '" + c->name + "'"});
        return false;
      }
      if (color[c->name] == 0 && !visit(*c)) return false;
    }
    color[m.name] = 2;
    return true;
  };
  for (const auto& m : design.modules)
    if (color[m.name] == 0 && !visit(m)) break;
  return out;
}

// ---------------------------------------------------------------------------
// Dump

namespace {
std::string ref_text(const ValueRef& v, const HwModule& m) {
  std::string s = "%" + std::to_string(v.op);
  if (v.op < m.ops.size() && m.ops[v.op].kind == OpKind::Instance) s += "#" + std::to_string(v.result);
  return s;
}
}  // namespace

std::string dump_module(const HwModule& m) {
  std::ostringstream os;
  os << (m.is_extern ? "extern module " : "module ") << m.name << "(";
  bool first = true;
  for (const auto& p : m.input_ports()) {
    os << (first ? "" : ", ") << p.name << ": i" << p.width;
    first = false;
  }
  os << ") -> (";
  first = true;
  for (const auto& p : m.output_ports()) {
    os << (first ? "" : ", ") << p.name << ": i" << p.width;
    first = false;
  }
  os << ")\n";
  for (OpId i = 0; i < m.ops.size(); ++i) {
    const auto& op = m.ops[i];
    os << "  %" << i << " = " << op_kind_name(op.kind) << "(";
    std::vector<std::string> args;
    switch (op.kind) {
      case OpKind::InputRef: args.push_back(op.name); break;
      case OpKind::Constant: args.push_back(std::to_string(op.width) + "'b" + op.value.to_binary()); break;
      case OpKind::Instance: args.push_back(op.callee + " " + op.name); break;
      default: break;
    }
    for (const auto& v : op.operands) args.push_back(ref_text(v, m));
    if (op.kind == OpKind::Extract) args.push_back(std::to_string(op.low));
    if (op.kind == OpKind::Replicate) args.push_back(std::to_string(op.count));
    for (std::size_t k = 0; k < args.size(); ++k) os << (k ? ", " : "") << args[k];
    os << ") : ";
    if (op.kind == OpKind::Instance) {
      os << "(";
      for (std::size_t k = 0; k < op.result_widths.size(); ++k) os << (k ? ", " : "") << "i" << op.result_widths[k];
      os << ")";
    } else {
      os << "i" << op.width;
    }
    if (op.from_inline) os << " inlined";
    os << "\n";
  }
  for (const auto& w : m.wires) os << "  wire " << w.name << " = " << ref_text(w.value, m) << "\n";
  for (const auto& o : m.outputs) os << "  output " << o.name << " = " << ref_text(o.value, m) << "\n";
  os << "endmodule\n";
  return os.str();
}

std::string dump_design(const HwDesign& design) {
  std::string s;
  for (const auto& m : design.modules) s += dump_module(m);
  return s;
}

// ---------------------------------------------------------------------------
// Compaction

namespace {
ValueRef follow(const std::unordered_map<ValueRef, ValueRef, ValueRefHash>& repl, ValueRef v) {
  for (std::size_t guard = 0; guard <= repl.size(); ++guard) {
    auto it = repl.find(v);
    if (it == repl.end()) return v;
    v = it->second;
  }
  throw std::logic_error("cyclic value replacement");
}
}  // namespace

void compact_module(HwModule& m, const std::unordered_map<ValueRef, ValueRef, ValueRefHash>& replacements,
                    const std::vector<bool>& erased) {
  auto is_erased = [&](OpId id) { return id < erased.size() && erased[id]; };
  const std::size_t n = m.ops.size();
  for (auto& op : m.ops)
    for (auto& v : op.operands) v = follow(replacements, v);
  for (auto& b : m.outputs) b.value = follow(replacements, b.value);
  for (auto& b : m.wires) b.value = follow(replacements, b.value);

  std::vector<OpId> order;
  order.reserve(n);
  std::vector<std::uint8_t> seen(n, 0);
  auto visit = [&](OpId root) {
    if (root >= n || seen[root]) return;
    std::vector<std::pair<OpId, std::size_t>> stack{{root, 0}};
    seen[root] = 1;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& operands = m.ops[id].operands;
      if (next < operands.size()) {
        const OpId child = operands[next++].op;
        if (!seen[child]) {
          seen[child] = 1;
          stack.emplace_back(child, 0);
        }
        continue;
      }
      order.push_back(id);
      stack.pop_back();
    }
  };

  // Inputs first, in port order.
  {
    std::unordered_map<std::string_view, OpId> inputs;
    for (OpId i = 0; i < n; ++i)
      if (m.ops[i].kind == OpKind::InputRef) inputs.emplace(m.ops[i].name, i);
    for (const auto& p : m.ports) {
      if (p.dir != PortDir::Input) continue;
      if (auto it = inputs.find(p.name); it != inputs.end()) visit(it->second);
    }
  }
  for (const auto& b : m.outputs) visit(b.value.op);
  for (const auto& b : m.wires) visit(b.value.op);
  for (OpId i = 0; i < n; ++i)
    if (m.ops[i].kind == OpKind::Instance && !is_erased(i)) visit(i);

  std::vector<OpId> remap(n, kNoOp);
  for (OpId k = 0; k < order.size(); ++k) remap[order[k]] = k;
  std::vector<Operation> ops;
  ops.reserve(order.size());
  for (OpId old : order) {
    Operation op = std::move(m.ops[old]);
    for (auto& v : op.operands) v.op = remap[v.op];
    ops.push_back(std::move(op));
  }
  m.ops = std::move(ops);
  for (auto& b : m.outputs) b.value.op = remap[b.value.op];
  for (auto& b : m.wires) b.value.op = remap[b.value.op];
}

// ---------------------------------------------------------------------------
// ModuleRewriter

void ModuleRewriter::replace_all_uses(ValueRef from, ValueRef to) {
  if (from.same_value(to)) return;
  replacements_[from] = to;
}

void ModuleRewriter::erase(OpId op) {
  if (erased_.size() <= op) erased_.resize(op + 1, false);
  erased_[op] = true;
  any_erased_ = true;
}

ValueRef ModuleRewriter::resolve(ValueRef v) const { return follow(replacements_, v); }

void ModuleRewriter::finish() {
  compact_module(module_, replacements_, erased_);
  replacements_.clear();
  erased_.clear();
  any_erased_ = false;
}

}  // namespace busweaver
