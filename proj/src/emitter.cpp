#include "busweaver/emitter.hpp"

#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>

namespace busweaver {

namespace {

constexpr std::uint32_t kMaxInlineDepth = 32;

std::string range_decl(Width w) { return w == 1 ? "" : "[" + std::to_string(w - 1) + ":0] "; }

std::string literal(const BitVector& v) {
  if (v.width() <= 16) return std::to_string(v.width()) + "'b" + v.to_binary();
  return std::to_string(v.width()) + "'h" + v.to_hex();
}

bool is_binary(OpKind k) {
  return k == OpKind::And || k == OpKind::Or || k == OpKind::Xor || k == OpKind::Add || k == OpKind::Sub;
}

std::string_view binary_symbol(OpKind k) {
  switch (k) {
    case OpKind::And: return "&";
    case OpKind::Or: return "|";
    case OpKind::Xor: return "^";
    case OpKind::Add: return "+";
    case OpKind::Sub: return "-";
    default: return "?";
  }
}

class ModuleEmitter {
public:
  ModuleEmitter(const HwModule& m, const HwDesign* d) : m_(m), design_(d) {}

  std::string run() {
    header();
    if (m_.is_extern) return os_.str();
    assign_names();
    declarations();
    statements();
    os_ << "endmodule\n";
    return os_.str();
  }

private:
  void header() {
    os_ << (m_.is_extern ? "extern module " : "module ") << m_.name << "(";
    auto port_text = [](const Port& p) {
      return std::string(p.dir == PortDir::Input ? "input " : "output ") + range_decl(p.width) + p.name;
    };
    if (m_.ports.size() <= 2) {
      for (std::size_t k = 0; k < m_.ports.size(); ++k) os_ << (k ? ", " : "") << port_text(m_.ports[k]);
      os_ << ");\n";
    } else {
      os_ << "\n";
      for (std::size_t k = 0; k < m_.ports.size(); ++k)
        os_ << "  " << port_text(m_.ports[k]) << (k + 1 < m_.ports.size() ? "," : "") << "\n";
      os_ << ");\n";
    }
  }

  std::string key(const ValueRef& v) const { return std::to_string(v.op) + "#" + std::to_string(v.result); }

  void assign_names() {
    const std::size_t n = m_.ops.size();
    for (const auto& p : m_.ports) taken_.insert(p.name);
    for (const auto& w : m_.wires) taken_.insert(w.name);
    for (const auto& op : m_.ops)
      if (op.kind == OpKind::Instance) taken_.insert(op.name);

    for (OpId i = 0; i < n; ++i)
      if (m_.ops[i].kind == OpKind::InputRef) owner_[key(ValueRef{i, 0, m_.ops[i].width})] = m_.ops[i].name;
    for (const auto& o : m_.outputs) owner_.try_emplace(key(o.value), o.name);
    for (const auto& w : m_.wires) owner_.try_emplace(key(w.value), w.name);

    const auto uses = use_counts(m_);
    std::set<std::string> read;
    for (const auto& op : m_.ops)
      for (const auto& v : op.operands) read.insert(key(v));
    std::vector<bool> need(n, false);
    for (OpId i = 0; i < n; ++i) {
      const auto& op = m_.ops[i];
      if (op.kind == OpKind::Instance) {
        // Results that feed an operation are named; unused ones are left open.
        for (std::uint32_t r = 0; r < op.result_widths.size(); ++r) {
          const ValueRef v{i, r, op.result_widths[r]};
          if (!owner_.count(key(v)) && read.count(key(v))) temp_results_.push_back(v);
        }
        continue;
      }
      if (uses[i] > 1 && op.kind != OpKind::Constant && op.kind != OpKind::Extract && op.kind != OpKind::InputRef)
        need[i] = true;
      if (op.kind == OpKind::Extract || op.kind == OpKind::Reverse) need[op.operands[0].op] = true;
    }
    std::vector<std::uint32_t> depth(n, 0);
    for (OpId i = 0; i < n; ++i) {
      const auto& op = m_.ops[i];
      if (op.kind == OpKind::Instance) continue;
      const bool named = owner_.count(key(ValueRef{i, 0, op.width})) > 0;
      if (need[i] && !named && op.kind != OpKind::InputRef) {
        // Extract and Reverse only read named values, so their operands get wires.
        make_temp(ValueRef{i, 0, op.width});
        continue;
      }
      if (named) continue;
      std::uint32_t d = 0;
      for (const auto& v : op.operands) d = std::max(d, depth[v.op]);
      depth[i] = d + 1;
      if (depth[i] > kMaxInlineDepth) {
        make_temp(ValueRef{i, 0, op.width});
        depth[i] = 0;
      }
    }
    for (const auto& v : temp_results_) make_temp(v);
  }

  void make_temp(const ValueRef& v) {
    std::string base = "_v" + std::to_string(v.op);
    if (m_.ops[v.op].kind == OpKind::Instance) base += "_" + std::to_string(v.result);
    std::string name = base;
    for (int k = 1; taken_.count(name); ++k) name = base + "_" + std::to_string(k);
    taken_.insert(name);
    owner_[key(v)] = name;
    temps_.push_back({name, v});
  }

  const std::string* name_of(const ValueRef& v) const {
    auto it = owner_.find(key(v));
    return it == owner_.end() ? nullptr : &it->second;
  }

  void declarations() {
    for (const auto& w : m_.wires) os_ << "  wire " << range_decl(w.value.width) << w.name << ";\n";
    for (const auto& t : temps_) os_ << "  wire " << range_decl(t.value.width) << t.name << ";\n";
  }

  std::string select(const ValueRef& src, Width low, Width width) const {
    const std::string& name = *name_of(src);
    if (low == 0 && width == src.width) return name;
    if (width == 1) return name + "[" + std::to_string(low) + "]";
    return name + "[" + std::to_string(low + width - 1) + ":" + std::to_string(low) + "]";
  }

  // `nested` asks for parentheses around binary and ternary forms.
  std::string expr(const ValueRef& v, bool nested) const {
    if (const std::string* n = name_of(v)) return *n;
    return body(m_.ops[v.op], nested);
  }

  std::string body(const Operation& op, bool nested) const {
    auto wrap = [&](std::string s) { return nested ? "(" + s + ")" : s; };
    switch (op.kind) {
      case OpKind::InputRef: return op.name;
      case OpKind::Constant: return literal(op.value);
      case OpKind::Extract: return select(op.operands[0], op.low, op.width);
      case OpKind::Reverse: {
        const ValueRef& src = op.operands[0];
        if (src.width == 1) return *name_of(src);
        std::string s = "{";
        for (Width b = 0; b < src.width; ++b) s += (b ? ", " : "") + select(src, b, 1);
        return s + "}";
      }
      case OpKind::Concat: {
        std::string s = "{";
        for (std::size_t k = 0; k < op.operands.size(); ++k) s += (k ? ", " : "") + expr(op.operands[k], false);
        return s + "}";
      }
      case OpKind::Replicate: {
        const ValueRef& src = op.operands[0];
        const OpKind k = m_.ops[src.op].kind;
        const bool braced = name_of(src) == nullptr && (k == OpKind::Concat || (k == OpKind::Reverse && src.width > 1));
        const std::string inner = expr(src, false);
        return "{" + std::to_string(op.count) + (braced ? inner : "{" + inner + "}") + "}";
      }
      case OpKind::Not: return "~" + expr(op.operands[0], true);
      case OpKind::Mux:
        return wrap(expr(op.operands[0], true) + " ? " + expr(op.operands[1], true) + " : " + expr(op.operands[2], true));
      case OpKind::Instance: return "?";
      default:
        if (is_binary(op.kind))
          return wrap(expr(op.operands[0], true) + " " + std::string(binary_symbol(op.kind)) + " " +
                      expr(op.operands[1], true));
        return "?";
    }
  }

  void instance(OpId id) {
    const auto& op = m_.ops[id];
    const HwModule* callee = design_ ? design_->find(op.callee) : nullptr;
    std::vector<std::string> conns;
    std::size_t in = 0;
    std::uint32_t out = 0;
    if (callee != nullptr) {
      for (const auto& p : callee->ports) {
        if (p.dir == PortDir::Input) {
          conns.push_back("." + p.name + "(" + expr(op.operands.at(in++), false) + ")");
        } else {
          const std::string* n = name_of(ValueRef{id, out, op.result_widths.at(out)});
          ++out;
          conns.push_back("." + p.name + "(" + (n ? *n : "") + ")");
        }
      }
    } else {
      for (const auto& v : op.operands) conns.push_back(expr(v, false));
      for (; out < op.result_widths.size(); ++out) {
        const std::string* n = name_of(ValueRef{id, out, op.result_widths[out]});
        conns.push_back(n ? *n : "");
      }
    }
    os_ << "  " << op.callee << " " << op.name << "(";
    if (conns.size() <= 2) {
      for (std::size_t k = 0; k < conns.size(); ++k) os_ << (k ? ", " : "") << conns[k];
      os_ << ");\n";
    } else {
      os_ << "\n";
      for (std::size_t k = 0; k < conns.size(); ++k) os_ << "    " << conns[k] << (k + 1 < conns.size() ? "," : "") << "\n";
      os_ << "  );\n";
    }
  }

  void statements() {
    for (OpId i = 0; i < m_.ops.size(); ++i) {
      const auto& op = m_.ops[i];
      if (op.kind == OpKind::InputRef) continue;
      if (op.kind == OpKind::Instance) {
        instance(i);
        continue;
      }
      const ValueRef v{i, 0, op.width};
      if (const std::string* n = name_of(v)) os_ << "  assign " << *n << " = " << body(op, false) << ";\n";
    }
    auto alias = [&](const NamedValue& b) {
      const std::string& owner = *name_of(b.value);
      if (owner != b.name) os_ << "  assign " << b.name << " = " << owner << ";\n";
    };
    for (const auto& o : m_.outputs) alias(o);
    for (const auto& w : m_.wires) alias(w);
  }

  struct Temp {
    std::string name;
    ValueRef value;
  };

  const HwModule& m_;
  const HwDesign* design_;
  std::ostringstream os_;
  std::set<std::string> taken_;
  std::unordered_map<std::string, std::string> owner_;
  std::vector<Temp> temps_;
  std::vector<ValueRef> temp_results_;
};

}  // namespace

std::string emit_module(const HwModule& module, const HwDesign* design) { return ModuleEmitter(module, design).run(); }

std::string emit_design(const HwDesign& design) {
  std::string out;
  for (std::size_t k = 0; k < design.modules.size(); ++k) {
    if (k) out += "\n";
    out += emit_module(design.modules[k], &design);
  }
  return out;
}

std::string emit_ir_dump(const HwDesign& design) { return dump_design(design); }

std::string output_path_for(const std::string& input_path, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path in(input_path);
  const std::string file = in.stem().string() + ".vec.v";
  return ((out_dir.empty() ? in.parent_path() : fs::path(out_dir)) / file).string();
}

}  // namespace busweaver
