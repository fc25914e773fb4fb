#include "test_support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bwtest {

using namespace busweaver;

HwDesign parse_ok(const std::string& text) {
  auto r = parse_verilog(text, "test.v");
  if (!r.ok()) {
    std::string msg;
    for (const auto& d : r.diagnostics) msg += d.format() + "\n";
    throw std::runtime_error("parse failed:\n" + msg + text);
  }
  return std::move(*r.design);
}

std::string golden_dir() { return BUSWEAVER_GOLDEN_DIR; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::uint64_t mask(Width w) { return w >= 64 ? ~0ULL : ((1ULL << w) - 1); }

struct RefEval {
  const HwDesign& d;

  std::vector<std::uint64_t> run(const HwModule& m, const std::vector<std::uint64_t>& in) {
    std::map<OpId, std::vector<std::uint64_t>> memo;
    std::map<std::string, std::uint64_t> by_name;
    std::size_t k = 0;
    for (const auto& p : m.ports)
      if (p.dir == PortDir::Input) by_name[p.name] = in.at(k++);
    std::function<std::uint64_t(const ValueRef&)> val = [&](const ValueRef& v) -> std::uint64_t {
      auto it = memo.find(v.op);
      if (it == memo.end()) {
        const Operation& op = m.ops[v.op];
        std::vector<std::uint64_t> r;
        auto a = [&](int i) { return val(op.operands[i]); };
        const std::uint64_t w = mask(op.width);
        switch (op.kind) {
          case OpKind::InputRef: r = {by_name.at(op.name)}; break;
          case OpKind::Constant: r = {op.value.to_u64()}; break;
          case OpKind::Extract: r = {(a(0) >> op.low) & w}; break;
          case OpKind::Concat: {
            std::uint64_t acc = 0;
            for (const auto& o : op.operands) acc = (acc << o.width) | val(o);
            r = {acc};
            break;
          }
          case OpKind::Reverse: {
            std::uint64_t x = a(0), y = 0;
            for (Width b = 0; b < op.width; ++b) y |= ((x >> b) & 1) << (op.width - 1 - b);
            r = {y};
            break;
          }
          case OpKind::Replicate: {
            std::uint64_t x = a(0), y = 0;
            for (std::uint32_t c = 0; c < op.count; ++c) y = (y << op.operands[0].width) | x;
            r = {y};
            break;
          }
          case OpKind::And: r = {a(0) & a(1)}; break;
          case OpKind::Or: r = {a(0) | a(1)}; break;
          case OpKind::Xor: r = {a(0) ^ a(1)}; break;
          case OpKind::Not: r = {~a(0) & w}; break;
          case OpKind::Add: r = {(a(0) + a(1)) & w}; break;
          case OpKind::Sub: r = {(a(0) - a(1)) & w}; break;
          case OpKind::Mux: r = {a(0) ? a(1) : a(2)}; break;
          case OpKind::Instance: {
            std::vector<std::uint64_t> args;
            for (const auto& o : op.operands) args.push_back(val(o));
            r = run(*d.find(op.callee), args);
            break;
          }
        }
        it = memo.emplace(v.op, std::move(r)).first;
      }
      return it->second.at(v.result);
    };
    std::vector<std::uint64_t> out;
    for (const auto& o : m.outputs) out.push_back(val(o.value));
    return out;
  }
};

}  // namespace

Outputs reference_eval(const HwDesign& design, const HwModule& module, const Inputs& inputs) {
  std::vector<std::uint64_t> in;
  for (const auto& p : module.input_ports()) in.push_back(inputs.at(p.name) & mask(p.width));
  const auto out = RefEval{design}.run(module, in);
  Outputs o;
  const auto ports = module.output_ports();
  for (std::size_t k = 0; k < ports.size(); ++k) o[ports[k].name] = out[k];
  return o;
}

PortValues to_ports(const HwModule& m, const Inputs& in) {
  PortValues pv;
  for (const auto& p : m.input_ports()) pv.emplace(p.name, BitVector(p.width, in.at(p.name) & mask(p.width)));
  return pv;
}

Outputs from_ports(const PortValues& pv) {
  Outputs o;
  for (const auto& [k, v] : pv) o[k] = v.to_u64();
  return o;
}

void for_each_input(const HwModule& m, const std::function<void(const Inputs&)>& f) {
  const auto ports = m.input_ports();
  Width total = 0;
  for (const auto& p : ports) total += p.width;
  if (total > 20) throw std::invalid_argument("too many input bits to enumerate");
  for (std::uint64_t x = 0; x < (1ULL << total); ++x) {
    Inputs in;
    Width off = 0;
    for (const auto& p : ports) {
      in[p.name] = (x >> off) & mask(p.width);
      off += p.width;
    }
    f(in);
  }
}

Inputs random_inputs(const HwModule& m, std::mt19937_64& rng) {
  Inputs in;
  for (const auto& p : m.input_ports()) in[p.name] = rng() & mask(p.width);
  return in;
}

PermutationCase random_permutation(Width n, std::mt19937_64& rng) {
  PermutationCase c;
  c.pi.resize(n);
  for (Width i = 0; i < n; ++i) c.pi[i] = i;
  std::shuffle(c.pi.begin(), c.pi.end(), rng);
  std::vector<Width> order(n);
  for (Width i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::ostringstream v;
  v << "module perm(input [" << n - 1 << ":0] in, output [" << n - 1 << ":0] out);\n";
  for (Width i : order) v << "  assign out[" << i << "] = in[" << c.pi[i] << "];\n";
  v << "endmodule\n";
  c.verilog = v.str();
  return c;
}

namespace {

char bus_name(int k) { return static_cast<char>('a' + k); }

std::string leaf_text(const ConeTemplate& t, const ConeTemplate::Leaf& l, Width i) {
  using M = ConeTemplate::Mode;
  switch (l.mode) {
    case M::Same: return std::string(1, bus_name(l.bus)) + "[" + std::to_string(i) + "]";
    case M::Reversed: return std::string(1, bus_name(l.bus)) + "[" + std::to_string(t.width - 1 - i) + "]";
    case M::Invariant: return "s[" + std::to_string(l.bit) + "]";
    case M::ConstZero: return "1'b0";
    case M::ConstOne: return "1'b1";
    case M::ConstPattern: return ((l.pattern >> i) & 1) ? "1'b1" : "1'b0";
  }
  return "?";
}

std::string node_text(const ConeTemplate& t, int n, Width i) {
  using K = ConeTemplate::Node::Kind;
  const auto& node = t.nodes[n];
  auto c = [&](int k) { return node_text(t, node.children[k], i); };
  switch (node.kind) {
    case K::Leaf: return leaf_text(t, t.leaves[node.leaf], i);
    case K::Not: return "~" + c(0);
    case K::And: return "(" + c(0) + " & " + c(1) + ")";
    case K::Or: return "(" + c(0) + " | " + c(1) + ")";
    case K::Xor: return "(" + c(0) + " ^ " + c(1) + ")";
    case K::Mux: return "(" + c(0) + " ? " + c(1) + " : " + c(2) + ")";
  }
  return "?";
}

bool eval_node(const ConeTemplate& t, int n, Width i, const Inputs& in) {
  using K = ConeTemplate::Node::Kind;
  using M = ConeTemplate::Mode;
  const auto& node = t.nodes[n];
  auto c = [&](int k) { return eval_node(t, node.children[k], i, in); };
  switch (node.kind) {
    case K::Leaf: {
      const auto& l = t.leaves[node.leaf];
      switch (l.mode) {
        case M::Same: return (in.at(std::string(1, bus_name(l.bus))) >> i) & 1;
        case M::Reversed: return (in.at(std::string(1, bus_name(l.bus))) >> (t.width - 1 - i)) & 1;
        case M::Invariant: return (in.at("s") >> l.bit) & 1;
        case M::ConstZero: return false;
        case M::ConstOne: return true;
        case M::ConstPattern: return (l.pattern >> i) & 1;
      }
      return false;
    }
    case K::Not: return !c(0);
    case K::And: return c(0) && c(1);
    case K::Or: return c(0) || c(1);
    case K::Xor: return c(0) != c(1);
    case K::Mux: return c(0) ? c(1) : c(2);
  }
  return false;
}

}  // namespace

bool ConeTemplate::uses_invariant() const {
  for (const auto& n : nodes)
    if (n.kind == Node::Kind::Leaf && leaves[n.leaf].mode == Mode::Invariant) return true;
  return false;
}

std::string ConeTemplate::verilog(const std::string& module) const {
  std::ostringstream v;
  v << "module " << module << "(\n";
  for (int b = 0; b < buses; ++b) v << "  input [" << width - 1 << ":0] " << bus_name(b) << ",\n";
  if (has_invariant) v << "  input [2:0] s,\n";
  v << "  output [" << width - 1 << ":0] out\n);\n";
  for (Width i = 0; i < width; ++i) v << "  assign out[" << i << "] = " << node_text(*this, 0, i) << ";\n";
  v << "endmodule\n";
  return v.str();
}

std::uint64_t ConeTemplate::expected(const Inputs& in) const {
  std::uint64_t out = 0;
  for (Width i = 0; i < width; ++i) out |= std::uint64_t{eval_node(*this, 0, i, in)} << i;
  return out;
}

ConeTemplate random_cone_template(std::mt19937_64& rng, int max_depth) {
  using K = ConeTemplate::Node::Kind;
  using M = ConeTemplate::Mode;
  ConeTemplate t;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  t.width = static_cast<Width>(pick(2, 8));
  t.buses = pick(1, 2);
  t.has_invariant = pick(0, 1) == 1;
  for (int b = 0; b < t.buses; ++b) t.bus_mode.push_back(pick(0, 3) == 0 ? M::Reversed : M::Same);

  std::function<int(int)> gen = [&](int depth) -> int {
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    const bool leaf = depth >= max_depth || (depth > 0 && pick(0, 2) == 0);
    if (leaf) {
      ConeTemplate::Leaf l;
      const int r = pick(0, 9);
      if (t.has_invariant && r < 2) {
        l.mode = M::Invariant;
        l.bit = static_cast<Width>(pick(0, 2));
      } else if (r == 2) {
        l.mode = pick(0, 1) ? M::ConstOne : M::ConstZero;
      } else if (r == 3) {
        l.mode = M::ConstPattern;
        l.pattern = rng();
      } else {
        l.bus = pick(0, t.buses - 1);
        l.mode = t.bus_mode[l.bus];
      }
      t.nodes[id].kind = K::Leaf;
      t.nodes[id].leaf = static_cast<int>(t.leaves.size());
      t.leaves.push_back(l);
      return id;
    }
    const int k = pick(0, 9);
    const K kind = k < 3 ? K::And : k < 5 ? K::Or : k < 7 ? K::Xor : k < 9 ? K::Not : K::Mux;
    t.nodes[id].kind = kind;
    const int arity = kind == K::Not ? 1 : kind == K::Mux ? 3 : 2;
    for (int c = 0; c < arity; ++c) {
      const int child = gen(depth + 1);
      t.nodes[id].children.push_back(child);
    }
    return id;
  };
  gen(0);
  return t;
}

std::string ripple_adder(Width n, bool carry_in) {
  std::ostringstream v;
  v << "module adder(\n  input [" << n - 1 << ":0] a,\n  input [" << n - 1 << ":0] b,\n";
  if (carry_in) v << "  input cin,\n";
  v << "  output [" << n - 1 << ":0] s\n);\n";
  v << "  wire c0 = " << (carry_in ? "cin" : "1'b0") << ";\n";
  for (Width i = 0; i < n; ++i) {
    v << "  wire p" << i << " = a[" << i << "] ^ b[" << i << "];\n";
    v << "  wire c" << i + 1 << " = (a[" << i << "] & b[" << i << "]) | (c" << i << " & p" << i << ");\n";
    v << "  assign s[" << i << "] = p" << i << " ^ c" << i << ";\n";
  }
  v << "endmodule\n";
  return v.str();
}

}  // namespace bwtest
