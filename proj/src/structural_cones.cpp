#include "busweaver/structural_cones.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace busweaver {

namespace {

std::uint64_t node_key(OpId op, Width bit) { return (std::uint64_t{op} << 32) | bit; }

std::uint64_t leaf_key(const ValueRef& v, Width bit) { return (std::uint64_t{v.op} << 32) | bit; }

char kind_tag(OpKind k) {
  switch (k) {
    case OpKind::And: return '&';
    case OpKind::Or: return '|';
    case OpKind::Xor: return '^';
    case OpKind::Not: return '~';
    case OpKind::Mux: return '?';
    default: return '!';
  }
}

}  // namespace

std::string LogicCone::skeleton() const {
  std::string s;
  if (root_is_leaf) {
    s = leaves.empty() ? "" : (leaves[0].is_constant ? "c0" : "i0");
    return s;
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k) s += ';';
    s += kind_tag(nodes[k].kind);
    s += '(';
    for (std::size_t c = 0; c < nodes[k].children.size(); ++c) {
      if (c) s += ',';
      const int ch = nodes[k].children[c];
      if (ch >= 0) {
        s += 'n' + std::to_string(ch);
      } else {
        const auto& leaf = leaves[static_cast<std::size_t>(-ch - 1)];
        s += (leaf.is_constant ? 'c' : 'i') + std::to_string(-ch - 1);
      }
    }
    s += ')';
  }
  return s;
}

LogicCone backward_cone(const HwModule& module, BitRef root, ConeStats* stats) {
  BitTracer t(module);
  return backward_cone(t, root, stats);
}

LogicCone backward_cone(BitTracer& tracer, BitRef root, ConeStats* stats) {
  const HwModule& m = tracer.module();
  LogicCone cone;
  cone.root = root;
  std::unordered_map<std::uint64_t, int> node_index;
  std::unordered_map<std::uint64_t, int> slot_index;
  ConeStats local;
  ConeStats& st = stats ? *stats : local;

  auto fail = [&](std::string why) {
    cone.analyzable = false;
    cone.failure = std::move(why);
  };

  // Resolves an operand bit to a child reference, creating a node or a leaf.
  // Returns the child code and, for new nodes, sets `fresh`.
  auto child_of = [&](ValueRef v, Width bit, bool& fresh) -> int {
    fresh = false;
    const std::uint64_t before = tracer.visits();
    const BitRef r = tracer.resolve(v, bit);
    st.edge_visits += 1 + (tracer.visits() - before);
    const Operation& op = m.ops[r.value.op];
    if (op.kind == OpKind::InputRef || op.kind == OpKind::Constant) {
      const auto key = leaf_key(r.value, r.bit);
      auto it = slot_index.find(key);
      if (it != slot_index.end()) return -it->second - 1;
      const int s = static_cast<int>(cone.leaves.size());
      const bool is_const = op.kind == OpKind::Constant;
      cone.leaves.push_back(ConeLeaf{r.value, r.bit, is_const, is_const && op.value.get(r.bit)});
      slot_index.emplace(key, s);
      return -s - 1;
    }
    const auto key = node_key(r.value.op, r.bit);
    auto it = node_index.find(key);
    if (it != node_index.end()) return it->second;
    const int n = static_cast<int>(cone.nodes.size());
    ConeNode node;
    node.op = r.value.op;
    node.bit = r.bit;
    if (op.kind == OpKind::Instance) {
      fail("cone reaches instance '" + op.name + "'");
    } else if (is_arithmetic(op.kind)) {
      if (op.width != 1) fail("cone reaches multi-bit arithmetic");
      node.kind = OpKind::Xor;
    } else {
      node.kind = op.kind;
    }
    cone.nodes.push_back(std::move(node));
    node_index.emplace(key, n);
    fresh = true;
    return n;
  };

  bool fresh = false;
  const int top = child_of(root.value, root.bit, fresh);
  if (top < 0) {
    cone.root_is_leaf = true;
    return cone;
  }
  if (!cone.analyzable) return cone;

  // Iterative DFS; children are numbered when first reached, which yields a
  // preorder because each new node is expanded before its next sibling.
  struct Frame {
    int node;
    std::size_t next;
  };
  std::vector<Frame> stack{{top, 0}};
  ++st.node_visits;
  while (!stack.empty()) {
    Frame& f = stack.back();
    const ConeNode& node = cone.nodes[static_cast<std::size_t>(f.node)];
    const Operation& op = m.ops[node.op];
    if (f.next == op.operands.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t k = f.next++;
    // Mux select is bit 0 of a 1-bit operand; every other operand is read at
    // the node's own bit.
    const Width bit = (op.kind == OpKind::Mux && k == 0) ? 0 : node.bit;
    const int idx = f.node;
    const int ch = child_of(op.operands[k], bit, fresh);
    cone.nodes[static_cast<std::size_t>(idx)].children.push_back(ch);
    if (!cone.analyzable) return cone;
    if (fresh) {
      ++st.node_visits;
      stack.push_back({ch, 0});
    }
  }
  return cone;
}

bool is_independent(const std::vector<const LogicCone*>& cones) {
  std::unordered_set<std::uint64_t> seen;
  for (const auto* c : cones)
    for (const auto& n : c->nodes)
      if (!seen.insert(node_key(n.op, n.bit)).second) return false;
  return true;
}

bool is_independent(const std::vector<LogicCone>& cones) {
  std::vector<const LogicCone*> ptrs;
  for (const auto& c : cones) ptrs.push_back(&c);
  return is_independent(ptrs);
}

std::optional<ConeShape> is_isomorphic(const std::vector<const LogicCone*>& cones, std::string* why) {
  auto fail = [&](std::string msg) -> std::optional<ConeShape> {
    if (why) *why = std::move(msg);
    return std::nullopt;
  };
  if (cones.empty()) return fail("no cones");
  ConeShape shape;
  shape.skeleton = cones[0]->skeleton();
  for (std::size_t k = 1; k < cones.size(); ++k)
    if (cones[k]->skeleton() != shape.skeleton)
      return fail("cone " + std::to_string(k) + " differs in shape from cone 0");

  const std::size_t n = cones.size();
  const std::size_t slots = cones[0]->leaves.size();
  for (std::size_t s = 0; s < slots; ++s) {
    SlotProgression p;
    const ConeLeaf& first = cones[0]->leaves[s];
    if (first.is_constant) {
      bool equal = true;
      p.constant = BitVector(static_cast<Width>(n));
      for (std::size_t k = 0; k < n; ++k) {
        const ConeLeaf& l = cones[k]->leaves[s];
        p.constant.set(static_cast<Width>(k), l.constant_value);
        equal &= l.constant_value == first.constant_value;
      }
      if (equal) {
        p.kind = SlotProgression::Kind::Invariant;
        p.invariant = first;
      } else {
        p.kind = SlotProgression::Kind::ConstantVector;
      }
      shape.slots.push_back(std::move(p));
      continue;
    }
    bool same = true;
    for (std::size_t k = 0; k < n; ++k) {
      const ConeLeaf& l = cones[k]->leaves[s];
      if (!l.source.same_value(first.source))
        return fail("slot " + std::to_string(s) + " reads different sources in cones 0 and " + std::to_string(k));
      same &= l.bit == first.bit;
    }
    // A lone cone has nothing to compare against: its input slots form a
    // one-bit window.
    if (same && n > 1) {
      p.kind = SlotProgression::Kind::Invariant;
      p.invariant = first;
      shape.slots.push_back(std::move(p));
      continue;
    }
    p.kind = SlotProgression::Kind::Varying;
    p.source = first.source;
    for (std::size_t k = 0; k < n; ++k) p.bits.push_back(cones[k]->leaves[s].bit);
    std::vector<Width> sorted = p.bits;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < n; ++k)
      if (sorted[k] != sorted[0] + k)
        return fail("slot " + std::to_string(s) + " bits do not advance by one per output bit");
    shape.slots.push_back(std::move(p));
  }
  return shape;
}

std::optional<ConeShape> is_isomorphic(const std::vector<LogicCone>& cones, std::string* why) {
  std::vector<const LogicCone*> ptrs;
  for (const auto& c : cones) ptrs.push_back(&c);
  return is_isomorphic(ptrs, why);
}

std::vector<std::vector<Width>> extract_permutation(const ConeShape& shape) {
  std::vector<std::vector<Width>> out;
  for (const auto& s : shape.slots) out.push_back(s.kind == SlotProgression::Kind::Varying ? s.bits : std::vector<Width>{});
  return out;
}

ValueRef build_vector_expr(HwModule& m, const LogicCone& rep, const ConeShape& shape, Width n) {
  struct Built {
    ValueRef value;
    bool uniform = true;  // 1-bit, same across all output bits
  };
  std::vector<Built> slots(shape.slots.size());
  for (std::size_t s = 0; s < shape.slots.size(); ++s) {
    const auto& p = shape.slots[s];
    switch (p.kind) {
      case SlotProgression::Kind::Invariant:
        if (p.invariant.is_constant)
          slots[s] = {m.constant(BitVector(1, p.invariant.constant_value ? 1 : 0)), true};
        else
          slots[s] = {p.invariant.source.width == 1 ? p.invariant.source : m.extract(p.invariant.source, p.invariant.bit, 1),
                      true};
        break;
      case SlotProgression::Kind::Varying:
        slots[s] = {build_gather(m, p.source, p.bits), false};
        break;
      case SlotProgression::Kind::ConstantVector:
        slots[s] = {m.constant(p.constant), false};
        break;
    }
  }

  if (rep.root_is_leaf) {
    const Built& b = slots.at(0);
    return b.uniform && n > 1 ? m.replicate(b.value, n) : b.value;
  }

  std::vector<Built> nodes(rep.nodes.size());
  std::vector<bool> done(rep.nodes.size(), false);
  std::unordered_map<OpId, ValueRef> widened;  // uniform value -> replicated
  auto widen = [&](const Built& b) -> ValueRef {
    if (!b.uniform || n == 1) return b.value;
    auto it = widened.find(b.value.op);
    if (it != widened.end()) return it->second;
    const ValueRef r = m.replicate(b.value, n);
    widened.emplace(b.value.op, r);
    return r;
  };

  // Postorder over the representative so every child is built first.
  std::vector<int> order;
  {
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::vector<bool> seen(rep.nodes.size(), false);
    seen[0] = true;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& ch = rep.nodes[static_cast<std::size_t>(id)].children;
      if (next < ch.size()) {
        const int c = ch[next++];
        if (c >= 0 && !seen[static_cast<std::size_t>(c)]) {
          seen[static_cast<std::size_t>(c)] = true;
          stack.emplace_back(c, 0);
        }
        continue;
      }
      order.push_back(id);
      stack.pop_back();
    }
  }

  for (int id : order) {
    const ConeNode& node = rep.nodes[static_cast<std::size_t>(id)];
    std::vector<Built> in;
    for (int c : node.children) in.push_back(c >= 0 ? nodes[static_cast<std::size_t>(c)] : slots[static_cast<std::size_t>(-c - 1)]);
    bool uniform = true;
    for (const auto& b : in) uniform &= b.uniform;
    Built out;
    out.uniform = uniform;
    if (uniform) {
      if (node.kind == OpKind::Not)
        out.value = m.unary(OpKind::Not, in[0].value);
      else if (node.kind == OpKind::Mux)
        out.value = m.mux(in[0].value, in[1].value, in[2].value);
      else
        out.value = m.binary(node.kind, in[0].value, in[1].value);
    } else if (node.kind == OpKind::Not) {
      out.value = m.unary(OpKind::Not, in[0].value);
    } else if (node.kind == OpKind::Mux) {
      if (in[0].uniform) {
        out.value = m.mux(in[0].value, widen(in[1]), widen(in[2]));
      } else {
        const ValueRef c = in[0].value;
        const ValueRef t = m.binary(OpKind::And, c, widen(in[1]));
        const ValueRef f = m.binary(OpKind::And, m.unary(OpKind::Not, c), widen(in[2]));
        out.value = m.binary(OpKind::Or, t, f);
      }
    } else {
      out.value = m.binary(node.kind, widen(in[0]), widen(in[1]));
    }
    nodes[static_cast<std::size_t>(id)] = out;
  }
  return widen(nodes[0]);
}

std::optional<ConeShape> check_structure(const std::vector<const LogicCone*>& cones, std::string* why) {
  auto fail = [&](std::string msg) -> std::optional<ConeShape> {
    if (why) *why = std::move(msg);
    return std::nullopt;
  };
  if (cones.size() < 2) return fail("fewer than two bits");
  for (std::size_t k = 0; k < cones.size(); ++k) {
    if (!cones[k]->analyzable) return fail("bit " + std::to_string(k) + ": " + cones[k]->failure);
    if (cones[k]->root_is_leaf) return fail("bit " + std::to_string(k) + " has no logic");
  }
  if (!is_independent(cones)) return fail("cones share logic");
  return is_isomorphic(cones, why);
}

}  // namespace busweaver
