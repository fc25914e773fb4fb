#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "busweaver/oracle.hpp"
#include "busweaver/simulate.hpp"
#include "busweaver/structural_cones.hpp"
#include "test_support.hpp"

using namespace busweaver;
using bwtest::parse_ok;

namespace {

std::vector<LogicCone> output_cones(const HwModule& m, const std::string& port = "") {
  const NamedValue* o = port.empty() ? &m.outputs[0] : m.find_output(port);
  std::vector<LogicCone> cones;
  for (Width b = 0; b < o->value.width; ++b) cones.push_back(backward_cone(m, BitRef{o->value, b}));
  return cones;
}

std::set<OpKind> kinds(const LogicCone& c) {
  std::set<OpKind> k;
  for (const auto& n : c.nodes) k.insert(n.kind);
  return k;
}

HwModule vectorized(const HwModule& m, const ConeShape& shape, const LogicCone& rep) {
  HwModule tmp = m;
  tmp.outputs.clear();
  tmp.ports.erase(std::remove_if(tmp.ports.begin(), tmp.ports.end(),
                                 [](const Port& p) { return p.dir == PortDir::Output; }),
                  tmp.ports.end());
  const auto out = build_vector_expr(tmp, rep, shape, m.outputs[0].value.width);
  tmp.add_output(m.outputs[0].name, out);
  tmp.wires.clear();
  compact_module(tmp);
  return tmp;
}

}  // namespace

TEST(BackwardCone, MixedBitsAndMux) {
  auto d = parse_ok("module f(input a, input b, input c, output y); assign y = (a & ~b) | c; endmodule");
  const auto& m = d.modules[0];
  ConeStats st;
  auto cone = backward_cone(m, BitRef{m.outputs[0].value, 0}, &st);
  ASSERT_TRUE(cone.analyzable);
  EXPECT_EQ(cone.nodes.size(), 3u);
  EXPECT_EQ(kinds(cone), (std::set<OpKind>{OpKind::Or, OpKind::And, OpKind::Not}));
  EXPECT_EQ(cone.nodes[0].kind, OpKind::Or);
  ASSERT_EQ(cone.leaves.size(), 3u);
  std::set<std::string> names;
  for (const auto& l : cone.leaves) names.insert(m.def(l.source).name);
  EXPECT_EQ(names, (std::set<std::string>{"a", "b", "c"}));
  EXPECT_EQ(st.node_visits, 3u);
}

TEST(BackwardCone, InputRootIsALeaf) {
  auto d = parse_ok("module f(input [1:0] a, output y); assign y = a[1]; endmodule");
  auto cone = backward_cone(d.modules[0], BitRef{d.modules[0].outputs[0].value, 0});
  EXPECT_TRUE(cone.root_is_leaf);
  EXPECT_TRUE(cone.nodes.empty());
  ASSERT_EQ(cone.leaves.size(), 1u);
  EXPECT_EQ(cone.leaves[0].bit, 1u);
}

TEST(BackwardCone, DiamondVisitsSharedNodeOnce) {
  auto d = parse_ok("module f(input a, input b, input c, output y);\n"
                    "  wire n = ~a;\n  assign y = (n & b) & (n & c);\nendmodule\n");
  // Root AND, two inner ANDs, one NOT.
  auto cone = backward_cone(d.modules[0], BitRef{d.modules[0].outputs[0].value, 0});
  std::set<OpId> ops;
  for (const auto& n : cone.nodes) ops.insert(n.op);
  EXPECT_EQ(ops.size(), cone.nodes.size());
  std::size_t nots = 0;
  for (const auto& n : cone.nodes) nots += n.kind == OpKind::Not;
  EXPECT_EQ(nots, 1u);
  // The three operations below the root.
  EXPECT_EQ(cone.nodes.size() - 1, 3u);
}

TEST(BackwardCone, ClosedUnderOperands) {
  auto d = parse_ok("module f(input [3:0] a, input [3:0] b, input s, output [3:0] y);\n"
                    "  wire [3:0] t = a ^ b;\n  assign y = s ? (t & a) : ~(t | {4{s}});\nendmodule\n");
  const auto& m = d.modules[0];
  for (const auto& cone : output_cones(m)) {
    ASSERT_TRUE(cone.analyzable);
    for (std::size_t i = 0; i < cone.nodes.size(); ++i)
      for (int c : cone.nodes[i].children) {
        if (c >= 0) {
          EXPECT_NE(static_cast<std::size_t>(c), i);
          EXPECT_LT(static_cast<std::size_t>(c), cone.nodes.size());
        } else {
          EXPECT_LT(static_cast<std::size_t>(-c - 1), cone.leaves.size());
        }
      }
    EXPECT_LE(cone.nodes.size(), count_instructions(m));
  }
}

TEST(BackwardCone, InstancesAndWideArithmeticAreNotAnalyzable) {
  auto d = parse_ok("module l(input a, output y); assign y = ~a; endmodule\n"
                    "module t(input a, input b, output y); wire q; l u(.a(a), .y(q)); assign y = q & b; endmodule\n");
  const HwModule& t = *d.find("t");
  EXPECT_FALSE(backward_cone(t, BitRef{t.outputs[0].value, 0}).analyzable);
  auto ar = parse_ok("module m(input [1:0] a, input [1:0] b, output [1:0] y); assign y = a + b; endmodule");
  EXPECT_FALSE(backward_cone(ar.modules[0], BitRef{ar.modules[0].outputs[0].value, 1}).analyzable);
  auto one = parse_ok("module m(input a, input b, output y); assign y = a + b; endmodule");
  auto c = backward_cone(one.modules[0], BitRef{one.modules[0].outputs[0].value, 0});
  ASSERT_TRUE(c.analyzable);
  EXPECT_EQ(c.nodes[0].kind, OpKind::Xor);
}

TEST(Independence, Cases) {
  auto mux = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/select.v"));
  EXPECT_TRUE(is_independent(output_cones(mux.modules[0])));

  auto add = parse_ok(bwtest::ripple_adder(4, false));
  EXPECT_FALSE(is_independent(output_cones(add.modules[0])));

  auto f = parse_ok("module f(input a, input b, output y); assign y = a & b; endmodule");
  const auto c = backward_cone(f.modules[0], BitRef{f.modules[0].outputs[0].value, 0});
  EXPECT_FALSE(is_independent(std::vector<LogicCone>{c, c}));
}

TEST(Isomorphism, AndOrNotTemplate) {
  auto d = parse_ok("module m(input [3:0] a, input [3:0] b, input [3:0] c, output [3:0] out);\n"
                    "  assign out[0] = (a[0] & b[0]) | ~c[0];\n  assign out[1] = (a[1] & b[1]) | ~c[1];\n"
                    "  assign out[2] = (a[2] & b[2]) | ~c[2];\n  assign out[3] = (a[3] & b[3]) | ~c[3];\nendmodule\n");
  const auto cones = output_cones(d.modules[0]);
  for (std::size_t i = 1; i < cones.size(); ++i) EXPECT_EQ(cones[i].skeleton(), cones[0].skeleton());
  auto shape = is_isomorphic(cones);
  ASSERT_TRUE(shape);
  ASSERT_EQ(shape->slots.size(), 3u);
  for (const auto& s : shape->slots) {
    EXPECT_EQ(s.kind, SlotProgression::Kind::Varying);
    EXPECT_EQ(s.bits, (std::vector<Width>{0, 1, 2, 3}));
  }
}

TEST(Isomorphism, InvariantSlot) {
  auto d = parse_ok("module m(input [3:0] a, input [3:0] b, output [3:0] out);\n"
                    "  assign out[0] = a[0] & b[0];\n  assign out[1] = a[1] & b[0];\n"
                    "  assign out[2] = a[2] & b[0];\n  assign out[3] = a[3] & b[0];\nendmodule\n");
  const auto& m = d.modules[0];
  const auto cones = output_cones(m);
  auto shape = check_structure({&cones[0], &cones[1], &cones[2], &cones[3]});
  ASSERT_TRUE(shape);
  ASSERT_EQ(shape->slots.size(), 2u);
  EXPECT_EQ(shape->slots[1].kind, SlotProgression::Kind::Invariant);
  EXPECT_EQ(shape->slots[1].invariant.bit, 0u);
  // Vector form is a & {4{b[0]}}.
  auto v = vectorized(m, *shape, cones[0]);
  EXPECT_EQ(check_equivalence(m, v).status, VerdictStatus::EquivalentExhaustive);
  std::size_t rep = 0;
  for (const auto& op : v.ops) rep += op.kind == OpKind::Replicate;
  EXPECT_EQ(rep, 1u);
}

TEST(Isomorphism, OperatorMismatchFails) {
  auto d = parse_ok("module m(input [1:0] a, input [1:0] b, output [1:0] out);\n"
                    "  assign out[0] = a[0] & b[0];\n  assign out[1] = a[1] | b[1];\nendmodule\n");
  std::string why;
  EXPECT_FALSE(is_isomorphic(output_cones(d.modules[0]), &why));
  EXPECT_FALSE(why.empty());
}

TEST(Isomorphism, OperandOrderMatters) {
  auto d = parse_ok("module m(input [1:0] a, input [1:0] b, output [1:0] out);\n"
                    "  assign out[0] = a[0] & ~b[0];\n  assign out[1] = ~b[1] & a[1];\nendmodule\n");
  EXPECT_FALSE(is_isomorphic(output_cones(d.modules[0])));
}

TEST(ExtractPermutation, IdentityReversalSingleton) {
  auto id = parse_ok("module m(input [3:0] a, output [3:0] out);\n"
                     "  assign out[0] = ~a[0];\n  assign out[1] = ~a[1];\n  assign out[2] = ~a[2];\n"
                     "  assign out[3] = ~a[3];\nendmodule\n");
  auto s = is_isomorphic(output_cones(id.modules[0]));
  ASSERT_TRUE(s);
  EXPECT_EQ(extract_permutation(*s)[0], (std::vector<Width>{0, 1, 2, 3}));

  auto rv = parse_ok("module m(input [3:0] a, output [3:0] out);\n"
                     "  assign out[0] = ~a[3];\n  assign out[1] = ~a[2];\n  assign out[2] = ~a[1];\n"
                     "  assign out[3] = ~a[0];\nendmodule\n");
  auto r = is_isomorphic(output_cones(rv.modules[0]));
  ASSERT_TRUE(r);
  EXPECT_EQ(extract_permutation(*r)[0], (std::vector<Width>{3, 2, 1, 0}));

  // The scalar out[0] of the partial example: a one-cone map.
  auto f8 = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/partial.v"));
  const auto& m = f8.modules[0];
  const auto c0 = backward_cone(m, BitRef{m.outputs[0].value, 0});
  auto one = is_isomorphic(std::vector<LogicCone>{c0});
  ASSERT_TRUE(one);
  const auto maps = extract_permutation(*one);
  ASSERT_EQ(maps.size(), 2u);
  EXPECT_EQ(maps[0], (std::vector<Width>{0}));
  EXPECT_EQ(maps[1], (std::vector<Width>{0}));
  // A single cone is never enough for a structural rewrite.
  EXPECT_FALSE(check_structure({&c0}));
}

TEST(BuildVectorExpr, PerBitMuxBecomesOneMux) {
  auto d = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/select.v"));
  const auto& m = d.modules[0];
  const auto cones = output_cones(m);
  std::vector<const LogicCone*> ptrs;
  for (const auto& c : cones) ptrs.push_back(&c);
  auto shape = check_structure(ptrs);
  ASSERT_TRUE(shape);
  auto v = vectorized(m, *shape, cones[0]);
  EXPECT_EQ(count_instructions(v), 1u);
  EXPECT_EQ(v.def(v.outputs[0].value).kind, OpKind::Mux);
  EXPECT_EQ(check_equivalence(m, v).status, VerdictStatus::EquivalentExhaustive);
}

TEST(BuildVectorExpr, AndOrNotExhaustive) {
  // 2N+1 inputs for N = 4.
  auto d = parse_ok("module m(input [3:0] a, input [3:0] b, input s, output [3:0] out);\n"
                    "  assign out[0] = s ? (a[0] & b[0]) : ~(a[0] | b[0]);\n"
                    "  assign out[1] = s ? (a[1] & b[1]) : ~(a[1] | b[1]);\n"
                    "  assign out[2] = s ? (a[2] & b[2]) : ~(a[2] | b[2]);\n"
                    "  assign out[3] = s ? (a[3] & b[3]) : ~(a[3] | b[3]);\nendmodule\n");
  const auto& m = d.modules[0];
  const auto cones = output_cones(m);
  auto shape = is_isomorphic(cones);
  ASSERT_TRUE(shape);
  ASSERT_TRUE(is_independent(cones));
  auto v = vectorized(m, *shape, cones[0]);
  EXPECT_LE(count_instructions(v), 4u);
  std::uint64_t n = 0;
  bwtest::for_each_input(v, [&](const bwtest::Inputs& in) {
    const std::uint64_t a = in.at("a"), b = in.at("b");
    const std::uint64_t expect = in.at("s") ? (a & b) : (~(a | b) & 15);
    ASSERT_EQ(bwtest::reference_eval(HwDesign{}, v, in).at("out"), expect);
    ++n;
  });
  EXPECT_EQ(n, 1u << 9);
}

TEST(BuildVectorExpr, VaryingSelectIsLowered) {
  auto d = parse_ok("module m(input [2:0] s, input [2:0] a, input [2:0] b, output [2:0] out);\n"
                    "  assign out[0] = s[0] ? a[0] : b[0];\n  assign out[1] = s[1] ? a[1] : b[1];\n"
                    "  assign out[2] = s[2] ? a[2] : b[2];\nendmodule\n");
  const auto& m = d.modules[0];
  const auto cones = output_cones(m);
  auto shape = is_isomorphic(cones);
  ASSERT_TRUE(shape);
  auto v = vectorized(m, *shape, cones[0]);
  for (const auto& op : v.ops) EXPECT_NE(op.kind, OpKind::Mux);
  EXPECT_EQ(check_equivalence(m, v).status, VerdictStatus::EquivalentExhaustive);
}

TEST(ConeStats, BoundedByWidthTimesGraph) {
  auto d = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/select.v"));
  const auto& m = d.modules[0];
  ConeStats st;
  for (Width b = 0; b < m.outputs[0].value.width; ++b) backward_cone(m, BitRef{m.outputs[0].value, b}, &st);
  const auto mm = metrics(m);
  EXPECT_LE(st.node_visits + st.edge_visits, m.outputs[0].value.width * (mm.op_count + mm.edge_count));
}
