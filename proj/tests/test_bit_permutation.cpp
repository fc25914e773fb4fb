#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "busweaver/bit_permutation.hpp"
#include "busweaver/oracle.hpp"
#include "test_support.hpp"

using namespace busweaver;
using bwtest::parse_ok;

namespace {

HwDesign golden(const std::string& name) { return parse_ok(bwtest::read_text(bwtest::golden_dir() + "/" + name)); }

/// A module whose output is the given scalar per-bit form of `pi`.
HwModule scalar_perm(const std::vector<Width>& pi) {
  HwModule m;
  m.name = "p";
  const Width n = static_cast<Width>(pi.size());
  auto in = m.add_input("in", n);
  std::vector<ValueRef> bits;
  for (Width i = n; i-- > 0;) bits.push_back(m.extract(in, pi[i], 1));
  m.add_output("out", m.concat(bits));
  return m;
}

std::vector<Width> reconstruct(const std::vector<Segment>& segs) {
  std::vector<Width> pi;
  for (const auto& s : segs)
    for (Width k = 0; k < s.width; ++k) pi.push_back(s.low + k);
  return pi;
}

}  // namespace

TEST(TraceBitOrigin, PermutationBit3ComesFromInBit0) {
  auto d = golden("permutation.v");
  const auto& m = d.modules[0];
  auto o = trace_bit_origin(m, m.outputs[0].value, 3);
  ASSERT_TRUE(o);
  EXPECT_EQ(m.def(o->source).kind, OpKind::InputRef);
  EXPECT_EQ(o->bit, 0u);
  EXPECT_FALSE(o->is_constant);
}

TEST(TraceBitOrigin, IdentityAndLogic) {
  auto id = parse_ok("module m(input [3:0] in, output [3:0] out); assign out = in; endmodule");
  const auto& m = id.modules[0];
  for (Width b = 0; b < 4; ++b) {
    auto o = trace_bit_origin(m, m.outputs[0].value, b);
    ASSERT_TRUE(o);
    EXPECT_EQ(o->bit, b);
  }
  auto an = parse_ok("module m(input [1:0] a, output y); assign y = a[0] & a[1]; endmodule");
  EXPECT_FALSE(trace_bit_origin(an.modules[0], an.modules[0].outputs[0].value, 0));
  auto mx = parse_ok("module m(input s, input a, input b, output y); assign y = s ? a : b; endmodule");
  EXPECT_FALSE(trace_bit_origin(mx.modules[0], mx.modules[0].outputs[0].value, 0));
}

TEST(TraceBitOrigin, ThroughReverseReplicateAndConstant) {
  auto d = parse_ok("module m(input [3:0] a, output [7:0] y);\n"
                    "  assign y = {{2{a[1:0]}}, 1'b1, a[3], a[2], 1'b0};\nendmodule\n");
  const auto& m = d.modules[0];
  const auto out = m.outputs[0].value;
  const std::vector<std::pair<bool, int>> expect = {{true, 0}, {false, 2}, {false, 3}, {true, 1},
                                                    {false, 0}, {false, 1}, {false, 0}, {false, 1}};
  for (Width b = 0; b < 8; ++b) {
    auto o = trace_bit_origin(m, out, b);
    ASSERT_TRUE(o) << b;
    EXPECT_EQ(o->is_constant, expect[b].first) << b;
    if (o->is_constant)
      EXPECT_EQ(o->constant_value, expect[b].second == 1);
    else
      EXPECT_EQ(o->bit, static_cast<Width>(expect[b].second));
  }
  HwModule r;
  r.name = "r";
  r.add_output("y", r.reverse(r.add_input("a", 5)));
  for (Width b = 0; b < 5; ++b) EXPECT_EQ(trace_bit_origin(r, r.outputs[0].value, b)->bit, 4 - b);
}

TEST(DetectPermutation, SwappedEnds) {
  auto d = golden("permutation.v");
  auto p = detect_permutation(d.modules[0], d.modules[0].outputs[0].value);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->pi, (std::vector<Width>{3, 1, 2, 0}));
}

TEST(DetectPermutation, IdentityDuplicatesConstantsAndTwoSources) {
  auto id = scalar_perm({0, 1, 2, 3, 4, 5, 6, 7});
  auto p = detect_permutation(id, id.outputs[0].value);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->pi, (std::vector<Width>{0, 1, 2, 3, 4, 5, 6, 7}));

  auto dup = parse_ok("module m(input [1:0] in, output [1:0] out);\n"
                      "  assign out[1] = in[0];\n  assign out[0] = in[0];\nendmodule\n");
  EXPECT_FALSE(detect_permutation(dup.modules[0], dup.modules[0].outputs[0].value));

  auto cst = parse_ok("module m(input [1:0] in, output [1:0] out); assign out = {1'b0, in[0]}; endmodule");
  EXPECT_FALSE(detect_permutation(cst.modules[0], cst.modules[0].outputs[0].value));

  auto two = parse_ok("module m(input [1:0] a, input [1:0] b, output [1:0] out); assign out = {a[1], b[0]}; endmodule");
  EXPECT_FALSE(detect_permutation(two.modules[0], two.modules[0].outputs[0].value));

  // Bits of a wider source must be exactly {0..N-1}.
  auto wide = parse_ok("module m(input [3:0] a, output [1:0] out); assign out = {a[2], a[3]}; endmodule");
  EXPECT_FALSE(detect_permutation(wide.modules[0], wide.modules[0].outputs[0].value));
}

TEST(GreedyGroup, GroupingSegments) {
  PermutationMap p;
  p.pi = {1, 2, 3, 0};
  const auto segs = greedy_group(p);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].low, 1u);
  EXPECT_EQ(segs[0].width, 3u);
  EXPECT_EQ(segs[1].low, 0u);
  EXPECT_EQ(segs[1].width, 1u);
}

TEST(GreedyGroup, IdentityAndReversal) {
  PermutationMap id;
  for (Width i = 0; i < 8; ++i) id.pi.push_back(i);
  const auto s = greedy_group(id);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].low, 0u);
  EXPECT_EQ(s[0].width, 8u);

  PermutationMap rev;
  rev.pi = {3, 2, 1, 0};
  const auto r = greedy_group(rev);
  ASSERT_EQ(r.size(), 4u);
  for (const auto& seg : r) EXPECT_EQ(seg.width, 1u);
}

TEST(GreedyGroup, SegmentsReconstructPi) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 300; ++k) {
    const Width n = 2 + rng() % 30;
    PermutationMap p;
    for (Width i = 0; i < n; ++i) p.pi.push_back(i);
    std::shuffle(p.pi.begin(), p.pi.end(), rng);
    const auto segs = greedy_group(p);
    EXPECT_EQ(reconstruct(segs), p.pi);
    // Maximal: adjacent segments never continue an ascending run.
    for (std::size_t j = 1; j < segs.size(); ++j) EXPECT_NE(segs[j - 1].low + segs[j - 1].width, segs[j].low);
  }
}

TEST(RewritePermutation, IdentityAddsNothing) {
  auto m = scalar_perm({0, 1, 2, 3});
  ModuleRewriter rw(m);
  const auto before = m.ops.size();
  const auto p = detect_permutation(m, m.outputs[0].value);
  ASSERT_TRUE(p);
  const auto v = rewrite_permutation(rw, m.outputs[0].value, *p);
  EXPECT_EQ(m.ops.size(), before);
  EXPECT_EQ(m.def(v).kind, OpKind::InputRef);
  rw.finish();
  EXPECT_EQ(count_instructions(m), 0u);
}

TEST(RewritePermutation, ReversalIsOneReverse) {
  auto m = scalar_perm({3, 2, 1, 0});
  ModuleRewriter rw(m);
  rewrite_permutation(rw, m.outputs[0].value, *detect_permutation(m, m.outputs[0].value));
  rw.finish();
  EXPECT_EQ(count_instructions(m), 1u);
  EXPECT_EQ(m.def(m.outputs[0].value).kind, OpKind::Reverse);
}

TEST(RewritePermutation, GroupingIsOneConcatAndTwoExtracts) {
  auto d = golden("grouping.v");
  HwModule m = d.modules[0];
  const HwModule orig = m;
  ModuleRewriter rw(m);
  rewrite_permutation(rw, m.outputs[0].value, *detect_permutation(m, m.outputs[0].value));
  rw.finish();
  EXPECT_EQ(count_instructions(m), 3u);
  std::size_t cat = 0, ex = 0;
  for (const auto& op : m.ops) {
    cat += op.kind == OpKind::Concat;
    ex += op.kind == OpKind::Extract;
  }
  EXPECT_EQ(cat, 1u);
  EXPECT_EQ(ex, 2u);
  EXPECT_EQ(check_equivalence(orig, m).status, VerdictStatus::EquivalentExhaustive);
}

TEST(RewritePermutation, NoDeadExtractsRemain) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const Width n = 2 + rng() % 14;
    std::vector<Width> pi(n);
    for (Width i = 0; i < n; ++i) pi[i] = i;
    std::shuffle(pi.begin(), pi.end(), rng);
    auto m = scalar_perm(pi);
    ModuleRewriter rw(m);
    rewrite_permutation(rw, m.outputs[0].value, *detect_permutation(m, m.outputs[0].value));
    rw.finish();
    // Every remaining op is reachable, and the count matches the greedy form.
    const auto uses = use_counts(m);
    for (OpId i = 0; i < m.ops.size(); ++i)
      if (m.ops[i].kind == OpKind::Extract) {
        EXPECT_GE(uses[i], 1u);
      }
    PermutationMap p{ValueRef{}, pi};
    const auto segs = greedy_group(p);
    std::uint64_t expect;
    if (segs.size() == 1)
      expect = segs[0].width == n ? 0 : 1;
    else {
      bool desc = true;
      for (Width i = 0; i < n; ++i) desc &= pi[i] == n - 1 - i;
      expect = desc ? 1 : segs.size() + 1;
    }
    EXPECT_EQ(count_instructions(m), expect);
  }
}

TEST(BitTracer, VisitsBoundedByWidthTimesDepth) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    // Chains of nested selects and concats of random depth.
    const Width n = 2 + rng() % 20;
    HwModule m;
    m.name = "c";
    ValueRef v = m.add_input("in", n);
    const int layers = 1 + rng() % 6;
    for (int l = 0; l < layers; ++l) {
      switch (rng() % 3) {
        case 0: v = m.reverse(v); break;
        case 1: {
          const Width cut = 1 + rng() % (n - 1);
          v = m.concat({m.extract(v, 0, cut), m.extract(v, cut, n - cut)});
          break;
        }
        default: v = m.concat({m.extract(v, 0, n)}); break;
      }
    }
    m.add_output("out", v);
    BitTracer t(m);
    for (Width b = 0; b < n; ++b) ASSERT_TRUE(t.origin(v, b));
    EXPECT_LE(t.visits(), std::uint64_t{n} * metrics(m).max_depth);
  }
}

TEST(BitTracer, WideConcatStaysLinear) {
  const Width n = 100000;
  HwModule m;
  m.name = "w";
  auto in = m.add_input("in", n);
  std::vector<ValueRef> bits;
  for (Width i = n; i-- > 0;) bits.push_back(m.extract(in, i, 1));
  m.add_output("out", m.concat(bits));
  BitTracer t(m);
  auto p = detect_permutation(t, m.outputs[0].value);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->pi[12345], 12345u);
  EXPECT_LE(t.visits(), std::uint64_t{n} * 2);
}
