#include <gtest/gtest.h>

#include <sstream>

#include "busweaver/inliner.hpp"
#include "busweaver/oracle.hpp"
#include "test_support.hpp"

using namespace busweaver;
using bwtest::parse_ok;

namespace {

const char* kMyBuf = "module my_buf(input a, output y);\n  assign y = {a};\nendmodule\n";

/// Leaf module with `n` operations: a chain of inverters.
std::string chain_leaf(const std::string& name, int n) {
  std::ostringstream v;
  v << "module " << name << "(input a, output y);\n";
  std::string prev = "a";
  for (int k = 0; k < n - 1; ++k) {
    v << "  wire w" << k << " = ~" << prev << ";\n";
    prev = "w" + std::to_string(k);
  }
  v << "  assign y = ~" << prev << ";\nendmodule\n";
  return v.str();
}

/// Independent size oracle: flatten recursively and count non-input ops.
std::uint64_t flattened_size(const HwDesign& d, const HwModule& m) {
  std::uint64_t n = 0;
  for (const auto& op : m.ops) {
    if (op.kind == OpKind::InputRef) continue;
    if (op.kind == OpKind::Instance) {
      const HwModule* c = d.find(op.callee);
      if (c != nullptr && !c->is_extern) n += flattened_size(d, *c);
      continue;
    }
    ++n;
  }
  return n;
}

std::size_t instances(const HwModule& m) {
  std::size_t n = 0;
  for (const auto& op : m.ops) n += op.kind == OpKind::Instance;
  return n;
}

}  // namespace

TEST(Regularity, Cases) {
  auto d = parse_ok(kMyBuf);
  EXPECT_TRUE(regularity_analysis(d.modules[0]));
  auto arith = parse_ok("module m(input [3:0] a, input [3:0] b, output [3:0] y, output [3:0] z);\n"
                        "  assign y = a + b;\n  assign z = a - b;\nendmodule\n");
  EXPECT_TRUE(regularity_analysis(arith.modules[0]));
  auto ext = parse_ok("extern module blk(input a, output y);\n"
                      "module m(input a, output y); blk u(.a(a), .y(y)); endmodule\n");
  EXPECT_FALSE(regularity_analysis(*ext.find("m")));
  EXPECT_FALSE(regularity_analysis(*ext.find("m"), ext));
  EXPECT_FALSE(regularity_analysis(*ext.find("blk")));
}

TEST(Regularity, InstanceOfSmallRegularCalleeIsAllowedWithDesign) {
  auto d = parse_ok(std::string(kMyBuf) + "module m(input a, output y); my_buf u(.a(a), .y(y)); endmodule\n");
  EXPECT_FALSE(regularity_analysis(*d.find("m")));
  EXPECT_TRUE(regularity_analysis(*d.find("m"), d));
  EXPECT_FALSE(regularity_analysis(*d.find("m"), d, InlinePolicy{1, true}));
}

TEST(SizeAnalysis, Cases) {
  auto inter = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/intermodule.v"));
  EXPECT_EQ(size_analysis(*inter.find("my_buf"), inter), 1u);
  auto four = parse_ok(std::string(kMyBuf) +
                       "module m(input [3:0] in, output [3:0] out);\n"
                       "  my_buf b0(.a(in[0]), .y(out[0]));\n  my_buf b1(.a(in[1]), .y(out[1]));\n"
                       "  my_buf b2(.a(in[2]), .y(out[2]));\n  my_buf b3(.a(in[3]), .y(out[3]));\nendmodule\n");
  // The extracts and concat of `m` are its own operations; instances add 4.
  const HwModule& m = *four.find("m");
  std::uint64_t own = 0;
  for (const auto& op : m.ops) own += op.kind != OpKind::InputRef && op.kind != OpKind::Instance;
  EXPECT_EQ(size_analysis(m, four) - own, 4u);
  EXPECT_EQ(size_analysis(m, four), flattened_size(four, m));

  auto big = parse_ok(chain_leaf("big", 200));
  EXPECT_EQ(size_analysis(big.modules[0], big), 200u);
}

TEST(SizeAnalysis, AgreesWithFlatteningOnNestedDesigns) {
  auto d = parse_ok(chain_leaf("l", 7) +
                    "module mid(input a, output y);\n  wire t;\n  l u0(.a(a), .y(t));\n  l u1(.a(t), .y(y));\nendmodule\n"
                    "module top(input [1:0] a, output [1:0] y);\n"
                    "  mid m0(.a(a[0]), .y(y[0]));\n  mid m1(.a(a[1]), .y(y[1]));\nendmodule\n");
  for (const auto& m : d.modules) EXPECT_EQ(size_analysis(m, d), flattened_size(d, m)) << m.name;
}

TEST(SelectiveInline, IntermoduleInlinesEverySite) {
  auto d = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/intermodule.v"));
  auto r = selective_inline(d);
  EXPECT_EQ(r.inlined_sites(), 4u);
  const HwModule& top = *r.design.find("intermodule");
  EXPECT_EQ(instances(top), 0u);
  for (const auto& e : r.log) EXPECT_EQ(e.decision, InlineDecision::Inlined);
  bool any_inline = false;
  for (const auto& op : top.ops) any_inline |= op.from_inline;
  EXPECT_TRUE(any_inline);
  EXPECT_TRUE(verify(r.design).empty());
}

TEST(SelectiveInline, OversizedCalleeIsRejected) {
  auto d = parse_ok(chain_leaf("big", 200) + "module top(input a, output y); big u(.a(a), .y(y)); endmodule\n");
  auto r = selective_inline(d);
  EXPECT_EQ(r.inlined_sites(), 0u);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].decision, InlineDecision::SizeRejected);
  EXPECT_EQ(r.log[0].callee_size, 200u);
  EXPECT_EQ(r.log[0].site, "u");
  EXPECT_EQ(instances(*r.design.find("top")), 1u);
}

TEST(SelectiveInline, ThresholdIsStrict) {
  auto d = parse_ok(chain_leaf("c", 150) + "module top(input a, output y); c u(.a(a), .y(y)); endmodule\n");
  EXPECT_EQ(selective_inline(d, InlinePolicy{150, true}).inlined_sites(), 0u);
  EXPECT_EQ(selective_inline(d, InlinePolicy{151, true}).inlined_sites(), 1u);
}

TEST(SelectiveInline, NoInstancesIsAFixpoint) {
  auto d = parse_ok(bwtest::read_text(bwtest::golden_dir() + "/permutation.v"));
  auto r = selective_inline(d);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(dump_design(r.design), dump_design(d));
}

TEST(SelectiveInline, DisabledAndExternDecisions) {
  auto d = parse_ok("extern module blk(input a, output y);\n" + std::string(kMyBuf) +
                    "module top(input [1:0] a, output [1:0] y);\n"
                    "  blk u0(.a(a[0]), .y(y[0]));\n  my_buf u1(.a(a[1]), .y(y[1]));\nendmodule\n");
  auto r = selective_inline(d);
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.inlined_sites(), 1u);
  bool saw_extern = false;
  for (const auto& e : r.log) saw_extern |= e.decision == InlineDecision::ExternCallee;
  EXPECT_TRUE(saw_extern);
  auto off = selective_inline(d, InlinePolicy{150, false});
  EXPECT_EQ(off.inlined_sites(), 0u);
  for (const auto& e : off.log) {
    if (e.callee == "my_buf") {
      EXPECT_EQ(e.decision, InlineDecision::Disabled);
    }
  }
}

TEST(SelectiveInline, BottomUpSeesInlinedCallees) {
  // mid (2 leaves of size 3 + its own ops) inlines its leaves first; top then
  // sees a regular mid.
  auto d = parse_ok(chain_leaf("l", 3) +
                    "module mid(input a, output y);\n  wire t;\n  l u0(.a(a), .y(t));\n  l u1(.a(t), .y(y));\nendmodule\n"
                    "module top(input a, output y); mid m(.a(a), .y(y)); endmodule\n");
  auto r = selective_inline(d);
  EXPECT_EQ(r.inlined_sites(), 3u);
  EXPECT_EQ(instances(*r.design.find("top")), 0u);
  EXPECT_EQ(count_instructions(*r.design.find("top")), 6u);
}

TEST(SelectiveInline, PreservesSemanticsAndPorts) {
  auto d = parse_ok("module add2(input [1:0] a, input [1:0] b, output [1:0] s, output c);\n"
                    "  assign s = a + b;\n  assign c = (a[1] & b[1]) | ((a[1] ^ b[1]) & (a[0] & b[0]));\nendmodule\n"
                    "module top(input [3:0] x, input [3:0] y, output [3:0] s, output c);\n"
                    "  wire c0;\n  wire c1;\n  wire [1:0] hi;\n"
                    "  add2 lo(.a(x[1:0]), .b(y[1:0]), .s(s[1:0]), .c(c0));\n"
                    "  add2 up(.a(x[3:2]), .b(y[3:2]), .s(hi), .c(c1));\n"
                    "  assign s[3:2] = hi + {1'b0, c0};\n  assign c = c1 | (c0 & (&hi));\nendmodule\n");
  for (std::uint64_t t : {1, 10, 150}) {
    auto r = selective_inline(d, InlinePolicy{t, true});
    ASSERT_TRUE(verify(r.design).empty());
    EXPECT_EQ(r.design.find("top")->ports, d.find("top")->ports);
    const auto v = check_equivalence(d, *d.find("top"), r.design, *r.design.find("top"));
    EXPECT_EQ(v.status, VerdictStatus::EquivalentExhaustive) << t;
    // And against the independent evaluator: top computes a 4-bit add.
    const HwModule& top = *r.design.find("top");
    bwtest::for_each_input(top, [&](const bwtest::Inputs& in) {
      const auto o = bwtest::reference_eval(r.design, top, in);
      const std::uint64_t sum = in.at("x") + in.at("y");
      ASSERT_EQ(o.at("s"), sum & 15);
      ASSERT_EQ(o.at("c"), sum >> 4);
    });
  }
}

TEST(SelectiveInline, InlinedSitesAreMonotoneInThreshold) {
  std::string text;
  for (int s : {2, 9, 40, 120, 260}) text += chain_leaf("l" + std::to_string(s), s);
  text += "module top(input [4:0] a, output [4:0] y);\n";
  int k = 0;
  for (int s : {2, 9, 40, 120, 260}) {
    text += "  l" + std::to_string(s) + " u" + std::to_string(k) + "(.a(a[" + std::to_string(k) + "]), .y(y[" +
            std::to_string(k) + "]));\n";
    ++k;
  }
  text += "endmodule\n";
  auto d = parse_ok(text);
  std::size_t prev = 0;
  for (std::uint64_t t = 1; t <= 400; t += 7) {
    const auto n = selective_inline(d, InlinePolicy{t, true}).inlined_sites();
    EXPECT_GE(n, prev) << t;
    prev = n;
  }
  EXPECT_EQ(prev, 5u);
}
