#include "busweaver/vectorizer.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace busweaver {

std::string_view chunk_method_name(ChunkMethod m) {
  switch (m) {
    case ChunkMethod::BitPermutation: return "bit-permutation";
    case ChunkMethod::Structural: return "structural";
    case ChunkMethod::Scalar: return "scalar";
  }
  return "?";
}

std::string_view pattern_category_name(PatternCategory c) {
  switch (c) {
    case PatternCategory::None: return "none";
    case PatternCategory::BitLevel: return "bit-level";
    case PatternCategory::Structural: return "structural";
    case PatternCategory::Mixed: return "mixed";
  }
  return "?";
}

void PatternTallies::add(const SinkReport& s) {
  if (!s.rewritten) return;
  switch (s.category) {
    case PatternCategory::BitLevel: ++bit_level; break;
    case PatternCategory::Structural: ++structural; break;
    case PatternCategory::Mixed: ++mixed; break;
    case PatternCategory::None: break;
  }
  if (s.inlining_assisted) ++inlining_assisted;
}

VerificationError::VerificationError(std::vector<Violation> v)
    : std::runtime_error(v.empty() ? "design does not verify" : v.front().module + ": " + v.front().message),
      violations_(std::move(v)) {}

std::string expression_signature(const HwModule& m, ValueRef root, bool* touches_inline) {
  std::unordered_map<OpId, std::uint32_t> index;
  std::vector<OpId> order;
  {
    std::vector<std::pair<OpId, std::size_t>> stack{{root.op, 0}};
    index.emplace(root.op, 0);
    order.push_back(root.op);
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      const auto& operands = m.ops[id].operands;
      if (next == operands.size()) {
        stack.pop_back();
        continue;
      }
      const OpId child = operands[next++].op;
      if (index.emplace(child, static_cast<std::uint32_t>(order.size())).second) {
        order.push_back(child);
        stack.emplace_back(child, 0);
      }
    }
  }
  std::ostringstream os;
  os << root.result << ">";
  for (OpId id : order) {
    const Operation& op = m.ops[id];
    if (touches_inline && op.from_inline) *touches_inline = true;
    os << op_kind_name(op.kind) << ":" << op.width;
    switch (op.kind) {
      case OpKind::InputRef: os << ":" << op.name; break;
      case OpKind::Constant: os << ":" << op.value.to_hex(); break;
      case OpKind::Extract: os << ":" << op.low; break;
      case OpKind::Replicate: os << ":" << op.count; break;
      case OpKind::Instance: os << ":" << op.callee << ":" << op.name; break;
      default: break;
    }
    os << "(";
    for (const auto& v : op.operands) os << index.at(v.op) << "." << v.result << ",";
    os << ");";
  }
  return os.str();
}

namespace {

class SinkVectorizer {
public:
  SinkVectorizer(ModuleRewriter& rw, BitTracer& tracer, ValueRef sink, SinkReport& report)
      : rw_(rw), tracer_(tracer), sink_(sink), n_(sink.width), report_(report), origins_(n_), cones_(n_) {}

  // Returns the replacement value, or nullopt when every chunk is scalar.
  std::optional<ValueRef> run() {
    mark_ = rw_.checkpoint();
    std::vector<Width> bits;
    ValueRef src;
    if (check_bit(0, n_ - 1, bits, src) && *std::min_element(bits.begin(), bits.end()) == 0) {
      report_.full_width = true;
      report_.chunks = {Chunk{n_ - 1, 0, ChunkMethod::BitPermutation}};
      return build_gather(rw_.module(), src, bits);
    }
    if (auto shape = check_cones(0, n_ - 1)) {
      report_.full_width = true;
      report_.chunks = {Chunk{n_ - 1, 0, ChunkMethod::Structural}};
      return build_vector_expr(rw_.module(), cone(0), *shape, n_);
    }
    return partial();
  }

private:
  const std::optional<BitOrigin>& origin(Width i) {
    auto& slot = origins_[i];
    if (!slot) {
      const std::uint64_t before = tracer_.visits();
      slot = tracer_.origin(sink_, i);
      report_.trace_visits += tracer_.visits() - before;
    }
    return *slot;
  }

  const LogicCone& cone(Width i) {
    if (!cones_[i]) {
      ConeStats st;
      cones_[i] = std::make_unique<LogicCone>(backward_cone(tracer_, BitRef{sink_, i}, &st));
      report_.cone_visits += st.node_visits + st.edge_visits;
    }
    return *cones_[i];
  }

  // Distinct bits of one non-constant source covering a contiguous window.
  bool check_bit(Width lo, Width hi, std::vector<Width>& bits, ValueRef& src) {
    bits.clear();
    for (Width i = lo; i <= hi; ++i) {
      const auto& o = origin(i);
      if (!o || o->is_constant) return false;
      if (i == lo) src = o->source;
      if (!o->source.same_value(src)) return false;
      bits.push_back(o->bit);
    }
    std::vector<Width> sorted = bits;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k] != sorted[0] + k) return false;
    return true;
  }

  std::optional<ConeShape> check_cones(Width lo, Width hi) {
    std::vector<const LogicCone*> cs;
    for (Width i = lo; i <= hi; ++i) {
      const LogicCone& c = cone(i);
      // Cheap rejections before building the rest.
      if (!c.analyzable || c.root_is_leaf) return std::nullopt;
      cs.push_back(&c);
    }
    return check_structure(cs);
  }

  std::optional<ValueRef> partial() {
    struct Planned {
      Chunk chunk;
      ValueRef value;
    };
    std::vector<Planned> plan;
    bool any = false;
    for (std::int64_t i = static_cast<std::int64_t>(n_) - 1; i >= 0;) {
      const Width hi = static_cast<Width>(i);
      bool found = false;
      for (Width j = 0; j < hi; ++j) {
        ++report_.candidates;
        std::vector<Width> bits;
        ValueRef src;
        if (is_whole_operand(j, hi)) {
          // Already one word-level value; rebuilding it bit by bit only adds ops.
          plan.push_back({Chunk{hi, j, ChunkMethod::Scalar}, ValueRef{}});
          found = true;
          i = static_cast<std::int64_t>(j) - 1;
          break;
        }
        if (check_bit(j, hi, bits, src)) {
          plan.push_back({Chunk{hi, j, ChunkMethod::BitPermutation}, build_gather(rw_.module(), src, bits)});
        } else if (auto shape = check_cones(j, hi)) {
          plan.push_back({Chunk{hi, j, ChunkMethod::Structural}, build_vector_expr(rw_.module(), cone(j), *shape, hi - j + 1)});
        } else {
          continue;
        }
        found = any = true;
        i = static_cast<std::int64_t>(j) - 1;
        break;
      }
      if (!found) {
        plan.push_back({Chunk{hi, hi, ChunkMethod::Scalar}, ValueRef{}});
        --i;
      }
    }
    // Merge adjacent scalar bits into one chunk.
    std::vector<Planned> merged;
    for (auto& p : plan) {
      if (!merged.empty() && p.chunk.method == ChunkMethod::Scalar && merged.back().chunk.method == ChunkMethod::Scalar)
        merged.back().chunk.low = p.chunk.low;
      else
        merged.push_back(p);
    }
    report_.chunks.clear();
    for (const auto& p : merged) report_.chunks.push_back(p.chunk);
    if (!any) return std::nullopt;

    HwModule& m = rw_.module();
    std::vector<ValueRef> parts;
    for (const auto& p : merged) {
      if (p.chunk.method == ChunkMethod::Scalar) {
        scalar_pieces(p.chunk.high, p.chunk.low, parts);
        continue;
      }
      const Operation& op = m.ops[p.value.op];
      if (p.value.op >= mark_ && op.kind == OpKind::Concat) {
        const auto operands = op.operands;
        parts.insert(parts.end(), operands.begin(), operands.end());
      } else {
        parts.push_back(p.value);
      }
    }
    return parts.size() == 1 ? parts[0] : m.concat(parts);
  }

  bool is_whole_operand(Width lo, Width hi) const {
    if (hi == lo) return false;
    Width top = n_;
    for (const auto& v : rw_.module().ops[sink_.op].operands) {
      const Width off = top - v.width;
      top = off;
      if (off == lo && off + v.width - 1 == hi) return true;
    }
    return false;
  }

  // Pieces of the original Concat operands covering [hi:lo], MSB first.
  void scalar_pieces(Width hi, Width lo, std::vector<ValueRef>& out) {
    HwModule& m = rw_.module();
    const auto operands = m.ops[sink_.op].operands;
    Width top = n_;
    for (const auto& v : operands) {
      const Width off = top - v.width;
      top = off;
      const Width a = std::max(off, lo);
      const Width b = std::min(off + v.width - 1, hi);
      if (a > b) continue;
      if (a == off && b == off + v.width - 1)
        out.push_back(v);
      else
        out.push_back(m.extract(v, a - off, b - a + 1));
    }
  }

  ModuleRewriter& rw_;
  BitTracer& tracer_;
  ValueRef sink_;
  Width n_;
  SinkReport& report_;
  std::size_t mark_ = 0;
  std::vector<std::optional<std::optional<BitOrigin>>> origins_;
  std::vector<std::unique_ptr<LogicCone>> cones_;
};

PatternCategory categorize(const std::vector<Chunk>& chunks) {
  bool bit = false;
  bool structural = false;
  for (const auto& c : chunks) {
    bit |= c.method == ChunkMethod::BitPermutation;
    structural |= c.method == ChunkMethod::Structural;
  }
  if (bit && structural) return PatternCategory::Mixed;
  if (bit) return PatternCategory::BitLevel;
  if (structural) return PatternCategory::Structural;
  return PatternCategory::None;
}

}  // namespace

SinkReport vectorize_output(ModuleRewriter& rw, BitTracer& tracer, ValueRef sink) {
  SinkReport report;
  report.width = sink.width;
  HwModule& m = rw.module();
  if (sink.width < 2 || m.ops[sink.op].kind != OpKind::Concat) {
    report.chunks = {Chunk{sink.width ? sink.width - 1 : 0, 0, ChunkMethod::Scalar}};
    return report;
  }
  const std::size_t mark = rw.checkpoint();
  SinkVectorizer sv(rw, tracer, sink, report);
  const auto value = sv.run();
  if (!value) return report;
  bool assisted = false;
  const std::string before = expression_signature(m, sink, &assisted);
  if (expression_signature(m, *value) == before) {
    rw.rollback(mark);
    tracer.forget_from(static_cast<OpId>(mark));
    return report;
  }
  rw.replace_all_uses(sink, *value);
  report.rewritten = true;
  report.category = categorize(report.chunks);
  report.inlining_assisted = assisted;
  return report;
}

std::vector<SinkReport> vectorize_module(HwModule& m) {
  std::vector<SinkReport> out;
  if (m.is_extern) return out;
  const IrMetrics mt = metrics(m);
  ModuleRewriter rw(m);
  BitTracer tracer(m);
  std::unordered_set<ValueRef, ValueRefHash> done;

  struct Target {
    std::string name;
    bool is_output;
  };
  std::vector<Target> targets;
  for (const auto& o : m.outputs) targets.push_back({o.name, true});
  for (const auto& w : m.wires) targets.push_back({w.name, false});

  for (const auto& t : targets) {
    const NamedValue* nv = t.is_output ? m.find_output(t.name) : m.find_wire(t.name);
    const ValueRef sink = rw.resolve(nv->value);
    if (sink.width < 2 || m.ops[sink.op].kind != OpKind::Concat) continue;
    if (!done.insert(sink).second) continue;
    SinkReport r = vectorize_output(rw, tracer, sink);
    r.module = m.name;
    r.sink = t.name;
    r.is_output = t.is_output;
    r.depth = mt.max_depth;
    r.graph_size = mt.op_count + mt.edge_count;
    if (r.rewritten) done.insert(rw.resolve(sink));
    out.push_back(std::move(r));
  }
  if (rw.changed()) rw.finish();
  return out;
}

PipelineResult run_pipeline(const HwDesign& design, const InlinePolicy& policy) {
  const auto start = std::chrono::steady_clock::now();
  if (auto v = verify(design); !v.empty()) throw VerificationError(std::move(v));
  PipelineResult result;
  result.instructions_before = count_instructions(design);
  InlineResult inl = selective_inline(design, policy);
  result.design = std::move(inl.design);
  result.inline_log = std::move(inl.log);
  result.instructions_after_inline = count_instructions(result.design);
  for (auto& m : result.design.modules) {
    auto sinks = vectorize_module(m);
    for (auto& s : sinks) {
      result.tallies.add(s);
      result.sinks.push_back(std::move(s));
    }
  }
  if (auto v = verify(result.design); !v.empty())
    throw std::logic_error("vectorized design does not verify: " + v.front().module + ": " + v.front().message);
  result.instructions_after = count_instructions(result.design);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace busweaver
