#include "busweaver/inliner.hpp"

#include <functional>
#include <map>

namespace busweaver {

std::string_view inline_decision_name(InlineDecision d) {
  switch (d) {
    case InlineDecision::Inlined: return "inlined";
    case InlineDecision::SizeRejected: return "size-rejected";
    case InlineDecision::Irregular: return "irregular";
    case InlineDecision::ExternCallee: return "extern-callee";
    case InlineDecision::UnknownCallee: return "unknown-callee";
    case InlineDecision::Disabled: return "disabled";
  }
  return "?";
}

std::size_t InlineResult::inlined_sites() const {
  std::size_t n = 0;
  for (const auto& e : log) n += e.decision == InlineDecision::Inlined;
  return n;
}

namespace {

class SizeCache {
public:
  explicit SizeCache(const HwDesign& d) : design_(d) {}

  std::uint64_t size(const HwModule& m) {
    if (auto it = cache_.find(m.name); it != cache_.end()) return it->second;
    std::uint64_t n = 0;
    for (const auto& op : m.ops) {
      if (op.kind == OpKind::InputRef) continue;
      if (op.kind != OpKind::Instance) {
        ++n;
        continue;
      }
      const HwModule* c = design_.find(op.callee);
      if (c != nullptr && c != &m) n += size(*c);
    }
    cache_[m.name] = n;
    return n;
  }

  void invalidate(const std::string& name) { cache_.erase(name); }

private:
  const HwDesign& design_;
  std::map<std::string, std::uint64_t, std::less<>> cache_;
};

bool own_ops_regular(const HwModule& m) {
  if (m.is_extern) return false;
  for (const auto& op : m.ops)
    if (op.kind == OpKind::Instance) return false;
  return true;
}

bool regular_rec(const HwModule& m, const HwDesign& d, const InlinePolicy& policy, SizeCache& sizes,
                 std::map<std::string, bool, std::less<>>& memo) {
  if (auto it = memo.find(m.name); it != memo.end()) return it->second;
  memo[m.name] = false;  // guards recursive instantiation
  bool ok = !m.is_extern;
  for (const auto& op : m.ops) {
    if (!ok) break;
    if (op.kind != OpKind::Instance) continue;
    const HwModule* c = d.find(op.callee);
    ok = c != nullptr && regular_rec(*c, d, policy, sizes, memo) && sizes.size(*c) < policy.threshold;
  }
  memo[m.name] = ok;
  return ok;
}

void inline_instance(ModuleRewriter& rw, OpId site, const HwModule& callee) {
  HwModule& m = rw.module();
  const Operation inst = m.ops[site];
  std::map<std::string, ValueRef, std::less<>> args;
  {
    std::size_t k = 0;
    for (const auto& p : callee.ports)
      if (p.dir == PortDir::Input) args[p.name] = rw.resolve(inst.operands.at(k++));
  }
  std::vector<ValueRef> mapped(callee.ops.size());
  for (OpId i = 0; i < callee.ops.size(); ++i) {
    const auto& src = callee.ops[i];
    if (src.kind == OpKind::InputRef) {
      mapped[i] = args.at(src.name);
      continue;
    }
    Operation op = src;
    for (auto& v : op.operands) v = ValueRef{mapped[v.op].op, mapped[v.op].result, v.width};
    op.from_inline = true;
    mapped[i] = rw.add(std::move(op));
  }
  for (std::uint32_t r = 0; r < callee.outputs.size(); ++r) {
    const ValueRef& out = callee.outputs[r].value;
    const ValueRef to{mapped[out.op].op, mapped[out.op].result, out.width};
    rw.replace_all_uses(ValueRef{site, r, inst.result_widths.at(r)}, to);
  }
  rw.erase(site);
}

}  // namespace

bool regularity_analysis(const HwModule& module) { return own_ops_regular(module); }

bool regularity_analysis(const HwModule& module, const HwDesign& design, const InlinePolicy& policy) {
  SizeCache sizes(design);
  std::map<std::string, bool, std::less<>> memo;
  return regular_rec(module, design, policy, sizes, memo);
}

std::uint64_t size_analysis(const HwModule& module, const HwDesign& design) {
  return SizeCache(design).size(module);
}

InlineResult selective_inline(const HwDesign& design, const InlinePolicy& policy) {
  InlineResult result;
  result.design = design;
  HwDesign& d = result.design;
  SizeCache sizes(d);

  for (const auto& name : d.bottom_up_order()) {
    HwModule* m = d.find(name);
    if (m == nullptr || m->is_extern) continue;
    ModuleRewriter rw(*m);
    const std::size_t original = m->ops.size();
    for (OpId i = 0; i < original; ++i) {
      if (m->ops[i].kind != OpKind::Instance) continue;
      InlineLogEntry entry;
      entry.module = m->name;
      entry.site = m->ops[i].name;
      entry.callee = m->ops[i].callee;
      const HwModule* callee = d.find(entry.callee);
      if (callee == nullptr) {
        entry.decision = InlineDecision::UnknownCallee;
        entry.reason = "module is not defined";
      } else if (callee->is_extern) {
        entry.decision = InlineDecision::ExternCallee;
        entry.reason = "callee is an extern module";
      } else {
        entry.callee_size = sizes.size(*callee);
        if (!policy.enabled) {
          entry.decision = InlineDecision::Disabled;
          entry.reason = "inlining disabled";
        } else if (!own_ops_regular(*callee)) {
          entry.decision = InlineDecision::Irregular;
          entry.reason = "callee keeps non-inlined instances";
        } else if (entry.callee_size >= policy.threshold) {
          entry.decision = InlineDecision::SizeRejected;
          entry.reason = "size " + std::to_string(entry.callee_size) + " >= threshold " +
                         std::to_string(policy.threshold);
        } else {
          entry.decision = InlineDecision::Inlined;
          entry.reason = "size " + std::to_string(entry.callee_size) + " < threshold " +
                         std::to_string(policy.threshold);
          inline_instance(rw, i, *callee);
        }
      }
      result.log.push_back(std::move(entry));
    }
    if (rw.changed()) {
      rw.finish();
      sizes.invalidate(m->name);
    }
  }
  return result;
}

}  // namespace busweaver
