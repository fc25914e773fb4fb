#include "busweaver/bit_permutation.hpp"

#include <algorithm>

namespace busweaver {

const std::vector<Width>& BitTracer::concat_offsets(OpId op) {
  auto it = offsets_.find(op);
  if (it != offsets_.end()) return it->second;
  // offsets[k] is the lowest result bit of operand k (operands are MSB first).
  const auto& operands = module_.ops[op].operands;
  std::vector<Width> offsets(operands.size());
  Width acc = 0;
  for (std::size_t k = operands.size(); k-- > 0;) {
    offsets[k] = acc;
    acc += operands[k].width;
  }
  max_cached_ = std::max(max_cached_, op);
  return offsets_.emplace(op, std::move(offsets)).first->second;
}

void BitTracer::forget_from(OpId first) {
  if (offsets_.empty() || max_cached_ < first) return;
  std::erase_if(offsets_, [&](const auto& kv) { return kv.first >= first; });
  max_cached_ = 0;
  for (const auto& kv : offsets_) max_cached_ = std::max(max_cached_, kv.first);
}

BitRef BitTracer::resolve(ValueRef value, Width bit) {
  for (;;) {
    const Operation& op = module_.ops.at(value.op);
    if (op.kind != OpKind::InputRef) ++visits_;
    switch (op.kind) {
      case OpKind::Extract:
        bit += op.low;
        value = op.operands[0];
        break;
      case OpKind::Reverse:
        bit = op.width - 1 - bit;
        value = op.operands[0];
        break;
      case OpKind::Replicate:
        bit %= op.operands[0].width;
        value = op.operands[0];
        break;
      case OpKind::Concat: {
        const auto& offsets = concat_offsets(value.op);
        // offsets descend with k; find the first operand whose offset <= bit.
        auto pos = std::lower_bound(offsets.begin(), offsets.end(), bit, std::greater<Width>());
        const std::size_t k = static_cast<std::size_t>(pos - offsets.begin());
        bit -= offsets[k];
        value = op.operands[k];
        break;
      }
      default:
        return BitRef{value, bit};
    }
  }
}

std::optional<BitOrigin> BitTracer::origin(ValueRef value, Width bit) {
  const BitRef r = resolve(value, bit);
  const Operation& op = module_.ops[r.value.op];
  if (op.kind == OpKind::InputRef) return BitOrigin{r.value, r.bit, false, false};
  if (op.kind == OpKind::Constant) return BitOrigin{r.value, r.bit, true, op.value.get(r.bit)};
  return std::nullopt;
}

std::optional<BitOrigin> trace_bit_origin(const HwModule& module, ValueRef value, Width bit, std::uint64_t* visits) {
  BitTracer t(module);
  auto o = t.origin(value, bit);
  if (visits != nullptr) *visits += t.visits();
  return o;
}

std::optional<PermutationMap> detect_permutation(BitTracer& tracer, ValueRef output) {
  const Width n = output.width;
  if (n < 2) return std::nullopt;
  PermutationMap map;
  map.pi.resize(n);
  std::vector<bool> used(n, false);
  for (Width i = 0; i < n; ++i) {
    const auto o = tracer.origin(output, i);
    if (!o || o->is_constant) return std::nullopt;
    if (i == 0) map.source = o->source;
    if (!o->source.same_value(map.source)) return std::nullopt;
    if (o->bit >= n || used[o->bit]) return std::nullopt;
    used[o->bit] = true;
    map.pi[i] = o->bit;
  }
  return map;
}

std::optional<PermutationMap> detect_permutation(const HwModule& module, ValueRef output, std::uint64_t* visits) {
  BitTracer t(module);
  auto p = detect_permutation(t, output);
  if (visits != nullptr) *visits += t.visits();
  return p;
}

namespace {
std::vector<Segment> runs(ValueRef source, const std::vector<Width>& bits) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < bits.size();) {
    std::size_t j = i;
    while (j + 1 < bits.size() && bits[j + 1] == bits[j] + 1) ++j;
    out.push_back(Segment{source, bits[i], static_cast<Width>(j - i + 1)});
    i = j + 1;
  }
  return out;
}

ValueRef slice(HwModule& m, ValueRef v, Width low, Width width) {
  if (low == 0 && width == v.width) return v;
  return m.extract(v, low, width);
}
}  // namespace

std::vector<Segment> greedy_group(const PermutationMap& pi) { return runs(pi.source, pi.pi); }

ValueRef build_gather(HwModule& m, ValueRef source, const std::vector<Width>& bits) {
  const Width n = static_cast<Width>(bits.size());
  const Width lo = *std::min_element(bits.begin(), bits.end());
  bool ascending = true;
  bool descending = true;
  for (Width i = 0; i < n; ++i) {
    ascending &= bits[i] == lo + i;
    descending &= bits[i] == lo + n - 1 - i;
  }
  if (ascending) return slice(m, source, lo, n);
  if (descending) return m.reverse(slice(m, source, lo, n));
  const auto segs = runs(source, bits);
  std::vector<ValueRef> parts;
  parts.reserve(segs.size());
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) parts.push_back(slice(m, source, it->low, it->width));
  return m.concat(parts);
}

ValueRef rewrite_permutation(ModuleRewriter& rw, ValueRef output, const PermutationMap& pi) {
  const ValueRef v = build_gather(rw.module(), pi.source, pi.pi);
  rw.replace_all_uses(output, v);
  return v;
}

}  // namespace busweaver
