#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "busweaver/ir.hpp"

namespace busweaver {

/// One bit of a value.
struct BitRef {
  ValueRef value;
  Width bit = 0;
};

/// Where a wiring-only chain ends up.
struct BitOrigin {
  ValueRef source;  // an InputRef or Constant result
  Width bit = 0;
  bool is_constant = false;
  bool constant_value = false;
};

/// Follows wiring operations backward through one module. Concat offset
/// tables are cached per operation, so tracing every bit of a wide
/// concatenation stays linear. The cache assumes existing operations are not
/// mutated; appending new ones is fine.
class BitTracer {
public:
  explicit BitTracer(const HwModule& module) : module_(module) {}

  /// Walks Extract/Concat/Reverse/Replicate until the first non-wiring
  /// operation. Each wiring step and the final operation count as visits,
  /// except InputRef, which contributes no depth.
  BitRef resolve(ValueRef value, Width bit);

  /// The input or constant bit feeding `value[bit]`, or nullopt when the
  /// chain passes through logic, arithmetic, a mux or an instance.
  std::optional<BitOrigin> origin(ValueRef value, Width bit);

  /// Drops cached tables for operations at or above `first` (after a rollback).
  void forget_from(OpId first);

  std::uint64_t visits() const { return visits_; }
  void reset_visits() { visits_ = 0; }
  const HwModule& module() const { return module_; }

private:
  const std::vector<Width>& concat_offsets(OpId op);

  const HwModule& module_;
  std::unordered_map<OpId, std::vector<Width>> offsets_;
  std::uint64_t visits_ = 0;
  OpId max_cached_ = 0;
};

std::optional<BitOrigin> trace_bit_origin(const HwModule& module, ValueRef value, Width bit,
                                          std::uint64_t* visits = nullptr);

struct PermutationMap {
  ValueRef source;
  /// pi[i] is the source bit driving output bit i (LSB first).
  std::vector<Width> pi;

  Width width() const { return static_cast<Width>(pi.size()); }
};

struct Segment {
  ValueRef source;
  Width low = 0;
  Width width = 0;
};

/// Succeeds when every output bit traces to a distinct bit of one
/// non-constant source and those bits are exactly {0..N-1}.
std::optional<PermutationMap> detect_permutation(const HwModule& module, ValueRef output,
                                                 std::uint64_t* visits = nullptr);
std::optional<PermutationMap> detect_permutation(BitTracer& tracer, ValueRef output);

/// Maximal ascending runs, LSB segment first.
std::vector<Segment> greedy_group(const PermutationMap& pi);

/// Builds the value whose bit i is `source[bits[i]]`. Identity of the whole
/// source returns `source` itself; a contiguous ascending window becomes one
/// Extract; a contiguous descending window becomes a Reverse (of an Extract
/// unless the window is the whole source); anything else is a Concat of the
/// greedy segments.
ValueRef build_gather(HwModule& module, ValueRef source, const std::vector<Width>& bits);

/// Rewrites a verified permutation: uses of `output` read the gathered value
/// after `rw.finish()`. Returns the new value.
ValueRef rewrite_permutation(ModuleRewriter& rw, ValueRef output, const PermutationMap& pi);

}  // namespace busweaver
