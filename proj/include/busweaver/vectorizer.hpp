#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "busweaver/bit_permutation.hpp"
#include "busweaver/inliner.hpp"
#include "busweaver/ir.hpp"
#include "busweaver/structural_cones.hpp"

namespace busweaver {

enum class ChunkMethod : std::uint8_t { BitPermutation, Structural, Scalar };
std::string_view chunk_method_name(ChunkMethod m);

struct Chunk {
  Width high = 0;
  Width low = 0;
  ChunkMethod method = ChunkMethod::Scalar;
  Width width() const { return high - low + 1; }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

enum class PatternCategory : std::uint8_t { None, BitLevel, Structural, Mixed };
std::string_view pattern_category_name(PatternCategory c);

/// Outcome for one vectorization target (a multi-bit output or wire).
struct SinkReport {
  std::string module;
  std::string sink;
  bool is_output = true;
  Width width = 0;
  /// MSB chunk first; tiles [width-1..0].
  std::vector<Chunk> chunks;
  bool full_width = false;  // won before partial segmentation
  bool rewritten = false;
  PatternCategory category = PatternCategory::None;
  bool inlining_assisted = false;

  // Work counters.
  std::uint64_t trace_visits = 0;  // bit-origin tracing, all bits of this sink
  std::uint64_t depth = 0;         // module depth D when analysis started
  std::uint64_t cone_visits = 0;   // cone construction node + edge visits
  std::uint64_t graph_size = 0;    // V + E when analysis started
  std::uint64_t candidates = 0;    // chunks tested by the greedy scan
};

struct PatternTallies {
  std::uint64_t bit_level = 0;
  std::uint64_t structural = 0;
  std::uint64_t mixed = 0;
  std::uint64_t inlining_assisted = 0;  // overlay on the three above

  std::uint64_t total() const { return bit_level + structural + mixed; }
  void add(const SinkReport& s);
};

/// Tries full-width permutation, full-width structural, then greedy chunk
/// segmentation on one Concat-rooted sink. Uses of `sink` are redirected
/// through `rw`; nothing is recorded when the result would be structurally
/// identical to the current expression.
SinkReport vectorize_output(ModuleRewriter& rw, BitTracer& tracer, ValueRef sink);

/// Vectorizes every multi-bit Concat-rooted output, then wire, of `module`.
std::vector<SinkReport> vectorize_module(HwModule& module);

/// Structural fingerprint of the expression DAG rooted at `root`, independent
/// of operation numbering. Sets `touches_inline` when any operation in the
/// DAG came from an inlined callee.
std::string expression_signature(const HwModule& module, ValueRef root, bool* touches_inline = nullptr);

class VerificationError : public std::runtime_error {
public:
  explicit VerificationError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::vector<Violation> violations_;
};

struct PipelineResult {
  HwDesign design;
  std::vector<InlineLogEntry> inline_log;
  std::vector<SinkReport> sinks;
  PatternTallies tallies;
  std::uint64_t instructions_before = 0;
  std::uint64_t instructions_after_inline = 0;
  std::uint64_t instructions_after = 0;
  double seconds = 0.0;

  std::uint64_t rewrites() const { return tallies.total(); }
};

/// Selective inlining followed by vectorization of every module. Throws
/// VerificationError when the input design does not verify.
PipelineResult run_pipeline(const HwDesign& design, const InlinePolicy& policy = {});

}  // namespace busweaver
