#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "busweaver/ir.hpp"

namespace busweaver {

struct InlinePolicy {
  /// Callees whose recursive size is strictly below this are inlined.
  std::uint64_t threshold = 150;
  bool enabled = true;
};

enum class InlineDecision : std::uint8_t { Inlined, SizeRejected, Irregular, ExternCallee, UnknownCallee, Disabled };

std::string_view inline_decision_name(InlineDecision d);

struct InlineLogEntry {
  std::string module;  // caller
  std::string site;    // instance name
  std::string callee;
  InlineDecision decision = InlineDecision::Inlined;
  std::string reason;
  std::uint64_t callee_size = 0;
};

struct InlineResult {
  HwDesign design;
  std::vector<InlineLogEntry> log;

  std::size_t inlined_sites() const;
};

/// True when every operation is of an analyzable kind. Without a design, any
/// instance makes the module irregular; with one, an instance is allowed when
/// its callee is itself regular and its size is below `policy.threshold`.
bool regularity_analysis(const HwModule& module);
bool regularity_analysis(const HwModule& module, const HwDesign& design, const InlinePolicy& policy = {});

/// Own operations (excluding instances) plus the recursive size of every
/// instantiated module, counted once per instance. Unknown and extern
/// callees contribute 0.
std::uint64_t size_analysis(const HwModule& module, const HwDesign& design);

/// Bottom-up over the instantiation graph: every instance of a regular callee
/// whose size is below the threshold is replaced by a copy of its body.
InlineResult selective_inline(const HwDesign& design, const InlinePolicy& policy = {});

}  // namespace busweaver
