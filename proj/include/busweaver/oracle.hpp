#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "busweaver/ir.hpp"
#include "busweaver/simulate.hpp"

namespace busweaver {

enum class VerdictStatus : std::uint8_t { EquivalentExhaustive, EquivalentSampled, Counterexample };
std::string_view verdict_status_name(VerdictStatus s);

struct Counterexample {
  PortValues inputs;
  PortValues expected;  // original
  PortValues actual;    // transformed
  std::string port;     // first differing output
};

struct EquivalenceVerdict {
  VerdictStatus status = VerdictStatus::EquivalentExhaustive;
  std::optional<Counterexample> counterexample;
  std::uint64_t vectors_tested = 0;
  std::uint64_t seed = 0;

  bool equivalent() const { return status != VerdictStatus::Counterexample; }
};

struct OracleOptions {
  std::uint32_t max_exhaustive_bits = 16;  // capped at 40
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  /// OpenMP threads for the bit-sliced kernel; 0 uses the runtime default.
  int threads = 0;
};

/// The two modules do not have the same ports.
class PortSignatureMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vectors are fed in batches of 64: exhaustive enumeration when the total
/// input width is at most `max_exhaustive_bits`, otherwise all-zeros,
/// all-ones, every one-hot vector, then `samples` seeded random vectors. The
/// verdict (including the counterexample) does not depend on thread count.
EquivalenceVerdict check_equivalence(const HwDesign& orig_design, const HwModule& orig, const HwDesign& xformed_design,
                                     const HwModule& xformed, const OracleOptions& options = {});
/// Modules without instances.
EquivalenceVerdict check_equivalence(const HwModule& orig, const HwModule& xformed, const OracleOptions& options = {});
/// Top modules of two designs.
EquivalenceVerdict check_equivalence(const HwDesign& orig, const HwDesign& xformed, const OracleOptions& options = {});

/// Same vector stream and verdict, one vector at a time through Simulator.
/// Kept as the reference the kernel is tested against.
EquivalenceVerdict check_equivalence_serial(const HwDesign& orig_design, const HwModule& orig,
                                            const HwDesign& xformed_design, const HwModule& xformed,
                                            const OracleOptions& options = {});

/// One verdict per non-extern module present in both designs.
struct ModuleVerdict {
  std::string module;
  EquivalenceVerdict verdict;
};
std::vector<ModuleVerdict> check_design_equivalence(const HwDesign& orig, const HwDesign& xformed,
                                                    const OracleOptions& options = {});

enum class MutationKind : std::uint8_t { SwapExtractIndices, FlipOperator, SwapConcatOperands };
std::string_view mutation_kind_name(MutationKind k);

struct MutationAudit {
  std::uint64_t requested = 0;
  std::uint64_t applied = 0;   // edits that produced a well-formed design
  std::uint64_t detected = 0;  // caught with a counterexample
  std::uint64_t seed = 0;
  std::vector<std::string> edits;
  /// detected / applied; nullopt when nothing was applied.
  std::optional<double> rate() const;
};

/// Applies `mutations` random single edits to the top module of `candidate`
/// and checks each mutant against `reference`.
MutationAudit mutation_audit(const HwDesign& reference, const HwDesign& candidate, std::uint64_t mutations,
                             std::uint64_t seed, const OracleOptions& options = {},
                             std::optional<MutationKind> only = std::nullopt);
MutationAudit mutation_audit(const HwDesign& design, std::uint64_t mutations, std::uint64_t seed,
                             const OracleOptions& options = {}, std::optional<MutationKind> only = std::nullopt);

}  // namespace busweaver
