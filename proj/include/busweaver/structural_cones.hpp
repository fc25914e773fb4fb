#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "busweaver/bit_permutation.hpp"
#include "busweaver/ir.hpp"

namespace busweaver {

/// A leaf of a cone: one bit of an input port or of a constant.
struct ConeLeaf {
  ValueRef source;
  Width bit = 0;
  bool is_constant = false;
  bool constant_value = false;
};

/// One bit-level logic node of a cone. Children >= 0 index `LogicCone::nodes`;
/// a negative child c refers to leaf slot -c-1.
struct ConeNode {
  OpId op = kNoOp;
  Width bit = 0;
  OpKind kind = OpKind::And;  // canonical kind; 1-bit Add/Sub appear as Xor
  std::vector<int> children;
};

struct LogicCone {
  BitRef root;
  /// Preorder from the root; nodes[0] is the root when it is a logic node.
  std::vector<ConeNode> nodes;
  /// Distinct leaves in first-encounter order.
  std::vector<ConeLeaf> leaves;
  /// Set when the root is itself a leaf (`nodes` is empty).
  bool root_is_leaf = false;
  bool analyzable = true;
  std::string failure;

  /// Canonical serialization of the skeleton: node kinds, connectivity, and
  /// leaf slot markers (`i` for inputs, `c` for constants).
  std::string skeleton() const;
};

struct ConeStats {
  std::uint64_t node_visits = 0;  // logic nodes entered
  std::uint64_t edge_visits = 0;  // operand edges followed (wiring steps included)
};

LogicCone backward_cone(const HwModule& module, BitRef root, ConeStats* stats = nullptr);
LogicCone backward_cone(BitTracer& tracer, BitRef root, ConeStats* stats = nullptr);

/// Pairwise disjoint logic-node sets. Shared leaves are allowed.
bool is_independent(const std::vector<LogicCone>& cones);
bool is_independent(const std::vector<const LogicCone*>& cones);

/// How one leaf slot evolves across the cones, LSB cone first.
struct SlotProgression {
  enum class Kind : std::uint8_t { Invariant, Varying, ConstantVector };
  Kind kind = Kind::Invariant;
  ConeLeaf invariant;          // Invariant
  ValueRef source;             // Varying
  std::vector<Width> bits;     // Varying: source bit per cone
  BitVector constant;          // ConstantVector: bit per cone
};

struct ConeShape {
  std::string skeleton;
  std::vector<SlotProgression> slots;
};

/// Checks identical skeletons and a consistent per-slot progression:
/// invariant (same input bit, or equal constant bits), varying (distinct bits
/// of one input covering a contiguous window), or a per-bit constant vector.
/// On failure `why` names the first offending cone or slot.
std::optional<ConeShape> is_isomorphic(const std::vector<const LogicCone*>& cones, std::string* why = nullptr);
std::optional<ConeShape> is_isomorphic(const std::vector<LogicCone>& cones, std::string* why = nullptr);

/// Output bit -> source bit for every varying slot (empty maps elsewhere).
std::vector<std::vector<Width>> extract_permutation(const ConeShape& shape);

/// Builds the vector form of `representative` over `n` bits: varying slots
/// become gathered operands, invariant slots stay one bit wide and are
/// replicated where they meet vector operands, and a uniform mux select
/// stays a 1-bit condition.
ValueRef build_vector_expr(HwModule& module, const LogicCone& representative, const ConeShape& shape, Width n);

/// Structural check over the given per-bit cones (LSB first): every cone is
/// analyzable with at least one logic node, the set is independent, and it
/// is isomorphic.
std::optional<ConeShape> check_structure(const std::vector<const LogicCone*>& cones, std::string* why = nullptr);

}  // namespace busweaver
