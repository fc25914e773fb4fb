#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "busweaver/bitvector.hpp"

namespace busweaver {

using OpId = std::uint32_t;
inline constexpr OpId kNoOp = std::numeric_limits<OpId>::max();

enum class OpKind : std::uint8_t {
  InputRef,
  Constant,
  Extract,
  Concat,
  Reverse,
  Replicate,
  And,
  Or,
  Xor,
  Not,
  Add,
  Sub,
  Mux,
  Instance,
};

std::string_view op_kind_name(OpKind kind);

/// Pure bit routing: every result bit equals exactly one operand bit.
constexpr bool is_wiring(OpKind k) {
  return k == OpKind::Extract || k == OpKind::Concat || k == OpKind::Reverse || k == OpKind::Replicate;
}
constexpr bool is_bitwise_logic(OpKind k) {
  return k == OpKind::And || k == OpKind::Or || k == OpKind::Xor || k == OpKind::Not || k == OpKind::Mux;
}
constexpr bool is_arithmetic(OpKind k) { return k == OpKind::Add || k == OpKind::Sub; }

/// Reference to one result of an operation. Every operation except Instance
/// has exactly one result (index 0).
struct ValueRef {
  OpId op = kNoOp;
  std::uint32_t result = 0;
  Width width = 0;

  bool valid() const { return op != kNoOp; }
  bool same_value(const ValueRef& o) const { return op == o.op && result == o.result; }
  friend bool operator==(const ValueRef&, const ValueRef&) = default;
  friend auto operator<=>(const ValueRef&, const ValueRef&) = default;
};

struct ValueRefHash {
  std::size_t operator()(const ValueRef& v) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{v.op} << 20) ^ v.result);
  }
};

struct Operation {
  OpKind kind = OpKind::Constant;
  std::vector<ValueRef> operands;
  /// Result width. Instances carry per-result widths in `result_widths` instead.
  Width width = 0;

  std::uint32_t low = 0;    // Extract: first operand bit
  std::uint32_t count = 0;  // Replicate: repetition count
  BitVector value;          // Constant
  std::string name;         // InputRef: port name; Instance: instance name
  std::string callee;       // Instance: module name
  std::vector<Width> result_widths;  // Instance: callee output widths, port order

  /// Copied into this module by the inliner.
  bool from_inline = false;

  std::size_t result_count() const { return kind == OpKind::Instance ? result_widths.size() : 1; }
  Width result_width(std::uint32_t index) const {
    return kind == OpKind::Instance ? result_widths.at(index) : width;
  }
};

enum class PortDir : std::uint8_t { Input, Output };

struct Port {
  std::string name;
  PortDir dir = PortDir::Input;
  Width width = 1;
  friend bool operator==(const Port&, const Port&) = default;
};

/// A net name bound to a value: an output port or an internal wire.
struct NamedValue {
  std::string name;
  ValueRef value;
};

struct HwModule {
  std::string name;
  std::vector<Port> ports;
  /// Topologically ordered; InputRef operations appear first, in port order.
  std::vector<Operation> ops;
  /// One binding per output port, in port order.
  std::vector<NamedValue> outputs;
  /// Internal wires, in declaration order.
  std::vector<NamedValue> wires;
  /// Declared with `extern module`: ports only, opaque body.
  bool is_extern = false;

  const Operation& op(OpId id) const { return ops.at(id); }
  const Operation& def(const ValueRef& v) const { return ops.at(v.op); }

  std::vector<Port> input_ports() const;
  std::vector<Port> output_ports() const;
  /// The InputRef value of the named input port.
  std::optional<ValueRef> input_value(std::string_view port) const;
  const NamedValue* find_output(std::string_view port) const;
  const NamedValue* find_wire(std::string_view wire) const;

  /// Appends an operation and returns its first result.
  ValueRef add(Operation op);

  // Builder helpers, used by the frontend, passes, and tests.
  ValueRef add_input(const std::string& port_name, Width width);
  void add_output(const std::string& port_name, ValueRef value);
  ValueRef constant(const BitVector& value);
  ValueRef extract(ValueRef v, std::uint32_t low, Width width);
  ValueRef concat(const std::vector<ValueRef>& msb_first);
  ValueRef reverse(ValueRef v);
  ValueRef replicate(ValueRef v, std::uint32_t count);
  ValueRef unary(OpKind kind, ValueRef v);
  ValueRef binary(OpKind kind, ValueRef a, ValueRef b);
  ValueRef mux(ValueRef cond, ValueRef if_true, ValueRef if_false);
};

struct HwDesign {
  std::vector<HwModule> modules;  // source order
  std::string top;

  HwModule* find(std::string_view name);
  const HwModule* find(std::string_view name) const;
  /// Module names ordered callee-before-caller. Unknown callees are skipped.
  std::vector<std::string> bottom_up_order() const;
};

struct IrMetrics {
  std::uint64_t op_count = 0;    // V
  std::uint64_t edge_count = 0;  // E
  std::uint64_t max_depth = 0;   // D
};

/// Number of operations excluding InputRef. Output bindings are not operations.
std::uint64_t count_instructions(const HwModule& module);
std::uint64_t count_instructions(const HwDesign& design);

/// V = operations excluding InputRef, E = operand references of those
/// operations, D = longest operation path (InputRef contributes no depth).
IrMetrics metrics(const HwModule& module);

/// Depth of each operation: 0 for InputRef, 1 + max operand depth otherwise.
std::vector<std::uint32_t> op_depths(const HwModule& module);

struct Violation {
  std::string module;
  std::string message;
};

/// Structural verifier: acyclicity, def-before-use, width consistency,
/// instance resolution and port matching, acyclic instantiation graph.
/// Returns every violation found; empty means the design is well formed.
std::vector<Violation> verify(const HwDesign& design);
std::vector<Violation> verify_module(const HwModule& module, const HwDesign* design = nullptr);

/// Debug dump, one operation per line (`%id = kind(operands) : width`).
std::string dump_module(const HwModule& module);
std::string dump_design(const HwDesign& design);

/// Users of each value, counted over operation operands only.
std::vector<std::uint32_t> use_counts(const HwModule& module);

/// Applies `replacements` to every operand and binding, erases operations
/// marked in `erased`, removes unreachable operations and renumbers the rest
/// in a canonical DFS postorder from the module's roots (inputs, outputs,
/// wires, remaining instances). Running it twice is a no-op.
void compact_module(HwModule& module,
                    const std::unordered_map<ValueRef, ValueRef, ValueRefHash>& replacements = {},
                    const std::vector<bool>& erased = {});

/// Append-only editing session over one module.
class ModuleRewriter {
public:
  explicit ModuleRewriter(HwModule& module) : module_(module) {}

  HwModule& module() { return module_; }
  const HwModule& module() const { return module_; }

  ValueRef add(Operation op) { return module_.add(std::move(op)); }

  std::size_t checkpoint() const { return module_.ops.size(); }
  /// Drops every operation appended after `mark`.
  void rollback(std::size_t mark) { module_.ops.resize(mark); }

  /// All uses of `from` will read `to` after `finish()`.
  void replace_all_uses(ValueRef from, ValueRef to);
  void erase(OpId op);
  /// Follows recorded replacements to the current value.
  ValueRef resolve(ValueRef v) const;
  bool changed() const { return !replacements_.empty() || any_erased_; }

  void finish();

private:
  HwModule& module_;
  std::unordered_map<ValueRef, ValueRef, ValueRefHash> replacements_;
  std::vector<bool> erased_;
  bool any_erased_ = false;
};

}  // namespace busweaver
