#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "busweaver/bitvector.hpp"
#include "busweaver/ir.hpp"

namespace busweaver {

using PortValues = std::map<std::string, BitVector>;

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Reference evaluator: one input vector at a time, operations in
/// topological order, two's-complement arithmetic truncated to the result
/// width. Instances are evaluated recursively through `design`.
class Simulator {
public:
  explicit Simulator(const HwDesign& design) : design_(design) {}

  /// Throws SimulationError on an unbound or mis-sized input, an extern
  /// callee, or an unknown module.
  PortValues run(const HwModule& module, const PortValues& inputs) const;
  PortValues run(const std::string& module, const PortValues& inputs) const;

private:
  std::vector<BitVector> evaluate(const HwModule& module, const std::vector<BitVector>& inputs) const;

  const HwDesign& design_;
};

/// Single-module convenience wrapper for modules without instances.
PortValues simulate_value(const HwModule& module, const PortValues& inputs);

}  // namespace busweaver
