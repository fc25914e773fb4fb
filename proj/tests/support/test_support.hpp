#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "busweaver/frontend.hpp"
#include "busweaver/ir.hpp"
#include "busweaver/simulate.hpp"

namespace bwtest {

using busweaver::HwDesign;
using busweaver::HwModule;
using busweaver::Width;

/// Parses or aborts the test with the diagnostics.
HwDesign parse_ok(const std::string& text);

/// Directory holding the golden corpus.
std::string golden_dir();
std::string read_text(const std::string& path);

using Inputs = std::map<std::string, std::uint64_t>;
using Outputs = std::map<std::string, std::uint64_t>;

/// Independent evaluator for IR with values up to 64 bits, used to
/// cross-check the library simulator. Recurses through instances.
Outputs reference_eval(const HwDesign& design, const HwModule& module, const Inputs& inputs);

busweaver::PortValues to_ports(const HwModule& m, const Inputs& in);
Outputs from_ports(const busweaver::PortValues& pv);

/// Every input assignment of `m` (total width must be <= 20).
void for_each_input(const HwModule& m, const std::function<void(const Inputs&)>& f);
Inputs random_inputs(const HwModule& m, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Generators

struct PermutationCase {
  std::vector<Width> pi;  // out[i] = in[pi[i]]
  std::string verilog;
};
PermutationCase random_permutation(Width n, std::mt19937_64& rng);

/// Replicated per-bit logic template.
struct ConeTemplate {
  struct Node {
    enum class Kind { And, Or, Xor, Not, Mux, Leaf } kind = Kind::Leaf;
    std::vector<int> children;
    int leaf = -1;
  };
  enum class Mode { Same, Reversed, Invariant, ConstZero, ConstOne, ConstPattern };
  struct Leaf {
    Mode mode = Mode::Same;
    int bus = 0;       // varying buses and the invariant bus
    Width bit = 0;     // Invariant: fixed bit
    std::uint64_t pattern = 0;  // ConstPattern: bit i of the constant vector
  };
  Width width = 2;
  int buses = 1;
  bool has_invariant = false;
  std::vector<Node> nodes;  // nodes[0] is the root
  std::vector<Leaf> leaves;
  std::vector<Mode> bus_mode;  // Same or Reversed per varying bus

  std::string verilog(const std::string& module = "cone") const;
  /// Expected value of out for the given inputs.
  std::uint64_t expected(const Inputs& in) const;
  bool uses_invariant() const;
};
ConeTemplate random_cone_template(std::mt19937_64& rng, int max_depth = 5);

/// Scalarized ripple-carry adder with shared propagate and carry wires.
std::string ripple_adder(Width n, bool carry_in);

}  // namespace bwtest
