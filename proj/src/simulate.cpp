#include "busweaver/simulate.hpp"

namespace busweaver {

PortValues Simulator::run(const std::string& module, const PortValues& inputs) const {
  const HwModule* m = design_.find(module);
  if (m == nullptr) throw SimulationError("unknown module '" + module + "'");
  return run(*m, inputs);
}

PortValues Simulator::run(const HwModule& module, const PortValues& inputs) const {
  std::vector<BitVector> in;
  for (const auto& p : module.input_ports()) {
    auto it = inputs.find(p.name);
    if (it == inputs.end()) throw SimulationError("input port '" + p.name + "' is unbound");
    if (it->second.width() != p.width)
      throw SimulationError("input port '" + p.name + "' expects " + std::to_string(p.width) + " bits, got " +
                            std::to_string(it->second.width()));
    in.push_back(it->second);
  }
  const auto out = evaluate(module, in);
  PortValues result;
  const auto outs = module.output_ports();
  for (std::size_t k = 0; k < outs.size(); ++k) result.emplace(outs[k].name, out[k]);
  return result;
}

std::vector<BitVector> Simulator::evaluate(const HwModule& m, const std::vector<BitVector>& inputs) const {
  if (m.is_extern) throw SimulationError("cannot simulate extern module '" + m.name + "'");
  // Values per op; instances store their results in `multi`.
  std::vector<BitVector> val(m.ops.size());
  std::vector<std::vector<BitVector>> multi(m.ops.size());
  std::map<std::string, std::size_t> input_index;
  {
    std::size_t k = 0;
    for (const auto& p : m.ports)
      if (p.dir == PortDir::Input) input_index[p.name] = k++;
  }
  auto get = [&](const ValueRef& v) -> const BitVector& {
    return m.ops[v.op].kind == OpKind::Instance ? multi[v.op].at(v.result) : val[v.op];
  };

  for (OpId i = 0; i < m.ops.size(); ++i) {
    const auto& op = m.ops[i];
    for (const auto& v : op.operands)
      if (v.op >= i) throw SimulationError("module '" + m.name + "' is not topologically ordered");
    switch (op.kind) {
      case OpKind::InputRef: val[i] = inputs.at(input_index.at(op.name)); break;
      case OpKind::Constant: val[i] = op.value; break;
      case OpKind::Extract: val[i] = get(op.operands[0]).slice(op.low, op.width); break;
      case OpKind::Concat: {
        BitVector acc(0);
        for (const auto& v : op.operands) acc = BitVector::concat(acc, get(v));
        val[i] = std::move(acc);
        break;
      }
      case OpKind::Reverse: val[i] = get(op.operands[0]).reversed(); break;
      case OpKind::Replicate: val[i] = get(op.operands[0]).replicated(op.count); break;
      case OpKind::And: val[i] = get(op.operands[0]) & get(op.operands[1]); break;
      case OpKind::Or: val[i] = get(op.operands[0]) | get(op.operands[1]); break;
      case OpKind::Xor: val[i] = get(op.operands[0]) ^ get(op.operands[1]); break;
      case OpKind::Not: val[i] = ~get(op.operands[0]); break;
      case OpKind::Add: val[i] = get(op.operands[0]) + get(op.operands[1]); break;
      case OpKind::Sub: val[i] = get(op.operands[0]) - get(op.operands[1]); break;
      case OpKind::Mux: val[i] = get(op.operands[0]).get(0) ? get(op.operands[1]) : get(op.operands[2]); break;
      case OpKind::Instance: {
        const HwModule* callee = design_.find(op.callee);
        if (callee == nullptr) throw SimulationError("instance '" + op.name + "' of unknown module '" + op.callee + "'");
        std::vector<BitVector> args;
        for (const auto& v : op.operands) args.push_back(get(v));
        multi[i] = evaluate(*callee, args);
        break;
      }
    }
  }
  std::vector<BitVector> out;
  for (const auto& b : m.outputs) out.push_back(get(b.value));
  return out;
}

PortValues simulate_value(const HwModule& module, const PortValues& inputs) {
  HwDesign d;
  d.modules.push_back(module);
  d.top = module.name;
  return Simulator(d).run(d.modules.front(), inputs);
}

}  // namespace busweaver
