#include "busweaver/oracle.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <limits>
#include <random>

namespace busweaver {

std::string_view verdict_status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::EquivalentExhaustive: return "equivalent-exhaustive";
    case VerdictStatus::EquivalentSampled: return "equivalent-sampled";
    case VerdictStatus::Counterexample: return "counterexample";
  }
  return "?";
}

std::string_view mutation_kind_name(MutationKind k) {
  switch (k) {
    case MutationKind::SwapExtractIndices: return "swap-extract-indices";
    case MutationKind::FlipOperator: return "flip-operator";
    case MutationKind::SwapConcatOperands: return "swap-concat-operands";
  }
  return "?";
}

std::optional<double> MutationAudit::rate() const {
  if (applied == 0) return std::nullopt;
  return static_cast<double>(detected) / static_cast<double>(applied);
}

namespace {

using Lanes = std::vector<std::uint64_t>;  // one word per bit, 64 patterns per word

constexpr std::uint32_t kMaxExhaustiveBits = 40;

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Bit-sliced evaluation of a module over 64 patterns at once.
class SlicedEvaluator {
public:
  explicit SlicedEvaluator(const HwDesign* design) : design_(design) {}

  std::vector<Lanes> run(const HwModule& m, const std::vector<Lanes>& inputs) const {
    if (m.is_extern) throw SimulationError("cannot simulate extern module '" + m.name + "'");
    std::vector<Lanes> val(m.ops.size());
    std::vector<std::vector<Lanes>> multi(m.ops.size());
    std::vector<std::size_t> input_slot;
    {
      std::vector<std::string> names;
      for (const auto& p : m.ports)
        if (p.dir == PortDir::Input) names.push_back(p.name);
      input_slot.resize(m.ops.size(), 0);
      for (OpId i = 0; i < m.ops.size(); ++i)
        if (m.ops[i].kind == OpKind::InputRef)
          input_slot[i] = static_cast<std::size_t>(std::find(names.begin(), names.end(), m.ops[i].name) - names.begin());
    }
    auto get = [&](const ValueRef& v) -> const Lanes& {
      return m.ops[v.op].kind == OpKind::Instance ? multi[v.op][v.result] : val[v.op];
    };
    for (OpId i = 0; i < m.ops.size(); ++i) {
      const Operation& op = m.ops[i];
      Lanes& out = val[i];
      switch (op.kind) {
        case OpKind::InputRef: out = inputs.at(input_slot[i]); break;
        case OpKind::Constant:
          out.resize(op.width);
          for (Width b = 0; b < op.width; ++b) out[b] = op.value.get(b) ? ~0ULL : 0ULL;
          break;
        case OpKind::Extract: {
          const Lanes& a = get(op.operands[0]);
          out.assign(a.begin() + op.low, a.begin() + op.low + op.width);
          break;
        }
        case OpKind::Concat:
          out.reserve(op.width);
          for (auto it = op.operands.rbegin(); it != op.operands.rend(); ++it) {
            const Lanes& a = get(*it);
            out.insert(out.end(), a.begin(), a.end());
          }
          break;
        case OpKind::Reverse: {
          const Lanes& a = get(op.operands[0]);
          out.assign(a.rbegin(), a.rend());
          break;
        }
        case OpKind::Replicate: {
          const Lanes& a = get(op.operands[0]);
          out.reserve(op.width);
          for (std::uint32_t k = 0; k < op.count; ++k) out.insert(out.end(), a.begin(), a.end());
          break;
        }
        case OpKind::And:
        case OpKind::Or:
        case OpKind::Xor: {
          const Lanes& a = get(op.operands[0]);
          const Lanes& b = get(op.operands[1]);
          out.resize(op.width);
          for (Width k = 0; k < op.width; ++k)
            out[k] = op.kind == OpKind::And ? (a[k] & b[k]) : op.kind == OpKind::Or ? (a[k] | b[k]) : (a[k] ^ b[k]);
          break;
        }
        case OpKind::Not: {
          const Lanes& a = get(op.operands[0]);
          out.resize(op.width);
          for (Width k = 0; k < op.width; ++k) out[k] = ~a[k];
          break;
        }
        case OpKind::Add:
        case OpKind::Sub: {
          const Lanes& a = get(op.operands[0]);
          const Lanes& b = get(op.operands[1]);
          const bool sub = op.kind == OpKind::Sub;
          std::uint64_t carry = sub ? ~0ULL : 0ULL;
          out.resize(op.width);
          for (Width k = 0; k < op.width; ++k) {
            const std::uint64_t y = sub ? ~b[k] : b[k];
            const std::uint64_t p = a[k] ^ y;
            out[k] = p ^ carry;
            carry = (a[k] & y) | (carry & p);
          }
          break;
        }
        case OpKind::Mux: {
          const std::uint64_t c = get(op.operands[0])[0];
          const Lanes& t = get(op.operands[1]);
          const Lanes& f = get(op.operands[2]);
          out.resize(op.width);
          for (Width k = 0; k < op.width; ++k) out[k] = (c & t[k]) | (~c & f[k]);
          break;
        }
        case OpKind::Instance: {
          const HwModule* callee = design_ ? design_->find(op.callee) : nullptr;
          if (callee == nullptr)
            throw SimulationError("instance '" + op.name + "' of unknown module '" + op.callee + "'");
          std::vector<Lanes> args;
          for (const auto& v : op.operands) args.push_back(get(v));
          multi[i] = run(*callee, args);
          break;
        }
      }
    }
    std::vector<Lanes> outs;
    for (const auto& b : m.outputs) outs.push_back(get(b.value));
    return outs;
  }

private:
  const HwDesign* design_;
};

// The deterministic vector stream shared by the kernel and the reference.
class VectorStream {
public:
  VectorStream(const HwModule& m, const OracleOptions& opt) : opt_(opt) {
    for (const auto& p : m.input_ports()) {
      ports_.push_back(p);
      total_bits_ += p.width;
    }
    exhaustive_ = total_bits_ <= std::min<std::uint32_t>(opt.max_exhaustive_bits, kMaxExhaustiveBits);
    if (exhaustive_)
      count_ = std::uint64_t{1} << total_bits_;
    else
      count_ = 2 + total_bits_ + opt.samples;
  }

  bool exhaustive() const { return exhaustive_; }
  std::uint64_t count() const { return count_; }
  std::uint64_t batches() const { return (count_ + 63) / 64; }
  const std::vector<Port>& ports() const { return ports_; }

  std::uint64_t valid_mask(std::uint64_t batch) const {
    const std::uint64_t left = count_ - batch * 64;
    return left >= 64 ? ~0ULL : ((std::uint64_t{1} << left) - 1);
  }

  // Input words for one batch, one Lanes per input port.
  std::vector<Lanes> batch(std::uint64_t b) const {
    std::vector<Lanes> in;
    in.reserve(ports_.size());
    std::uint64_t state = opt_.seed ^ (b * 0xd1b54a32d192ed03ULL);
    const std::uint64_t first = b * 64;
    const std::uint64_t specials = 2 + total_bits_;
    Width global = 0;
    for (const auto& p : ports_) {
      Lanes words(p.width);
      for (Width k = 0; k < p.width; ++k, ++global) {
        std::uint64_t w = 0;
        if (exhaustive_) {
          if (global < 6) {
            static constexpr std::uint64_t kPattern[6] = {0xaaaaaaaaaaaaaaaaULL, 0xccccccccccccccccULL,
                                                          0xf0f0f0f0f0f0f0f0ULL, 0xff00ff00ff00ff00ULL,
                                                          0xffff0000ffff0000ULL, 0xffffffff00000000ULL};
            w = kPattern[global];
          } else {
            w = ((first >> global) & 1) ? ~0ULL : 0ULL;
          }
        } else {
          w = splitmix(state);
          for (std::uint64_t lane = 0; lane < 64 && first + lane < specials; ++lane) {
            const std::uint64_t v = first + lane;
            const bool bit = v == 1 || (v >= 2 && v - 2 == global);
            w = bit ? (w | (std::uint64_t{1} << lane)) : (w & ~(std::uint64_t{1} << lane));
          }
        }
        words[k] = w;
      }
      in.push_back(std::move(words));
    }
    return in;
  }

  PortValues lane(const std::vector<Lanes>& words, unsigned l) const {
    PortValues pv;
    for (std::size_t k = 0; k < ports_.size(); ++k) {
      BitVector v(ports_[k].width);
      for (Width b = 0; b < ports_[k].width; ++b) v.set(b, (words[k][b] >> l) & 1);
      pv.emplace(ports_[k].name, std::move(v));
    }
    return pv;
  }

private:
  const OracleOptions& opt_;
  std::vector<Port> ports_;
  Width total_bits_ = 0;
  bool exhaustive_ = true;
  std::uint64_t count_ = 0;
};

void check_ports(const HwModule& a, const HwModule& b) {
  if (a.ports != b.ports)
    throw PortSignatureMismatch("port signatures of '" + a.name + "' and '" + b.name + "' differ");
}

// Returns the first differing lane of the batch, or -1.
int first_difference(const std::vector<Lanes>& x, const std::vector<Lanes>& y, std::uint64_t mask) {
  std::uint64_t diff = 0;
  for (std::size_t p = 0; p < x.size(); ++p)
    for (std::size_t b = 0; b < x[p].size(); ++b) diff |= (x[p][b] ^ y[p][b]);
  diff &= mask;
  if (diff == 0) return -1;
  return __builtin_ctzll(diff);
}

EquivalenceVerdict make_counterexample(const HwDesign& od, const HwModule& om, const HwDesign& xd,
                                       const HwModule& xm, PortValues inputs, EquivalenceVerdict v) {
  Counterexample cx;
  cx.inputs = std::move(inputs);
  cx.expected = Simulator(od).run(om, cx.inputs);
  cx.actual = Simulator(xd).run(xm, cx.inputs);
  for (const auto& p : om.output_ports())
    if (cx.expected.at(p.name) != cx.actual.at(p.name)) {
      cx.port = p.name;
      break;
    }
  v.status = VerdictStatus::Counterexample;
  v.counterexample = std::move(cx);
  return v;
}

}  // namespace

EquivalenceVerdict check_equivalence(const HwDesign& od, const HwModule& om, const HwDesign& xd, const HwModule& xm,
                                     const OracleOptions& opt) {
  check_ports(om, xm);
  const VectorStream stream(om, opt);
  EquivalenceVerdict verdict;
  verdict.seed = opt.seed;
  verdict.vectors_tested = stream.count();
  verdict.status = stream.exhaustive() ? VerdictStatus::EquivalentExhaustive : VerdictStatus::EquivalentSampled;

  const SlicedEvaluator eo(&od);
  const SlicedEvaluator ex(&xd);
  const std::int64_t batches = static_cast<std::int64_t>(stream.batches());
  std::atomic<std::int64_t> first_bad{std::numeric_limits<std::int64_t>::max()};
  std::atomic<bool> failed{false};
  std::string error;
  const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::int64_t b = 0; b < batches; ++b) {
    if (failed.load(std::memory_order_relaxed) || b > first_bad.load(std::memory_order_relaxed)) continue;
    try {
      const auto in = stream.batch(static_cast<std::uint64_t>(b));
      if (first_difference(eo.run(om, in), ex.run(xm, in), stream.valid_mask(static_cast<std::uint64_t>(b))) >= 0) {
        std::int64_t cur = first_bad.load();
        while (b < cur && !first_bad.compare_exchange_weak(cur, b)) {
        }
      }
    } catch (const std::exception& e) {
#pragma omp critical(busweaver_oracle_error)
      {
        if (!failed.exchange(true)) error = e.what();
      }
    }
  }
  if (failed) throw SimulationError(error);
  if (first_bad.load() == std::numeric_limits<std::int64_t>::max()) return verdict;

  const auto b = static_cast<std::uint64_t>(first_bad.load());
  const auto in = stream.batch(b);
  const int lane = first_difference(eo.run(om, in), ex.run(xm, in), stream.valid_mask(b));
  return make_counterexample(od, om, xd, xm, stream.lane(in, static_cast<unsigned>(lane)), verdict);
}

EquivalenceVerdict check_equivalence_serial(const HwDesign& od, const HwModule& om, const HwDesign& xd,
                                            const HwModule& xm, const OracleOptions& opt) {
  check_ports(om, xm);
  const VectorStream stream(om, opt);
  EquivalenceVerdict verdict;
  verdict.seed = opt.seed;
  verdict.vectors_tested = stream.count();
  verdict.status = stream.exhaustive() ? VerdictStatus::EquivalentExhaustive : VerdictStatus::EquivalentSampled;
  const Simulator so(od);
  const Simulator sx(xd);
  for (std::uint64_t b = 0; b < stream.batches(); ++b) {
    const auto in = stream.batch(b);
    const std::uint64_t mask = stream.valid_mask(b);
    for (unsigned l = 0; l < 64; ++l) {
      if (!((mask >> l) & 1)) break;
      PortValues pv = stream.lane(in, l);
      if (so.run(om, pv) != sx.run(xm, pv)) return make_counterexample(od, om, xd, xm, std::move(pv), verdict);
    }
  }
  return verdict;
}

EquivalenceVerdict check_equivalence(const HwModule& orig, const HwModule& xformed, const OracleOptions& options) {
  HwDesign od;
  HwDesign xd;
  return check_equivalence(od, orig, xd, xformed, options);
}

EquivalenceVerdict check_equivalence(const HwDesign& orig, const HwDesign& xformed, const OracleOptions& options) {
  const HwModule* om = orig.find(orig.top);
  const HwModule* xm = xformed.find(xformed.top);
  if (om == nullptr || xm == nullptr) throw PortSignatureMismatch("top module is missing");
  return check_equivalence(orig, *om, xformed, *xm, options);
}

std::vector<ModuleVerdict> check_design_equivalence(const HwDesign& orig, const HwDesign& xformed,
                                                    const OracleOptions& options) {
  std::vector<ModuleVerdict> out;
  for (const auto& om : orig.modules) {
    if (om.is_extern) continue;
    const HwModule* xm = xformed.find(om.name);
    if (xm == nullptr) continue;
    bool reaches_extern = false;
    for (const auto& op : om.ops)
      if (op.kind == OpKind::Instance) {
        const HwModule* c = orig.find(op.callee);
        reaches_extern |= c == nullptr || c->is_extern;
      }
    if (reaches_extern) continue;
    out.push_back({om.name, check_equivalence(orig, om, xformed, *xm, options)});
  }
  return out;
}

namespace {

struct Site {
  MutationKind kind;
  OpId a;
  OpId b;           // second extract for swaps
  std::size_t i = 0, j = 0;  // concat operand positions
};

std::vector<Site> mutation_sites(const HwModule& m, std::optional<MutationKind> only) {
  std::vector<Site> sites;
  auto want = [&](MutationKind k) { return !only || *only == k; };
  if (want(MutationKind::SwapExtractIndices)) {
    for (OpId x = 0; x < m.ops.size(); ++x) {
      if (m.ops[x].kind != OpKind::Extract) continue;
      for (OpId y = x + 1; y < m.ops.size(); ++y) {
        const auto& ox = m.ops[x];
        const auto& oy = m.ops[y];
        if (oy.kind == OpKind::Extract && oy.width == ox.width && oy.low != ox.low &&
            oy.operands[0].width == ox.operands[0].width)
          sites.push_back({MutationKind::SwapExtractIndices, x, y});
      }
    }
  }
  if (want(MutationKind::FlipOperator))
    for (OpId x = 0; x < m.ops.size(); ++x)
      if (m.ops[x].kind == OpKind::And || m.ops[x].kind == OpKind::Or || m.ops[x].kind == OpKind::Xor)
        sites.push_back({MutationKind::FlipOperator, x, x});
  if (want(MutationKind::SwapConcatOperands))
    for (OpId x = 0; x < m.ops.size(); ++x) {
      const auto& ops = m.ops[x].operands;
      if (m.ops[x].kind != OpKind::Concat) continue;
      for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
          if (!ops[i].same_value(ops[j])) sites.push_back({MutationKind::SwapConcatOperands, x, x, i, j});
    }
  return sites;
}

std::string apply(HwModule& m, const Site& s) {
  switch (s.kind) {
    case MutationKind::SwapExtractIndices:
      std::swap(m.ops[s.a].low, m.ops[s.b].low);
      return "swap lows of %" + std::to_string(s.a) + " and %" + std::to_string(s.b);
    case MutationKind::FlipOperator: {
      auto& k = m.ops[s.a].kind;
      k = k == OpKind::And ? OpKind::Or : k == OpKind::Or ? OpKind::Xor : OpKind::And;
      return "flip %" + std::to_string(s.a) + " to " + std::string(op_kind_name(k));
    }
    case MutationKind::SwapConcatOperands:
      std::swap(m.ops[s.a].operands[s.i], m.ops[s.a].operands[s.j]);
      return "swap operands " + std::to_string(s.i) + "," + std::to_string(s.j) + " of %" + std::to_string(s.a);
  }
  return "";
}

}  // namespace

MutationAudit mutation_audit(const HwDesign& reference, const HwDesign& candidate, std::uint64_t mutations,
                             std::uint64_t seed, const OracleOptions& options, std::optional<MutationKind> only) {
  MutationAudit audit;
  audit.requested = mutations;
  audit.seed = seed;
  const HwModule* top = candidate.find(candidate.top);
  if (top == nullptr || mutations == 0) return audit;
  const auto sites = mutation_sites(*top, only);
  if (sites.empty()) return audit;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
  for (std::uint64_t k = 0; k < mutations; ++k) {
    HwDesign mutant = candidate;
    HwModule& m = *mutant.find(mutant.top);
    const std::string edit = apply(m, sites[pick(rng)]);
    if (!verify(mutant).empty()) continue;
    ++audit.applied;
    const bool caught = !check_equivalence(reference, mutant, options).equivalent();
    audit.detected += caught;
    audit.edits.push_back(edit + (caught ? ": detected" : ": missed"));
  }
  return audit;
}

MutationAudit mutation_audit(const HwDesign& design, std::uint64_t mutations, std::uint64_t seed,
                             const OracleOptions& options, std::optional<MutationKind> only) {
  return mutation_audit(design, design, mutations, seed, options, only);
}

}  // namespace busweaver
