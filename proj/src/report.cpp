#include "busweaver/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "busweaver/emitter.hpp"
#include "json.hpp"

namespace busweaver {

std::string_view design_status_name(DesignStatus s) {
  switch (s) {
    case DesignStatus::Ok: return "ok";
    case DesignStatus::ParseError: return "parse-error";
    case DesignStatus::Error: return "error";
  }
  return "?";
}

bool DesignReport::equivalent() const {
  for (const auto& v : verdicts)
    if (!v.verdict.equivalent()) return false;
  return true;
}

bool DesignReport::ok(bool require_check) const {
  if (status != DesignStatus::Ok) return false;
  if (require_check && (!checked || !equivalent())) return false;
  return true;
}

double reduction_percent(std::uint64_t before, std::uint64_t after) {
  if (before == 0) return 0.0;
  return 100.0 * (static_cast<double>(before) - static_cast<double>(after)) / static_cast<double>(before);
}

BatchSummary summarize(const std::vector<DesignReport>& designs) {
  BatchSummary s;
  s.designs = designs.size();
  std::vector<double> reductions;
  for (const auto& d : designs) {
    if (d.status != DesignStatus::Ok) {
      ++s.failed;
      continue;
    }
    ++s.processed;
    if (d.instructions_after < d.instructions_before)
      ++s.reduced;
    else if (d.instructions_after > d.instructions_before)
      ++s.increased;
    else
      ++s.unchanged;
    if (d.instructions_before > 0) reductions.push_back(d.reduction_percent);
    s.rewrites += d.tallies.total();
    s.designs_with_opportunity += d.tallies.total() > 0;
    s.tallies.bit_level += d.tallies.bit_level;
    s.tallies.structural += d.tallies.structural;
    s.tallies.mixed += d.tallies.mixed;
    s.tallies.inlining_assisted += d.tallies.inlining_assisted;
    std::uint64_t inlined = 0;
    for (const auto& e : d.inline_log) inlined += e.decision == InlineDecision::Inlined;
    s.inlined_sites += inlined;
    s.designs_with_inlining += inlined > 0;
    if (d.checked && !d.equivalent()) ++s.check_failures;
  }
  if (!reductions.empty()) {
    double sum = 0.0;
    for (double r : reductions) sum += r;
    s.mean_reduction = sum / static_cast<double>(reductions.size());
    std::sort(reductions.begin(), reductions.end());
    const std::size_t n = reductions.size();
    s.median_reduction = n % 2 ? reductions[n / 2] : (reductions[n / 2 - 1] + reductions[n / 2]) / 2.0;
  }
  if (s.processed > 0) s.opportunity_rate = static_cast<double>(s.designs_with_opportunity) / static_cast<double>(s.processed);
  return s;
}

bool BatchResult::ok(bool require_check) const {
  for (const auto& d : designs)
    if (!d.ok(require_check)) return false;
  return true;
}

std::vector<std::string> collect_inputs(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  std::set<std::string> out;
  auto accept = [](const fs::path& p) {
    const std::string name = p.filename().string();
    return p.extension() == ".v" && !(name.size() >= 6 && name.compare(name.size() - 6, 6, ".vec.v") == 0);
  };
  for (const auto& p : paths) {
    const fs::path path(p);
    if (fs::is_directory(path)) {
      for (const auto& e : fs::recursive_directory_iterator(path))
        if (e.is_regular_file() && accept(e.path())) out.insert(e.path().string());
    } else if (fs::exists(path)) {
      out.insert(path.string());
    } else {
      throw std::runtime_error("no such file or directory: '" + p + "'");
    }
  }
  return {out.begin(), out.end()};
}

DesignReport process_design(const SourceFile& file, const BatchOptions& options) {
  DesignReport r;
  r.path = file.path;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ParseResult parsed = parse_verilog(file.text, file.path);
    for (const auto& d : parsed.diagnostics) r.diagnostics.push_back(d.format());
    if (!parsed.ok()) {
      r.status = DesignStatus::ParseError;
      r.error = parsed.diagnostics.empty() ? "parse failed" : parsed.diagnostics.front().format();
      return r;
    }
    const HwDesign& design = *parsed.design;
    r.top = design.top;
    PipelineResult p = run_pipeline(design, options.policy);
    r.instructions_before = p.instructions_before;
    r.instructions_after_inline = p.instructions_after_inline;
    r.instructions_after = p.instructions_after;
    r.reduction_percent = reduction_percent(p.instructions_before, p.instructions_after);
    r.tallies = p.tallies;
    r.sinks = std::move(p.sinks);
    r.inline_log = std::move(p.inline_log);
    if (options.keep_output) r.output = emit_design(p.design);
    if (options.check) {
      OracleOptions oracle = options.oracle;
      // Files already run in parallel; keep each check on one thread then.
      if (options.jobs > 1) oracle.threads = 1;
      r.verdicts = check_design_equivalence(design, p.design, oracle);
      r.checked = true;
    }
  } catch (const std::exception& e) {
    r.status = DesignStatus::Error;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

BatchResult run_batch(const std::vector<SourceFile>& files, const BatchOptions& options) {
  BatchResult result;
  result.designs.resize(files.size());
  const std::int64_t n = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.jobs))
  for (std::int64_t k = 0; k < n; ++k) result.designs[static_cast<std::size_t>(k)] = process_design(files[static_cast<std::size_t>(k)], options);
  std::stable_sort(result.designs.begin(), result.designs.end(),
                   [](const DesignReport& a, const DesignReport& b) { return a.path < b.path; });
  result.summary = summarize(result.designs);
  return result;
}

BatchResult run_batch(const std::vector<std::string>& paths, const BatchOptions& options) {
  std::vector<SourceFile> files;
  std::vector<DesignReport> unreadable;
  for (const auto& p : collect_inputs(paths)) {
    try {
      files.push_back(read_source_file(p));
    } catch (const std::exception& e) {
      DesignReport r;
      r.path = p;
      r.status = DesignStatus::Error;
      r.error = e.what();
      unreadable.push_back(std::move(r));
    }
  }
  BatchResult result = run_batch(files, options);
  if (!unreadable.empty()) {
    for (auto& r : unreadable) result.designs.push_back(std::move(r));
    std::stable_sort(result.designs.begin(), result.designs.end(),
                     [](const DesignReport& a, const DesignReport& b) { return a.path < b.path; });
    result.summary = summarize(result.designs);
  }
  return result;
}

SweepResult threshold_sweep(const std::vector<SourceFile>& corpus, const std::vector<std::uint64_t>& thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("threshold list is empty");
  for (std::size_t k = 1; k < thresholds.size(); ++k)
    if (thresholds[k] <= thresholds[k - 1]) throw std::invalid_argument("thresholds must be strictly increasing");
  for (auto t : thresholds)
    if (t < 1) throw std::invalid_argument("thresholds must be at least 1");

  std::vector<HwDesign> designs;
  for (const auto& f : corpus) {
    auto parsed = parse_verilog(f.text, f.path);
    if (parsed.ok()) designs.push_back(std::move(*parsed.design));
  }
  SweepResult s;
  s.thresholds = thresholds;
  for (auto t : thresholds) {
    InlinePolicy policy;
    policy.threshold = t;
    std::uint64_t opp = 0, sites = 0, inl = 0, after = 0;
    for (const auto& d : designs) {
      const PipelineResult p = run_pipeline(d, policy);
      opp += p.rewrites();
      for (const auto& e : p.inline_log) sites += e.decision == InlineDecision::Inlined;
      inl += p.instructions_after_inline;
      after += p.instructions_after;
    }
    s.opportunities.push_back(opp);
    s.inlined_sites.push_back(sites);
    s.sizes_after_inline.push_back(inl);
    s.sizes_after.push_back(after);
  }
  return s;
}

std::vector<SourceFile> nested_instance_corpus() {
  std::vector<SourceFile> corpus;
  for (unsigned size : {10u, 50u, 100u, 170u, 250u, 350u}) {
    const std::string leaf = "leaf_" + std::to_string(size);
    const std::string mid = "mid_" + std::to_string(size);
    std::ostringstream v;
    // leaf: one routing op for y plus a (size - 2)-long inverter chain on z.
    const unsigned chain = size - 2;
    v << "module " << leaf << "(\n  input a,\n  input p,\n  output y,\n  output z\n);\n";
    v << "  assign y = {a};\n";
    for (unsigned k = 1; k <= chain; ++k) {
      v << "  wire t" << k << " = ~" << (k == 1 ? std::string("p") : "t" + std::to_string(k - 1)) << ";\n";
    }
    v << "  assign z = t" << chain << ";\nendmodule\n\n";
    // mid: one op of its own around the leaf, so its recursive size is `size`.
    v << "module " << mid << "(\n  input a,\n  input p,\n  output y,\n  output z\n);\n";
    v << "  wire ly;\n";
    v << "  " << leaf << " u(.a(a), .p(p), .y(ly), .z(z));\n";
    v << "  assign y = {ly};\nendmodule\n\n";
    v << "module top_" << size << "(input [3:0] in, output [3:0] out);\n";
    for (unsigned b = 0; b < 4; ++b)
      v << "  " << mid << " m" << b << "(.a(in[" << b << "]), .p(in[" << b << "]), .y(out[" << b << "]), .z());\n";
    v << "endmodule\n";
    corpus.push_back(SourceFile{"nested_" + std::to_string(size) + ".v", v.str()});
  }
  return corpus;
}

HwDesign make_scaling_design(Width w, std::uint64_t seed) {
  HwModule m;
  m.name = "scale_" + std::to_string(w);
  const ValueRef in = m.add_input("in", w);
  const ValueRef a = m.add_input("a", w);
  const ValueRef b = m.add_input("b", w);
  const ValueRef c = m.add_input("c", w);
  // Shuffled 4-bit blocks, so the permutation always has runs to group.
  std::vector<Width> blocks((w + 3) / 4);
  for (Width k = 0; k < blocks.size(); ++k) blocks[k] = k;
  std::mt19937_64 rng(seed);
  std::shuffle(blocks.begin(), blocks.end(), rng);
  std::vector<Width> perm;
  for (Width blk : blocks)
    for (Width k = blk * 4; k < std::min(w, blk * 4 + 4); ++k) perm.push_back(k);

  std::vector<ValueRef> bits(w);
  for (Width i = 0; i < w; ++i) bits[w - 1 - i] = m.extract(in, perm[i], 1);
  m.add_output("p", m.concat(bits));
  for (Width i = 0; i < w; ++i) {
    const ValueRef x = m.binary(OpKind::And, m.extract(a, i, 1), m.extract(b, i, 1));
    bits[w - 1 - i] = m.binary(OpKind::Or, x, m.unary(OpKind::Not, m.extract(c, i, 1)));
  }
  m.add_output("q", m.concat(bits));
  compact_module(m);
  HwDesign d;
  d.modules.push_back(std::move(m));
  d.top = d.modules.front().name;
  return d;
}

std::optional<LinearFit> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0) return std::nullopt;
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

ScalingResult scaling_probe(const std::vector<Width>& widths, unsigned designs_per_width, double min_seconds) {
  ScalingResult result;
  for (Width w : widths) {
    if (w < 2) throw std::invalid_argument("scaling widths must be at least 2");
    for (unsigned k = 0; k < std::max(1u, designs_per_width); ++k) {
      const HwDesign d = make_scaling_design(w, 1 + k);
      ScalingSample s;
      s.width = w;
      s.ops = count_instructions(d);
      // Repeat until the sample is long enough to time, keep the fastest run.
      double best = 0.0;
      double total = 0.0;
      unsigned reps = 0;
      while (reps < 3 || total < min_seconds) {
        const auto t0 = std::chrono::steady_clock::now();
        const PipelineResult p = run_pipeline(d);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (p.rewrites() != 2) throw std::logic_error("scaling design was not fully vectorized");
        best = reps == 0 ? dt : std::min(best, dt);
        total += dt;
        ++reps;
      }
      s.seconds = best;
      result.samples.push_back(s);
    }
  }
  std::set<std::uint64_t> sizes;
  for (const auto& s : result.samples) sizes.insert(s.ops);
  if (sizes.size() < 2) {
    result.degenerate = result.samples.size() >= 2;
    result.note = result.degenerate ? "all samples have the same size; no fit" : "single size; raw timings only";
    return result;
  }
  std::vector<double> x, y;
  for (const auto& s : result.samples) {
    x.push_back(std::log(static_cast<double>(s.ops)));
    y.push_back(std::log(std::max(s.seconds, 1e-9)));
  }
  if (auto f = fit_line(x, y)) {
    result.slope = f->slope;
    result.r_squared = f->r_squared;
  }
  return result;
}

namespace {

using nlohmann::json;

json tallies_json(const PatternTallies& t) {
  return json{{"bit_level", t.bit_level},
              {"structural", t.structural},
              {"mixed", t.mixed},
              {"inlining_assisted", t.inlining_assisted},
              {"total", t.total()}};
}

json verdict_json(const EquivalenceVerdict& v) {
  json j{{"status", std::string(verdict_status_name(v.status))}, {"vectors", v.vectors_tested}, {"seed", v.seed}};
  if (v.counterexample) {
    json in = json::object();
    for (const auto& [k, bits] : v.counterexample->inputs) in[k] = bits.to_binary();
    json exp = json::object();
    for (const auto& [k, bits] : v.counterexample->expected) exp[k] = bits.to_binary();
    json act = json::object();
    for (const auto& [k, bits] : v.counterexample->actual) act[k] = bits.to_binary();
    j["counterexample"] = json{{"port", v.counterexample->port}, {"inputs", in}, {"expected", exp}, {"actual", act}};
  }
  return j;
}

json design_json(const DesignReport& d) {
  json j;
  j["path"] = d.path;
  j["status"] = std::string(design_status_name(d.status));
  j["error"] = d.error;
  j["diagnostics"] = d.diagnostics;
  j["top"] = d.top;
  j["instructions"] = json{{"before", d.instructions_before},
                           {"after_inline", d.instructions_after_inline},
                           {"after", d.instructions_after}};
  j["reduction_percent"] = d.reduction_percent;
  j["tallies"] = tallies_json(d.tallies);
  j["seconds"] = d.seconds;
  json sinks = json::array();
  for (const auto& s : d.sinks) {
    json chunks = json::array();
    for (const auto& c : s.chunks)
      chunks.push_back(json{{"high", c.high}, {"low", c.low}, {"method", std::string(chunk_method_name(c.method))}});
    sinks.push_back(json{{"module", s.module},
                         {"name", s.sink},
                         {"kind", s.is_output ? "output" : "wire"},
                         {"width", s.width},
                         {"rewritten", s.rewritten},
                         {"full_width", s.full_width},
                         {"category", std::string(pattern_category_name(s.category))},
                         {"inlining_assisted", s.inlining_assisted},
                         {"chunks", chunks},
                         {"counters",
                          json{{"trace_visits", s.trace_visits},
                               {"depth", s.depth},
                               {"cone_visits", s.cone_visits},
                               {"graph_size", s.graph_size},
                               {"candidates", s.candidates}}}});
  }
  j["sinks"] = sinks;
  json log = json::array();
  for (const auto& e : d.inline_log)
    log.push_back(json{{"module", e.module},
                       {"site", e.site},
                       {"callee", e.callee},
                       {"decision", std::string(inline_decision_name(e.decision))},
                       {"reason", e.reason},
                       {"callee_size", e.callee_size}});
  j["inline_log"] = log;
  json oracle = json{{"checked", d.checked}, {"equivalent", d.checked ? json(d.equivalent()) : json(nullptr)}};
  json mods = json::array();
  for (const auto& v : d.verdicts) {
    json m = verdict_json(v.verdict);
    m["module"] = v.module;
    mods.push_back(m);
  }
  oracle["modules"] = mods;
  j["oracle"] = oracle;
  return j;
}

}  // namespace

std::string report_json(const BatchResult& batch, const BatchOptions& options, const SweepResult* sweep,
                        const ScalingResult* scaling) {
  json j;
  j["schema"] = "busweaver-report";
  j["version"] = 1;
  j["options"] = json{{"inline_threshold", options.policy.threshold},
                      {"inline", options.policy.enabled},
                      {"check", options.check},
                      {"max_exhaustive_bits", options.oracle.max_exhaustive_bits},
                      {"samples", options.oracle.samples},
                      {"seed", options.oracle.seed}};
  json designs = json::array();
  for (const auto& d : batch.designs) designs.push_back(design_json(d));
  j["designs"] = designs;
  const BatchSummary& s = batch.summary;
  j["summary"] = json{{"designs", s.designs},
                      {"processed", s.processed},
                      {"failed", s.failed},
                      {"reduced", s.reduced},
                      {"increased", s.increased},
                      {"unchanged", s.unchanged},
                      {"mean_reduction_percent", s.mean_reduction},
                      {"median_reduction_percent", s.median_reduction},
                      {"rewrites", s.rewrites},
                      {"designs_with_opportunity", s.designs_with_opportunity},
                      {"opportunity_rate", s.opportunity_rate},
                      {"tallies", tallies_json(s.tallies)},
                      {"inlined_sites", s.inlined_sites},
                      {"designs_with_inlining", s.designs_with_inlining},
                      {"check_failures", s.check_failures}};
  if (sweep != nullptr)
    j["sweep"] = json{{"thresholds", sweep->thresholds},
                      {"opportunities", sweep->opportunities},
                      {"inlined_sites", sweep->inlined_sites},
                      {"sizes_after_inline", sweep->sizes_after_inline},
                      {"sizes_after", sweep->sizes_after}};
  if (scaling != nullptr) {
    json samples = json::array();
    for (const auto& x : scaling->samples)
      samples.push_back(json{{"width", x.width}, {"ops", x.ops}, {"seconds", x.seconds}});
    j["scaling"] = json{{"samples", samples},
                        {"slope", scaling->slope ? json(*scaling->slope) : json(nullptr)},
                        {"r_squared", scaling->r_squared ? json(*scaling->r_squared) : json(nullptr)},
                        {"degenerate", scaling->degenerate},
                        {"note", scaling->note}};
  }
  return j.dump(2) + "\n";
}

std::string summary_table(const BatchResult& batch) {
  std::ostringstream os;
  std::size_t w = 6;
  for (const auto& d : batch.designs) w = std::max(w, d.path.size());
  os << std::left << std::setw(static_cast<int>(w)) << "design" << "  " << std::right << std::setw(7) << "before"
     << std::setw(7) << "after" << std::setw(9) << "reduce%" << std::setw(5) << "bit" << std::setw(6) << "struc"
     << std::setw(6) << "mixed" << std::setw(5) << "inl" << "  oracle\n";
  for (const auto& d : batch.designs) {
    os << std::left << std::setw(static_cast<int>(w)) << d.path << "  " << std::right;
    if (d.status != DesignStatus::Ok) {
      os << design_status_name(d.status) << ": " << d.error << "\n";
      continue;
    }
    os << std::setw(7) << d.instructions_before << std::setw(7) << d.instructions_after << std::setw(9) << std::fixed
       << std::setprecision(1) << d.reduction_percent << std::setw(5) << d.tallies.bit_level << std::setw(6)
       << d.tallies.structural << std::setw(6) << d.tallies.mixed << std::setw(5) << d.tallies.inlining_assisted
       << "  " << (!d.checked ? "-" : d.equivalent() ? "equivalent" : "COUNTEREXAMPLE") << "\n";
  }
  const auto& s = batch.summary;
  os << std::fixed << std::setprecision(1) << "designs " << s.designs << ", processed " << s.processed << ", failed "
     << s.failed << "; reduced " << s.reduced << ", increased " << s.increased << ", unchanged " << s.unchanged
     << "; mean " << s.mean_reduction << "%, median " << s.median_reduction << "%; rewrites " << s.rewrites
     << " in " << s.designs_with_opportunity << " designs\n";
  return os.str();
}

std::string sweep_csv(const SweepResult& s) {
  std::ostringstream os;
  os << "threshold,opportunities,inlined_sites,size_after_inline,size_after\n";
  for (std::size_t k = 0; k < s.thresholds.size(); ++k)
    os << s.thresholds[k] << "," << s.opportunities[k] << "," << s.inlined_sites[k] << "," << s.sizes_after_inline[k]
       << "," << s.sizes_after[k] << "\n";
  return os.str();
}

std::string scaling_csv(const ScalingResult& s) {
  std::ostringstream os;
  os << "width,ops,seconds\n";
  for (const auto& x : s.samples) os << x.width << "," << x.ops << "," << std::setprecision(9) << x.seconds << "\n";
  return os.str();
}

}  // namespace busweaver
