#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "busweaver/frontend.hpp"
#include "busweaver/inliner.hpp"
#include "busweaver/oracle.hpp"
#include "busweaver/vectorizer.hpp"

namespace busweaver {

struct BatchOptions {
  InlinePolicy policy;
  bool check = false;
  OracleOptions oracle;
  int jobs = 1;
  /// Keep the emitted Verilog in each DesignReport.
  bool keep_output = true;
};

enum class DesignStatus : std::uint8_t { Ok, ParseError, Error };
std::string_view design_status_name(DesignStatus s);

struct DesignReport {
  std::string path;
  DesignStatus status = DesignStatus::Ok;
  std::vector<std::string> diagnostics;
  std::string error;
  std::string top;
  std::uint64_t instructions_before = 0;
  std::uint64_t instructions_after_inline = 0;
  std::uint64_t instructions_after = 0;
  double reduction_percent = 0.0;
  PatternTallies tallies;
  std::vector<SinkReport> sinks;
  std::vector<InlineLogEntry> inline_log;
  double seconds = 0.0;
  std::vector<ModuleVerdict> verdicts;  // filled when checking
  bool checked = false;
  std::string output;  // emitted Verilog

  bool equivalent() const;
  bool ok(bool require_check) const;
};

/// Percent reduction from `before` to `after`; 0 when `before` is 0.
double reduction_percent(std::uint64_t before, std::uint64_t after);

struct BatchSummary {
  std::uint64_t designs = 0;
  std::uint64_t processed = 0;  // parsed and vectorized
  std::uint64_t failed = 0;
  std::uint64_t reduced = 0;
  std::uint64_t increased = 0;
  std::uint64_t unchanged = 0;
  double mean_reduction = 0.0;
  double median_reduction = 0.0;
  std::uint64_t rewrites = 0;
  std::uint64_t designs_with_opportunity = 0;
  double opportunity_rate = 0.0;  // designs_with_opportunity / processed
  PatternTallies tallies;
  std::uint64_t inlined_sites = 0;
  std::uint64_t designs_with_inlining = 0;
  std::uint64_t check_failures = 0;
};

BatchSummary summarize(const std::vector<DesignReport>& designs);

struct BatchResult {
  std::vector<DesignReport> designs;  // sorted by path
  BatchSummary summary;

  bool ok(bool require_check) const;
};

/// Expands directories recursively to their `.v` files (skipping emitted
/// `.vec.v` files). Result is sorted and free of duplicates. Throws
/// std::runtime_error for a path that does not exist.
std::vector<std::string> collect_inputs(const std::vector<std::string>& paths);

DesignReport process_design(const SourceFile& file, const BatchOptions& options);
BatchResult run_batch(const std::vector<std::string>& paths, const BatchOptions& options);
BatchResult run_batch(const std::vector<SourceFile>& files, const BatchOptions& options);

struct SweepResult {
  std::vector<std::uint64_t> thresholds;
  std::vector<std::uint64_t> opportunities;  // rewrites summed over the corpus
  std::vector<std::uint64_t> inlined_sites;
  std::vector<std::uint64_t> sizes_after_inline;
  std::vector<std::uint64_t> sizes_after;
};

/// Throws std::invalid_argument unless thresholds are non-empty and strictly
/// increasing. Files that fail to parse are skipped.
SweepResult threshold_sweep(const std::vector<SourceFile>& corpus, const std::vector<std::uint64_t>& thresholds);

/// Designs whose per-bit callees have recursive sizes 10, 50, 100, 170, 250
/// and 350; each is vectorizable only once its callee is inlined.
std::vector<SourceFile> nested_instance_corpus();

struct ScalingSample {
  Width width = 0;
  std::uint64_t ops = 0;
  double seconds = 0.0;
};

struct ScalingResult {
  std::vector<ScalingSample> samples;
  std::optional<double> slope;
  std::optional<double> r_squared;
  bool degenerate = false;
  std::string note;
};

/// One permutation output (shuffled 4-bit blocks) and one replicated-cone
/// output over `width` bits.
HwDesign make_scaling_design(Width width, std::uint64_t seed = 1);

/// Times run_pipeline on generated designs and fits log(time) against
/// log(ops). A single distinct size is reported without a fit.
ScalingResult scaling_probe(const std::vector<Width>& widths, unsigned designs_per_width = 1,
                            double min_seconds_per_sample = 0.02);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
/// Least squares; nullopt when fewer than two distinct x values.
std::optional<LinearFit> fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string report_json(const BatchResult& batch, const BatchOptions& options, const SweepResult* sweep = nullptr,
                        const ScalingResult* scaling = nullptr);
std::string summary_table(const BatchResult& batch);
std::string sweep_csv(const SweepResult& sweep);
std::string scaling_csv(const ScalingResult& scaling);

}  // namespace busweaver
