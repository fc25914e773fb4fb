#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "busweaver/emitter.hpp"
#include "busweaver/frontend.hpp"
#include "busweaver/report.hpp"

namespace fs = std::filesystem;
using namespace busweaver;

namespace {

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"busweaver: vectorize replicated bit-level logic in combinational Verilog"};
  std::vector<std::string> paths;
  std::string out_dir;
  std::string report_path;
  std::string csv_path;
  std::string sweep_text;
  std::string scaling_text;
  bool dump_ir = false;
  bool quiet = false;
  BatchOptions opt;
  std::uint64_t threshold = opt.policy.threshold;
  bool no_inline = false;

  app.add_option("paths", paths, "Verilog files or directories");
  app.add_option("--out", out_dir, "Directory for <name>.vec.v files (default: next to each input)");
  app.add_option("--inline-threshold", threshold, "Inline callees whose recursive size is below N")
      ->default_val(150)
      ->check(CLI::PositiveNumber);
  app.add_flag("--no-inline", no_inline, "Disable selective inlining");
  app.add_flag("--check", opt.check, "Check every rewritten design with the simulation oracle");
  app.add_option("--max-exhaustive-bits", opt.oracle.max_exhaustive_bits,
                 "Enumerate all inputs up to this total input width")
      ->default_val(16);
  app.add_option("--samples", opt.oracle.samples, "Random vectors above the exhaustive limit")->default_val(10000);
  app.add_option("--seed", opt.oracle.seed, "Oracle seed")->default_val(1);
  app.add_option("--report", report_path, "Write the JSON report to FILE");
  app.add_option("--sweep", sweep_text, "Comma-separated inlining thresholds to sweep, e.g. 30,75,150,200,300,400");
  app.add_option("--scaling-probe", scaling_text, "Comma-separated bus widths for the scaling probe");
  app.add_option("--csv", csv_path, "Write sweep or scaling data as CSV to FILE");
  app.add_option("--jobs", opt.jobs, "Files processed in parallel")->default_val(1)->check(CLI::PositiveNumber);
  app.add_flag("--dump-ir", dump_ir, "Print the IR of each vectorized design instead of writing files");
  app.add_flag("-q,--quiet", quiet, "Print only errors");
  CLI11_PARSE(app, argc, argv);

  opt.policy.threshold = threshold;
  opt.policy.enabled = !no_inline;

  if (paths.empty() && scaling_text.empty()) {
    std::cerr << "busweaver: no input paths (see --help)\n";
    return 2;
  }

  try {
    if (!out_dir.empty()) fs::create_directories(out_dir);

    std::vector<SourceFile> files;
    for (const auto& p : collect_inputs(paths)) files.push_back(read_source_file(p));
    const BatchResult batch = run_batch(files, opt);

    bool ok = batch.ok(opt.check);
    for (const auto& d : batch.designs) {
      for (const auto& msg : d.diagnostics)
        if (!quiet || d.status != DesignStatus::Ok) std::cerr << msg << "\n";
      if (d.status == DesignStatus::Error) std::cerr << d.path << ": error: " << d.error << "\n";
      if (d.status != DesignStatus::Ok) continue;
      for (const auto& v : d.verdicts)
        if (v.verdict.counterexample) {
          std::cerr << d.path << ": error: module '" << v.module << "' differs on output '"
                    << v.verdict.counterexample->port << "' for inputs";
          for (const auto& [k, bits] : v.verdict.counterexample->inputs) std::cerr << " " << k << "=" << bits.to_binary();
          std::cerr << "\n";
        }
      if (dump_ir) {
        auto parsed = parse_verilog(d.output, d.path);
        if (parsed.ok()) std::cout << emit_ir_dump(*parsed.design);
        continue;
      }
      const std::string target = output_path_for(d.path, out_dir);
      if (!write_file(target, d.output)) {
        std::cerr << target << ": error: cannot write output\n";
        ok = false;
      }
    }

    std::optional<SweepResult> sweep;
    if (!sweep_text.empty()) sweep = threshold_sweep(files, parse_list(sweep_text));
    std::optional<ScalingResult> scaling;
    if (!scaling_text.empty()) {
      std::vector<Width> widths;
      for (auto w : parse_list(scaling_text)) widths.push_back(static_cast<Width>(w));
      scaling = scaling_probe(widths);
    }

    if (!quiet) {
      if (!paths.empty()) std::cout << summary_table(batch);
      if (sweep) std::cout << sweep_csv(*sweep);
      if (scaling) {
        std::cout << scaling_csv(*scaling);
        if (scaling->slope)
          std::cout << "log-log slope " << *scaling->slope << ", R^2 " << *scaling->r_squared << "\n";
        else
          std::cout << scaling->note << "\n";
      }
    }
    if (!csv_path.empty()) {
      std::string csv;
      if (sweep) csv += sweep_csv(*sweep);
      if (scaling) csv += scaling_csv(*scaling);
      if (!write_file(csv_path, csv)) throw std::runtime_error("cannot write '" + csv_path + "'");
    }
    if (!report_path.empty()) {
      if (!write_file(report_path, report_json(batch, opt, sweep ? &*sweep : nullptr, scaling ? &*scaling : nullptr)))
        throw std::runtime_error("cannot write '" + report_path + "'");
    }
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "busweaver: error: " << e.what() << "\n";
    return 2;
  }
}
