#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "busweaver/oracle.hpp"
#include "busweaver/vectorizer.hpp"

namespace bwtest {

/// Aggregate of one generated-case suite.
struct SuiteResult {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t passed = 0;
  std::vector<std::string> failures;  // first few, with the offending design

  // Oracle verdicts on rewritten designs.
  std::uint64_t rewrites = 0;
  std::uint64_t exhaustive = 0;
  std::uint64_t sampled = 0;
  std::uint64_t counterexamples = 0;
  std::uint64_t exhaustive_eligible = 0;  // rewrites with total input width <= 16
  std::uint64_t eligible_not_exhaustive = 0;

  // Complexity counters, one check per sink and bound.
  std::uint64_t counter_checks = 0;
  std::uint64_t counter_violations = 0;

  double seconds = 0.0;

  bool all_passed() const { return cases > 0 && passed == cases; }
  void fail(const std::string& why);
};

/// Checks per-sink work counters against N*D, N(N-1)/2 and N(V+E).
void check_counters(const busweaver::PipelineResult& r, SuiteResult& out);

/// Records the oracle verdict for one rewritten design. Returns false on a
/// counterexample.
bool record_verdict(const busweaver::HwDesign& orig, const busweaver::HwDesign& xformed, SuiteResult& out,
                    const busweaver::OracleOptions& opt = {});

SuiteResult permutation_suite(std::uint64_t cases = 500, std::uint64_t seed = 1);
SuiteResult structural_suite(std::uint64_t cases = 200, std::uint64_t seed = 2);
SuiteResult adder_suite(std::uint64_t cases = 50, std::uint64_t seed = 3);

/// Random combinational design with a leaf module instantiated by the top.
std::string random_design(std::mt19937_64& rng);

}  // namespace bwtest
