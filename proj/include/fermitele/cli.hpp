#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fermitele/measurement.hpp"
#include "fermitele/report.hpp"

namespace fermitele {

struct SweepConfig {
  std::size_t num_orbitals = 6;
  int electrons = 3;
  int samples = 1000;
  InequalityMeasure measure = InequalityMeasure::kEntropy;
  std::uint64_t seed = 0;
};

struct SweepResult {
  int samples = 0;
  int violations = 0;     // inequality failures that were not flagged inconclusive
  int inconclusive = 0;
  int beta_failures = 0;
  double min_slack = 0.0;
};

/// Sample i uses seed mix_seed(config.seed, i).
SweepResult run_inequality_sweep(const SweepConfig& config);

/// Built-in protocol checks: probabilities sum to 1, correctable branches
/// reach fidelity 1, success probability matches the nominal value.
std::vector<AssertionOutcome> protocol_checks(const ProtocolReport& report);

/// Exit codes: 0 all checks pass, 1 assertion failure, 2 usage or input error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace fermitele
