#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermitele/dynamics.hpp"
#include "fermitele/fock.hpp"

namespace fermitele {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

enum class StatementKind {
  kFilled,
  kTerm,
  kHole,
  kRotate,
  kUnitary,
  kBasis,
  kEvolve1,
  kEvolveU,
  kMeasureOcc,
  kMeasureTotal,
  kMeasureSpin,
  kMeasureBasis,
  kSelect,
  kAssertParticleEntropy,
  kAssertGeometric,
  kAssertModeEntropy,
  kAssertProb,
  kAssertFidelity,
};

struct Statement {
  StatementKind kind = StatementKind::kFilled;
  int line = 0;
  Complex coeff;                       // term, hole
  std::vector<std::size_t> orbitals;   // term, hole, measure, pairs, mode_entropy side
  std::string axis;                    // rotate, measure spin
  double angle = 0.0;                  // rotate
  Matrix matrix;                       // unitary, basis, evolve1
  std::string id;                      // basis name, evolveU "in", measure basis
  double time = 0.0;                   // evolve1, evolveU
  std::vector<DensityTerm> terms;      // evolveU
  std::size_t index = 0;               // select
  double expected = 0.0;
  double tol = 0.0;
  std::string pattern;                 // assert prob
  Complex a, b;                        // assert fidelity

  bool operator==(const Statement& other) const;
};

struct Scenario {
  std::string name;
  std::vector<std::string> labels;
  std::vector<Statement> statements;

  std::size_t num_orbitals() const { return labels.size(); }
  bool operator==(const Scenario& other) const;
};

/// Throws ParseError for the first problem found.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);
std::string serialize_statement(const Scenario& scenario, const Statement& statement);

// ---------------------------------------------------------------------------

struct AssertionOutcome {
  int line = 0;
  std::string kind;
  std::string branch;
  double expected = 0.0;
  double actual = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string diagnostic;
};

struct StatementResult {
  int line = 0;
  std::string text;
  std::string branch;
  bool ok = true;
  std::string diagnostic;
};

struct BranchNode {
  std::string path;     // "root", "root/1", "root/1/0", ...
  std::string label;
  double probability = 1.0;  // conditional on the parent
  double cumulative = 1.0;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<StatementResult> statements;
  std::vector<BranchNode> branches;
  std::vector<AssertionOutcome> assertions;
  std::optional<double> success_probability;
  int violations = 0;
  std::optional<double> timing_ms;

  bool passed() const { return violations == 0; }
};

RunReport execute_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace fermitele
