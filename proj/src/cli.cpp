#include "fermitele/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "fermitele/linalg.hpp"

namespace fermitele {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Complex parse_complex(const std::string& text) {
  auto comma = text.find(',');
  try {
    std::size_t used = 0;
    if (comma == std::string::npos) {
      double re = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return {re, 0.0};
    }
    std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    double re = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument("");
    double im = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument("");
    return {re, im};
  } catch (const std::exception&) {
    throw UsageError("expected RE,IM but got '" + text + "'");
  }
}

std::uint64_t default_seed() {
  const char* env = std::getenv("FERMITELE_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("FERMITELE_SEED is not an unsigned integer: ") + env);
  }
}

struct Output {
  std::string format = "json";
  std::string path;
  bool timing = false;
};

void add_output_flags(CLI::App* cmd, Output& o) {
  cmd->add_option("--report", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.path, "write the report to PATH");
  cmd->add_flag("--timing", o.timing, "record wall-clock time in timing_ms");
}

void write_report(const Json& j, const Output& o, std::ostream& out) {
  std::string text = o.format == "csv" ? dump_csv(j) : dump_json(j);
  if (o.path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + o.path + "'");
  f << text;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SweepResult run_inequality_sweep(const SweepConfig& c) {
  if (c.samples < 0) throw std::invalid_argument("sample count must be non-negative");
  SweepResult r;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.samples; ++i) {
    auto sample = random_inequality_sample(c.num_orbitals, c.electrons, mix_seed(c.seed, static_cast<std::uint64_t>(i)));
    auto res = check_measurement_inequality(sample, c.measure);
    ++r.samples;
    if (res.inconclusive) ++r.inconclusive;
    if (!res.holds && !res.inconclusive) ++r.violations;
    r.min_slack = std::min(r.min_slack, res.slack);
    if (!check_beta_bound(sample).holds) ++r.beta_failures;
  }
  if (!r.samples) r.min_slack = 0.0;
  return r;
}

std::vector<AssertionOutcome> protocol_checks(const ProtocolReport& report) {
  std::vector<AssertionOutcome> out;
  double total = 0.0;
  for (const auto& b : report.branches) total += b.probability;
  out.push_back({0, "probability_sum", "", 1.0, total, 1e-10, std::abs(total - 1.0) <= 1e-10, ""});
  for (const auto& b : report.branches) {
    if (b.correction == "none") continue;
    out.push_back({0, "fidelity", b.label, 1.0, b.fidelity, 1e-9, std::abs(b.fidelity - 1.0) <= 1e-9, b.diagnostic});
  }
  double sp = report.success_probability;
  out.push_back({0, "success_probability", "", report.nominal_success, sp, 1e-10,
                 std::abs(sp - report.nominal_success) <= 1e-10, ""});
  return out;
}

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fermionic Fock-space simulator and teleportation protocol runner", "fermitele"};
  app.require_subcommand(1);

  std::string file;
  std::uint64_t seed = 0;
  bool seed_given = false;
  Output run_out;
  auto* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("FILE", file, "scenario file")->required();
  run->add_option("--seed", seed, "random seed (default: FERMITELE_SEED or 0)");
  add_output_flags(run, run_out);

  std::string protocol;
  std::string a_text = "0.6,0", b_text = "0.8,0", alpha_text = "0.6,0", beta_text = "0.8,0";
  double u = 1.0;
  Output builtin_out;
  auto* builtin = app.add_subcommand("builtin", "run a built-in teleportation protocol");
  builtin->add_option("PROTOCOL", protocol, "h2, nv0 or qdots")->required()->check(CLI::IsMember({"h2", "nv0", "qdots"}));
  builtin->add_option("--a", a_text, "amplitude a as RE,IM (h2, nv0)");
  builtin->add_option("--b", b_text, "amplitude b as RE,IM (h2, nv0)");
  builtin->add_option("--alpha", alpha_text, "amplitude alpha as RE,IM (qdots)");
  builtin->add_option("--beta", beta_text, "amplitude beta as RE,IM (qdots)");
  builtin->add_option("--U", u, "interaction strength (qdots)");
  builtin->add_option("--seed", seed, "seed recorded in the report");
  add_output_flags(builtin, builtin_out);

  SweepConfig sweep_cfg;
  std::string measure = "entropy";
  Output sweep_out;
  auto* sweep = app.add_subcommand("sweep-inequality", "randomized check of the measurement inequality");
  sweep->add_option("--orbitals", sweep_cfg.num_orbitals, "number of spin-orbitals")->required();
  sweep->add_option("--electrons", sweep_cfg.electrons, "electrons in the combined state")->required();
  sweep->add_option("--samples", sweep_cfg.samples, "number of random samples")->required();
  sweep->add_option("--measure", measure, "entropy or geometric")->check(CLI::IsMember({"entropy", "geometric"}));
  sweep->add_option("--seed", seed, "master seed");
  add_output_flags(sweep, sweep_out);

  std::vector<const char*> argv{"fermitele"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    for (auto* cmd : {run, builtin, sweep}) {
      if (cmd->parsed() && cmd->count("--seed")) seed_given = true;
    }
    if (!seed_given) seed = default_seed();
    const auto start = std::chrono::steady_clock::now();

    if (run->parsed()) {
      Scenario sc;
      try {
        sc = load_scenario(file);
      } catch (const ParseError& e) {
        err << file << ": " << e.what() << "\n";
        return 2;
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
      }
      RunReport report = execute_scenario(sc, seed);
      if (run_out.timing) report.timing_ms = elapsed_ms(start);
      write_report(report_json(report), run_out, out);
      return report.passed() ? 0 : 1;
    }

    if (builtin->parsed()) {
      ProtocolReport report;
      try {
        if (protocol == "h2") {
          report = run_h2_protocol(parse_complex(a_text), parse_complex(b_text));
        } else if (protocol == "nv0") {
          report = run_nv_protocol(parse_complex(a_text), parse_complex(b_text));
        } else {
          report = run_qdot_protocol(parse_complex(alpha_text), parse_complex(beta_text), u);
        }
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      auto checks = protocol_checks(report);
      std::optional<double> timing;
      if (builtin_out.timing) timing = elapsed_ms(start);
      Json j = report_json(report, seed, checks, timing);
      write_report(j, builtin_out, out);
      return j["violations"].get<int>() == 0 ? 0 : 1;
    }

    sweep_cfg.seed = seed;
    sweep_cfg.measure = measure == "geometric" ? InequalityMeasure::kGeometric : InequalityMeasure::kEntropy;
    SweepResult r;
    try {
      r = run_inequality_sweep(sweep_cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    Json j;
    j["scenario"] = "sweep-inequality";
    j["seed"] = seed;
    Json stage;
    stage["orbitals"] = sweep_cfg.num_orbitals;
    stage["electrons"] = sweep_cfg.electrons;
    stage["measure"] = measure;
    stage["samples"] = r.samples;
    stage["inconclusive"] = r.inconclusive;
    stage["min_slack"] = r.min_slack;
    j["stages"] = Json::array({stage});
    j["branches"] = Json::array();
    const double tol = sweep_cfg.measure == InequalityMeasure::kGeometric ? kGeometricInequalityTol
                                                                          : kEntropyInequalityTol;
    j["assertions"] = Json::array(
        {{{"kind", "inequality_violations"}, {"expected", 0}, {"actual", r.violations}, {"tol", tol},
          {"pass", r.violations == 0}},
         {{"kind", "beta_bound_failures"}, {"expected", 0}, {"actual", r.beta_failures}, {"tol", 0},
          {"pass", r.beta_failures == 0}}});
    j["success_probability"] = nullptr;
    j["violations"] = r.violations + r.beta_failures;
    j["timing_ms"] = sweep_out.timing ? Json(elapsed_ms(start)) : Json(nullptr);
    write_report(j, sweep_out, out);
    return r.violations + r.beta_failures == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace fermitele
