#include <cmath>
#include <map>
#include <set>

#include "fermitele/dynamics.hpp"
#include "fermitele/entanglement.hpp"
#include "fermitele/geometric.hpp"
#include "fermitele/measurement.hpp"
#include "fermitele/scenario.hpp"

namespace fermitele {

namespace {

struct Node {
  std::string path;
  OutcomeLabel label;
  double probability = 1.0;
  double cumulative = 1.0;
  PureState state{1};
  std::vector<std::size_t> children;
};

bool is_init(StatementKind k) {
  return k == StatementKind::kFilled || k == StatementKind::kTerm || k == StatementKind::kHole;
}

bool is_assert(StatementKind k) {
  switch (k) {
    case StatementKind::kAssertParticleEntropy:
    case StatementKind::kAssertGeometric:
    case StatementKind::kAssertModeEntropy:
    case StatementKind::kAssertProb:
    case StatementKind::kAssertFidelity:
      return true;
    default:
      return false;
  }
}

const char* assert_name(StatementKind k) {
  switch (k) {
    case StatementKind::kAssertParticleEntropy:
      return "particle_entropy";
    case StatementKind::kAssertGeometric:
      return "geometric";
    case StatementKind::kAssertModeEntropy:
      return "mode_entropy";
    case StatementKind::kAssertProb:
      return "prob";
    default:
      return "fidelity";
  }
}

class Executor {
 public:
  Executor(const Scenario& sc, std::uint64_t seed) : sc_(sc), m_(sc.num_orbitals()) {
    report_.scenario = sc.name;
    report_.seed = seed;
    geo_.seed = seed;
    namer_ = [this](std::size_t k) { return sc_.labels.at(k); };
  }

  RunReport run() {
    std::size_t i = 0;
    const auto& st = sc_.statements;
    std::optional<std::string> init_error;
    int init_line = 0;
    nodes_.push_back({"root", {}, 1.0, 1.0, PureState(m_), {}});
    {
      std::map<std::uint64_t, Complex> acc;
      std::optional<int> electrons;
      for (; i < st.size() && is_init(st[i].kind); ++i) {
        const auto& s = st[i];
        StatementResult r{s.line, serialize_statement(sc_, s), "root", true, ""};
        if (s.kind == StatementKind::kFilled) {
          filled_ = true;
        } else {
          try {
            PureState base = filled_ ? filled_state(m_) : PureState::vacuum(m_);
            PureState t = s.kind == StatementKind::kTerm ? apply_creation_string(base, s.orbitals)
                                                         : apply_annihilation_string(base, s.orbitals);
            int n = t.electron_count().value_or(0);
            if (electrons && *electrons != n) throw std::invalid_argument("term changes the electron number");
            electrons = n;
            for (const auto& [det, amp] : t.terms()) acc[det.mask()] += s.coeff * amp;
          } catch (const std::exception& e) {
            r.ok = false;
            r.diagnostic = e.what();
            init_error = e.what();
            init_line = s.line;
          }
        }
        record(std::move(r));
      }
      if (filled_ && !electrons) {
        electrons = static_cast<int>(m_);
        acc[m_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_) - 1] = 1.0;
      }
      nodes_[0].state = PureState::from_masks(m_, electrons, acc);
      if (!init_error && nodes_[0].state.is_zero()) {
        init_error = "initial state is zero";
        init_line = st.empty() ? 0 : st.front().line;
      }
    }

    for (; i < st.size(); ++i) {
      const auto& s = st[i];
      StatementResult r{s.line, serialize_statement(sc_, s), nodes_[current_].path, true, ""};
      try {
        if (init_error) throw std::runtime_error("no valid initial state (line " + std::to_string(init_line) + ")");
        execute(s);
      } catch (const std::exception& e) {
        r.ok = false;
        r.diagnostic = e.what();
        if (is_assert(s.kind)) {
          report_.assertions.push_back({s.line, assert_name(s.kind), nodes_[current_].path, s.expected,
                                        std::nan(""), s.tol, false, e.what()});
        }
      }
      record(std::move(r));
    }

    for (const auto& n : nodes_) {
      report_.branches.push_back({n.path, format_label(n.label, namer_), n.probability, n.cumulative});
    }
    if (any_fidelity_target_) {
      double p = 0.0;
      for (std::size_t k : successful_) p += nodes_[k].cumulative;
      report_.success_probability = p;
    }
    for (const auto& a : report_.assertions) {
      if (!a.pass) ++report_.violations;
    }
    for (const auto& s : report_.statements) {
      if (!s.ok && !is_assert_line(s.line)) ++report_.violations;
    }
    return report_;
  }

 private:
  bool is_assert_line(int line) const {
    for (const auto& s : sc_.statements) {
      if (s.line == line) return is_assert(s.kind);
    }
    return false;
  }

  void record(StatementResult r) { report_.statements.push_back(std::move(r)); }

  Node& leaf() {
    Node& n = nodes_[current_];
    if (!n.children.empty()) throw std::logic_error("current node was measured; select a branch first");
    return n;
  }

  void assertion(const Statement& s, double actual, std::string diagnostic = "") {
    bool pass = std::abs(actual - s.expected) <= s.tol;
    report_.assertions.push_back(
        {s.line, assert_name(s.kind), nodes_[current_].path, s.expected, actual, s.tol, pass, std::move(diagnostic)});
    if (s.kind == StatementKind::kAssertFidelity && s.expected >= 1.0 - 1e-9) {
      any_fidelity_target_ = true;
      if (pass) successful_.insert(current_);
    }
  }

  void fork(std::vector<Branch> branches) {
    Node& parent = nodes_[current_];
    const std::size_t parent_index = current_;
    std::vector<std::size_t> kids;
    for (std::size_t k = 0; k < branches.size(); ++k) {
      Node child;
      child.path = parent.path + "/" + std::to_string(k);
      child.label = branches[k].label;
      child.probability = branches[k].probability;
      child.cumulative = parent.cumulative * branches[k].probability;
      child.state = std::move(branches[k].post_state);
      kids.push_back(nodes_.size() + k);
      pending_.push_back(std::move(child));
    }
    for (auto& c : pending_) nodes_.push_back(std::move(c));
    pending_.clear();
    nodes_[parent_index].children = kids;
    last_measured_ = parent_index;
  }

  bool matches(const OutcomeLabel& label, const std::string& pattern) const {
    std::size_t pos = 0;
    while (pos <= pattern.size()) {
      std::size_t end = pattern.find(',', pos);
      if (end == std::string::npos) end = pattern.size();
      std::string pair = pattern.substr(pos, end - pos);
      auto eq = pair.find('=');
      std::string key = pair.substr(0, eq);
      std::string value = pair.substr(eq + 1);
      bool found = false;
      for (const auto& e : label) {
        std::string name;
        for (std::size_t j = 0; j < e.orbitals.size(); ++j) name += (j ? "+" : "") + namer_(e.orbitals[j]);
        if (key != name && key != name + "(" + e.axis + ")") continue;
        if (value == std::to_string(e.count)) found = true;
      }
      if (!found) return false;
      pos = end + 1;
    }
    return true;
  }

  void execute(const Statement& s) {
    switch (s.kind) {
      case StatementKind::kRotate: {
        Node& n = leaf();
        auto r = spin_rotation(m_, s.orbitals[0], s.orbitals[1], SpinAxis::parse(s.axis), s.angle);
        Branch b{n.label, n.probability, n.state, {}, {}};
        n.state = apply_correction(b, r).post_state;
        break;
      }
      case StatementKind::kUnitary: {
        Node& n = leaf();
        n.state = apply_orbital_unitary(n.state, OrbitalUnitary(s.matrix, 1e-9));
        break;
      }
      case StatementKind::kBasis:
        (void)OrbitalUnitary(s.matrix, 1e-9);
        bases_[s.id] = s.matrix;
        break;
      case StatementKind::kEvolve1: {
        Node& n = leaf();
        n.state = evolve_one_body(n.state, s.matrix, s.time);
        break;
      }
      case StatementKind::kEvolveU: {
        Node& n = leaf();
        DensityInteraction v;
        v.terms = s.terms;
        if (!s.id.empty()) v.orbital_columns = bases_.at(s.id);
        n.state = evolve_density_density(n.state, v, s.time);
        break;
      }
      case StatementKind::kMeasureOcc:
      case StatementKind::kMeasureTotal:
        fork(measure_occupation(leaf().state, s.orbitals,
                                s.kind == StatementKind::kMeasureOcc ? Aggregate::kPerOrbital : Aggregate::kTotal));
        break;
      case StatementKind::kMeasureSpin:
        fork(measure_spin_axis(leaf().state, s.orbitals[0], s.orbitals[1], SpinAxis::parse(s.axis)));
        break;
      case StatementKind::kMeasureBasis: {
        auto into = OrbitalUnitary::from_orbital_columns(bases_.at(s.id));
        auto branches = measure_occupation(apply_orbital_unitary(leaf().state, into), s.orbitals, Aggregate::kPerOrbital);
        for (auto& b : branches) {
          for (auto& e : b.label) e.axis = s.id;
        }
        fork(std::move(branches));
        break;
      }
      case StatementKind::kSelect: {
        if (!last_measured_) throw std::logic_error("select without a preceding measurement");
        const auto& kids = nodes_[*last_measured_].children;
        if (s.index >= kids.size()) {
          throw std::out_of_range("branch index " + std::to_string(s.index) + " out of range (" +
                                  std::to_string(kids.size()) + " branches)");
        }
        current_ = kids[s.index];
        break;
      }
      case StatementKind::kAssertParticleEntropy:
        assertion(s, particle_entropy(nodes_[current_].state));
        break;
      case StatementKind::kAssertGeometric: {
        auto g = geometric_entanglement(nodes_[current_].state, geo_);
        assertion(s, g.value, g.converged ? "" : "optimizer did not converge");
        break;
      }
      case StatementKind::kAssertModeEntropy:
        assertion(s, mode_entropy(nodes_[current_].state, OrbitalPartition(m_, s.orbitals)));
        break;
      case StatementKind::kAssertProb: {
        if (!last_measured_) {
          assertion(s, 0.0, "no measurement yet");
          break;
        }
        double p = 0.0;
        bool any = false;
        for (std::size_t k : nodes_[*last_measured_].children) {
          if (matches(nodes_[k].label, s.pattern)) {
            p += nodes_[k].probability;
            any = true;
          }
        }
        assertion(s, p, any ? "" : "pattern matched no branch");
        break;
      }
      case StatementKind::kAssertFidelity: {
        const Node& n = nodes_[current_];
        Branch b{n.label, n.probability, n.state, {}, {}};
        auto f = teleport_fidelity(b, s.orbitals[0], s.orbitals[1], s.a, s.b,
                                   filled_ ? Encoding::kHole : Encoding::kParticle);
        assertion(s, f.fidelity, f.diagnostic);
        break;
      }
      default:
        throw std::logic_error("initialization statement out of place");
    }
  }

  const Scenario& sc_;
  std::size_t m_;
  RunReport report_;
  GeometricOptions geo_;
  OrbitalNamer namer_;
  std::vector<Node> nodes_;
  std::vector<Node> pending_;
  std::size_t current_ = 0;
  std::optional<std::size_t> last_measured_;
  std::map<std::string, Matrix> bases_;
  std::set<std::size_t> successful_;
  bool filled_ = false;
  bool any_fidelity_target_ = false;
};

}  // namespace

RunReport execute_scenario(const Scenario& scenario, std::uint64_t seed) { return Executor(scenario, seed).run(); }

}  // namespace fermitele
