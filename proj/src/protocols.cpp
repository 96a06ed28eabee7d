#include "fermitele/protocols.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fermitele/entanglement.hpp"

namespace fermitele {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kPi = std::numbers::pi;

struct CorrectionRule {
  std::vector<int> counts;
  bool correctable = false;
  std::string axis;  // empty: identity
  double angle = 0.0;
};

struct TargetPair {
  std::size_t up = 0;
  std::size_t dn = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  Encoding encoding = Encoding::kParticle;
};

std::vector<int> counts_of(const Branch& b) {
  std::vector<int> out;
  for (const auto& e : b.label) out.push_back(e.count);
  return out;
}

std::string describe(const CorrectionRule& rule) {
  if (!rule.correctable) return "none";
  if (rule.axis.empty()) return "identity";
  std::ostringstream out;
  out.precision(17);
  out << "rotate " << rule.axis << ' ' << rule.angle;
  return out.str();
}

void correct_branches(ProtocolReport& report, const std::vector<Branch>& measured,
                      const std::vector<CorrectionRule>& table, const TargetPair& target,
                      Complex a, Complex b, const OrbitalNamer& namer) {
  const std::size_t m = measured.front().post_state.num_orbitals();
  for (const auto& branch : measured) {
    const CorrectionRule* rule = nullptr;
    for (const auto& r : table) {
      if (r.counts == counts_of(branch)) rule = &r;
    }
    BranchReport row;
    row.label = format_label(branch.label, namer);
    row.probability = branch.probability;
    Branch out = branch;
    if (!rule) {
      row.correction = "none";
      row.diagnostic = "outcome missing from correction table";
    } else {
      row.correction = describe(*rule);
      if (rule->correctable && !rule->axis.empty()) {
        out = apply_correction(branch, spin_rotation(m, target.up, target.dn, SpinAxis::parse(rule->axis), rule->angle),
                               row.correction);
      }
    }
    auto fid = teleport_fidelity(out, target.first, target.second, a, b, target.encoding);
    row.fidelity = fid.fidelity;
    if (row.diagnostic.empty()) row.diagnostic = fid.diagnostic;
    if (row.fidelity >= 1.0 - 1e-9) report.success_probability += row.probability;
    report.branches.push_back(std::move(row));
    report.corrected_branches.push_back(std::move(out));
  }
}

OrbitalNamer table_namer(std::vector<std::string> names) {
  return [names = std::move(names)](std::size_t k) { return k < names.size() ? names[k] : std::to_string(k); };
}

void push_stage(ProtocolReport& report, const std::string& label, const PureState& state,
                const std::vector<std::pair<std::string, OrbitalPartition>>& cuts) {
  report.stages.push_back(evaluate_stage(label, state, cuts));
  report.stage_states.push_back(state);
}

}  // namespace

StageReport evaluate_stage(const std::string& label, const PureState& state,
                           const std::vector<std::pair<std::string, OrbitalPartition>>& cuts,
                           const GeometricOptions& options) {
  StageReport out;
  out.label = label;
  out.particle_entropy = particle_entropy(state);
  auto g = geometric_entanglement(state, options);
  out.geometric = g.value;
  out.geometric_converged = g.converged;
  for (const auto& [name, cut] : cuts) out.mode_entropies.emplace_back(name, mode_entropy(state, cut));
  return out;
}

void check_qubit(Complex a, Complex b) {
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) || !std::isfinite(b.imag())) {
    throw std::invalid_argument("qubit amplitudes must be finite");
  }
  if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-12) {
    throw std::invalid_argument("qubit amplitudes must satisfy |a|^2 + |b|^2 = 1");
  }
}

// H2 -----------------------------------------------------------------------

PureState h2_resource_state() {
  PureState s(h2::kNumOrbitals, 1);
  s.add(SlaterDeterminant::from_orbitals({h2::kADn}), kInvSqrt2);
  s.add(SlaterDeterminant::from_orbitals({h2::kBDn}), kInvSqrt2);
  return s;
}

PureState h2_injected_state(Complex a, Complex b) {
  PureState s(h2::kNumOrbitals, 1);
  s.add(SlaterDeterminant::from_orbitals({h2::kAUp}), a);
  s.add(SlaterDeterminant::from_orbitals({h2::kBUp}), b);
  return s;
}

PureState h2_combined_state(Complex a, Complex b) {
  check_qubit(a, b);
  Complex coeffs[h2::kNumOrbitals] = {};
  coeffs[h2::kAUp] = a;
  coeffs[h2::kBUp] = b;
  return create_orbital(h2_resource_state(), coeffs);
}

ProtocolReport run_h2_protocol(Complex a, Complex b) {
  check_qubit(a, b);
  ProtocolReport report;
  report.name = "h2";
  report.nominal_success = 0.5;
  const std::vector<std::pair<std::string, OrbitalPartition>> cuts = {
      {"A|B", OrbitalPartition(h2::kNumOrbitals, {h2::kADn, h2::kAUp})}};

  push_stage(report, "resource", h2_resource_state(), cuts);
  push_stage(report, "injected", h2_injected_state(a, b), cuts);
  PureState psi = h2_combined_state(a, b);
  push_stage(report, "combined", psi, cuts);

  auto measured = measure_spin_axis(psi, h2::kAUp, h2::kADn, SpinAxis::x());
  // Keys over (A_dn, A_up) after the rotation: A_up holds the +x orbital.
  const std::vector<CorrectionRule> table = {
      {{0, 0}, false, "", 0.0},
      {{0, 1}, true, "z", kPi},
      {{1, 0}, true, "", 0.0},
      {{1, 1}, false, "", 0.0},
  };
  correct_branches(report, measured, table, {h2::kBUp, h2::kBDn, h2::kBDn, h2::kBUp, Encoding::kParticle}, a, b,
                   table_namer({"A_dn", "A_up", "B_dn", "B_up"}));
  return report;
}

// NV0 ----------------------------------------------------------------------

PureState nv_bell_pair() {
  PureState full = filled_state(nv::kNumOrbitals);
  const std::size_t first[2] = {nv::kNDn, nv::k1Dn};
  const std::size_t second[2] = {nv::kNUp, nv::kM1Dn};
  return (apply_annihilation_string(full, first) + apply_annihilation_string(full, second)).scaled(kInvSqrt2);
}

PureState nv_combined_state(Complex a, Complex b) {
  check_qubit(a, b);
  Complex coeffs[nv::kNumOrbitals] = {};
  coeffs[nv::k0Up] = a;
  coeffs[nv::k0Dn] = b;
  PureState hole = annihilate_orbital(filled_state(nv::kNumOrbitals), coeffs);
  const std::size_t first[2] = {nv::kNDn, nv::k1Dn};
  const std::size_t second[2] = {nv::kNUp, nv::kM1Dn};
  return (apply_annihilation_string(hole, first) + apply_annihilation_string(hole, second)).scaled(kInvSqrt2);
}

OrbitalUnitary nv_spin_flip_unitary(Complex a, Complex b) {
  check_qubit(a, b);
  // Annihilator substitution c_i -> sum_j sub(i, j) c_j; the orbital unitary is its adjoint.
  Matrix sub = Matrix::Identity(nv::kNumOrbitals, nv::kNumOrbitals);
  auto set_pair = [&](std::size_t dn, std::size_t up, Complex dd, Complex du, Complex ud, Complex uu) {
    sub(dn, dn) = dd;
    sub(dn, up) = du;
    sub(up, dn) = ud;
    sub(up, up) = uu;
  };
  set_pair(nv::k1Dn, nv::k1Up, b, a, -std::conj(a), std::conj(b));
  set_pair(nv::kM1Dn, nv::kM1Up, b, a, -std::conj(a), std::conj(b));
  set_pair(nv::k0Dn, nv::k0Up, std::conj(b), -a, std::conj(a), b);
  return OrbitalUnitary(sub.adjoint(), 1e-10);
}

Matrix nv_measurement_block() {
  // Rows and columns follow (1dn, 1up, -1dn, -1up); columns are g-, f+, f-, g+.
  Matrix block = Matrix::Zero(4, 4);
  block(0, 0) = -kInvSqrt2;
  block(3, 0) = kInvSqrt2;
  block(1, 1) = kInvSqrt2;
  block(2, 1) = kInvSqrt2;
  block(1, 2) = kInvSqrt2;
  block(2, 2) = -kInvSqrt2;
  block(0, 3) = kInvSqrt2;
  block(3, 3) = kInvSqrt2;
  return block;
}

ProtocolReport run_nv_protocol(Complex a, Complex b) {
  check_qubit(a, b);
  ProtocolReport report;
  report.name = "nv0";
  report.notes.push_back("spin-flip step is the (a,b)-dependent orbital unitary; it presumes knowledge of the teleported amplitudes");
  const std::vector<std::pair<std::string, OrbitalPartition>> cuts = {
      {"C|N", OrbitalPartition(nv::kNumOrbitals, {nv::kNDn, nv::kNUp}).swapped()}};

  push_stage(report, "bell_pair", nv_bell_pair(), cuts);
  PureState psi = nv_combined_state(a, b);
  push_stage(report, "combined", psi, cuts);
  PureState flipped = apply_orbital_unitary(psi, nv_spin_flip_unitary(a, b));
  push_stage(report, "spin_flipped", flipped, cuts);

  const std::size_t orbitals[4] = {nv::k1Dn, nv::k1Up, nv::kM1Dn, nv::kM1Up};
  auto measured = measure_in_local_basis(flipped, orbitals, nv_measurement_block(), {"g-", "f+", "f-", "g+"});
  // The single hole among the four measured orbitals picks the correction.
  const std::vector<CorrectionRule> table = {
      {{0, 1, 1, 1}, true, "z", kPi},
      {{1, 0, 1, 1}, true, "x", kPi},
      {{1, 1, 0, 1}, true, "y", kPi},
      {{1, 1, 1, 0}, true, "", 0.0},
  };
  correct_branches(report, measured, table, {nv::kNUp, nv::kNDn, nv::kNUp, nv::kNDn, Encoding::kHole}, a, b,
                   table_namer({"0_dn", "0_up", "1_dn", "1_up", "-1_dn", "-1_up", "N_dn", "N_up"}));
  return report;
}

// Quantum dots -------------------------------------------------------------

ResourcePreparation resource_preparation_qdot(ResourceMode mode) {
  (void)mode;
  PureState start(qdot::kNumOrbitals, 2);
  start.add(SlaterDeterminant::from_orbitals({qdot::k3Up, qdot::k3Dn}), 1.0);

  Matrix hop = Matrix::Zero(qdot::kNumOrbitals, qdot::kNumOrbitals);
  hop(qdot::k2Up, qdot::k3Up) = hop(qdot::k3Up, qdot::k2Up) = 1.0;
  hop(qdot::k2Dn, qdot::k3Dn) = hop(qdot::k3Dn, qdot::k2Dn) = 1.0;
  PureState hopped = evolve_one_body(start, hop, kPi / 4);

  const std::size_t dot2[2] = {qdot::k2Up, qdot::k2Dn};
  ResourcePreparation out;
  for (const auto& branch : measure_occupation(hopped, dot2, Aggregate::kTotal)) {
    if (branch.label.front().count != 1) continue;
    PureState s = branch.post_state;
    Complex lead = s.amplitude(SlaterDeterminant::from_orbitals({qdot::k2Up, qdot::k3Dn}));
    out.state = s.scaled(std::abs(lead) / lead);
    out.probability = branch.probability;
  }
  if (out.state.is_zero()) throw std::domain_error("resource post-selection found no (1,1) outcome");
  return out;
}

PureState qdot_combined_state(const PureState& resource, Complex alpha, Complex beta) {
  check_qubit(alpha, beta);
  Complex coeffs[qdot::kNumOrbitals] = {};
  coeffs[qdot::k1Up] = alpha;
  coeffs[qdot::k1Dn] = beta;
  return create_orbital(resource, coeffs);
}

Matrix qdot_bonding_columns() {
  Matrix c = Matrix::Zero(qdot::kNumOrbitals, qdot::kNumOrbitals);
  c(qdot::k1Up, 0) = kInvSqrt2;
  c(qdot::k2Up, 0) = kInvSqrt2;
  c(qdot::k1Dn, 1) = kInvSqrt2;
  c(qdot::k2Dn, 1) = kInvSqrt2;
  c(qdot::k1Up, 2) = kInvSqrt2;
  c(qdot::k2Up, 2) = -kInvSqrt2;
  c(qdot::k1Dn, 3) = kInvSqrt2;
  c(qdot::k2Dn, 3) = -kInvSqrt2;
  c(qdot::k3Up, 4) = 1.0;
  c(qdot::k3Dn, 5) = 1.0;
  return c;
}

DensityInteraction qdot_conditional_hopping(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw std::invalid_argument("U must be positive");
  // Bonding-basis indices: a_up 0, a_dn 1, b_up 2, b_dn 3.
  DensityInteraction v;
  v.terms = {{{0, 1}, u / 4}, {{1, 2}, 3 * u / 4}, {{2, 3}, 5 * u / 4}, {{0, 3}, 7 * u / 4}};
  v.orbital_columns = qdot_bonding_columns();
  return v;
}

ProtocolReport run_qdot_protocol(Complex alpha, Complex beta, double u) {
  check_qubit(alpha, beta);
  DensityInteraction v = qdot_conditional_hopping(u);
  ProtocolReport report;
  report.name = "qdots";
  const std::vector<std::pair<std::string, OrbitalPartition>> cuts = {
      {"dots12|dot3", OrbitalPartition(qdot::kNumOrbitals, {qdot::k1Up, qdot::k1Dn, qdot::k2Up, qdot::k2Dn})},
      {"dot2|rest", OrbitalPartition(qdot::kNumOrbitals, {qdot::k2Up, qdot::k2Dn})}};

  auto prep = resource_preparation_qdot();
  report.notes.push_back("resource post-selection probability " + std::to_string(prep.probability));
  push_stage(report, "resource", prep.state, cuts);
  PureState psi = qdot_combined_state(prep.state, alpha, beta);
  push_stage(report, "combined", psi, cuts);
  PureState tunneled = evolve_density_density(psi, v, kPi / u);
  push_stage(report, "tunneled", tunneled, cuts);

  const std::size_t orbitals[4] = {qdot::k1Up, qdot::k1Dn, qdot::k2Up, qdot::k2Dn};
  Matrix block = Matrix::Zero(4, 4);
  Matrix x = spin_eigenbasis(SpinAxis::x());
  block.topLeftCorner(2, 2) = x;
  block.bottomRightCorner(2, 2) = x;
  auto measured = measure_in_local_basis(tunneled, orbitals, block, {"x", "x", "x", "x"});
  const std::vector<CorrectionRule> table = {
      {{1, 1, 0, 0}, true, "z", kPi / 2},  {{0, 0, 1, 1}, true, "z", -kPi / 2},
      {{1, 0, 1, 0}, true, "y", -kPi},     {{0, 1, 1, 0}, true, "x", kPi},
      {{1, 0, 0, 1}, true, "x", kPi},      {{0, 1, 0, 1}, true, "y", -kPi},
  };
  correct_branches(report, measured, table, {qdot::k3Up, qdot::k3Dn, qdot::k3Up, qdot::k3Dn, Encoding::kParticle},
                   alpha, beta, table_namer({"1_up", "1_dn", "2_up", "2_dn", "3_up", "3_dn"}));
  return report;
}

}  // namespace fermitele
