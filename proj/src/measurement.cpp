#include "fermitele/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fermitele/entanglement.hpp"
#include "fermitele/geometric.hpp"
#include "fermitele/linalg.hpp"

namespace fermitele {

namespace {

constexpr double kMinBranchProbability = 1e-24;

std::vector<std::size_t> sorted_unique(std::span<const std::size_t> orbitals, std::size_t m) {
  std::vector<std::size_t> out(orbitals.begin(), orbitals.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("measured orbitals must be distinct");
  }
  for (std::size_t k : out) {
    if (k >= m) throw std::out_of_range("measured orbital out of range");
  }
  return out;
}

std::string default_name(std::size_t k) { return std::to_string(k); }

}  // namespace

std::string format_label(const OutcomeLabel& label, const OrbitalNamer& namer) {
  std::ostringstream out;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (i) out << ',';
    const auto& entry = label[i];
    for (std::size_t j = 0; j < entry.orbitals.size(); ++j) {
      if (j) out << '+';
      out << (namer ? namer(entry.orbitals[j]) : default_name(entry.orbitals[j]));
    }
    if (!entry.axis.empty()) out << '(' << entry.axis << ')';
    out << '=' << entry.count;
  }
  return out.str();
}

std::vector<Branch> measure_occupation(const PureState& state, std::span<const std::size_t> orbitals,
                                       Aggregate aggregate) {
  if (orbitals.empty()) throw std::invalid_argument("measurement needs at least one orbital");
  const auto sorted = sorted_unique(orbitals, state.num_orbitals());
  std::uint64_t mask = 0;
  for (std::size_t k : sorted) mask |= std::uint64_t{1} << k;

  std::map<std::vector<int>, std::map<std::uint64_t, Complex>> blocks;
  for (const auto& [det, amp] : state.terms()) {
    std::vector<int> key;
    if (aggregate == Aggregate::kTotal) {
      key.push_back(std::popcount(det.mask() & mask));
    } else {
      for (std::size_t k : sorted) key.push_back(det.occupied(k) ? 1 : 0);
    }
    blocks[key][det.mask()] = amp;
  }

  const double total = state.norm_squared();
  std::vector<Branch> out;
  for (const auto& [key, amps] : blocks) {
    PureState block = PureState::from_masks(state.num_orbitals(), state.electron_count(), amps);
    double p = block.norm_squared() / total;
    if (p <= kMinBranchProbability) continue;
    Branch b{{}, p, block.normalized(), {}, {}};
    if (aggregate == Aggregate::kTotal) {
      b.label.push_back({sorted, key.front(), ""});
    } else {
      for (std::size_t i = 0; i < sorted.size(); ++i) b.label.push_back({{sorted[i]}, key[i], ""});
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Branch> measure_in_local_basis(const PureState& state, std::span<const std::size_t> orbitals,
                                           const Matrix& columns,
                                           const std::vector<std::string>& axis_names) {
  if (static_cast<std::size_t>(columns.rows()) != orbitals.size() || columns.rows() != columns.cols()) {
    throw std::invalid_argument("local basis block must be k x k for k orbitals");
  }
  if (!axis_names.empty() && axis_names.size() != orbitals.size()) {
    throw std::invalid_argument("need one axis name per orbital");
  }
  sorted_unique(orbitals, state.num_orbitals());
  OrbitalUnitary full = OrbitalUnitary::embed(state.num_orbitals(), orbitals, columns);
  PureState rotated = apply_orbital_unitary(state, OrbitalUnitary::from_orbital_columns(full.matrix()));
  auto branches = measure_occupation(rotated, orbitals, Aggregate::kPerOrbital);
  if (!axis_names.empty()) {
    for (auto& b : branches) {
      for (auto& entry : b.label) {
        auto pos = std::find(orbitals.begin(), orbitals.end(), entry.orbitals.front()) - orbitals.begin();
        entry.axis = axis_names[static_cast<std::size_t>(pos)];
      }
    }
  }
  return branches;
}

SpinAxis SpinAxis::x() { return {std::numbers::pi / 2, 0.0, "x"}; }
SpinAxis SpinAxis::y() { return {std::numbers::pi / 2, std::numbers::pi / 2, "y"}; }
SpinAxis SpinAxis::z() { return {0.0, 0.0, "z"}; }

SpinAxis SpinAxis::parse(const std::string& text) {
  if (text == "x") return x();
  if (text == "y") return y();
  if (text == "z") return z();
  auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("unknown spin axis '" + text + "'");
  std::size_t used = 0;
  double theta = std::stod(text.substr(0, comma), &used);
  double phi = std::stod(text.substr(comma + 1));
  if (!std::isfinite(theta) || !std::isfinite(phi)) throw std::invalid_argument("non-finite spin axis");
  return {theta, phi, text};
}

Matrix spin_eigenbasis(const SpinAxis& axis) {
  if (axis.theta == 0.0) return Matrix::Identity(2, 2);
  const double c = std::cos(axis.theta / 2);
  const double s = std::sin(axis.theta / 2);
  const Complex ph = std::exp(Complex(0.0, axis.phi));
  Matrix out(2, 2);
  out << c, s, ph * s, -ph * c;
  return out;
}

std::vector<Branch> measure_spin_axis(const PureState& state, std::size_t up, std::size_t dn,
                                      const SpinAxis& axis) {
  if (up == dn) throw std::invalid_argument("spin pair needs two distinct orbitals");
  const std::size_t pair[2] = {up, dn};
  return measure_in_local_basis(state, pair, spin_eigenbasis(axis), {axis.name, axis.name});
}

OrbitalUnitary spin_rotation(std::size_t num_orbitals, std::size_t up, std::size_t dn,
                             const SpinAxis& axis, double angle) {
  if (up == dn) throw std::invalid_argument("spin pair needs two distinct orbitals");
  const double nx = std::sin(axis.theta) * std::cos(axis.phi);
  const double ny = std::sin(axis.theta) * std::sin(axis.phi);
  const double nz = std::cos(axis.theta);
  Matrix sigma(2, 2);
  sigma << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
  Matrix block = std::cos(angle / 2) * Matrix::Identity(2, 2) - Complex(0.0, std::sin(angle / 2)) * sigma;
  const std::size_t pair[2] = {up, dn};
  return OrbitalUnitary::embed(num_orbitals, pair, block);
}

Branch apply_correction(const Branch& branch, const OrbitalUnitary& correction,
                        const std::string& description) {
  auto support = correction.support();
  for (const auto& entry : branch.label) {
    for (std::size_t k : entry.orbitals) {
      if (std::find(support.begin(), support.end(), k) != support.end()) {
        throw std::invalid_argument("correction acts on measured orbital " + std::to_string(k));
      }
    }
  }
  Branch out = branch;
  out.post_state = apply_orbital_unitary(branch.post_state, correction);
  out.corrections.push_back(description);
  return out;
}

FidelityResult teleport_fidelity(const Branch& branch, std::size_t first, std::size_t second,
                                 Complex a, Complex b, Encoding encoding) {
  const PureState& post = branch.post_state;
  const std::size_t m = post.num_orbitals();
  if (first == second) throw std::invalid_argument("target pair needs two distinct orbitals");
  if (first >= m || second >= m) throw std::out_of_range("target orbital out of range");
  if (post.is_zero()) return {0.0, "post-state is zero"};
  const double target_norm = std::norm(a) + std::norm(b);
  if (target_norm <= 0.0) throw std::invalid_argument("target amplitudes are both zero");

  const std::uint64_t pair = (std::uint64_t{1} << first) | (std::uint64_t{1} << second);
  const std::uint64_t rest = post.terms().begin()->first.mask() & ~pair;
  for (const auto& [det, amp] : post.terms()) {
    if ((det.mask() & ~pair) != rest) return {0.0, "orbitals outside the target pair are not in a definite configuration"};
  }

  PureState target(m, std::nullopt);
  if (encoding == Encoding::kParticle) {
    PureState base = PureState::determinant(m, SlaterDeterminant(rest));
    target = state_apply_creation(base, first).scaled(a) + state_apply_creation(base, second).scaled(b);
  } else {
    PureState base = PureState::determinant(m, SlaterDeterminant(rest | pair));
    target = state_apply_annihilation(base, first).scaled(a) + state_apply_annihilation(base, second).scaled(b);
  }
  if (target.electron_count() != post.electron_count()) {
    return {0.0, "target pair occupancy differs from the post-state"};
  }
  double f = std::norm(inner_product(target, post)) / (target_norm * post.norm_squared());
  return {std::min(1.0, f), ""};
}

// ---------------------------------------------------------------------------

namespace {

void check_sample(const InequalitySample& s) {
  const std::size_t m = s.psi_s.num_orbitals();
  if (s.psi_e.num_orbitals() != m) throw std::invalid_argument("sample states disagree on M");
  if (s.e >= m) throw std::out_of_range("orbital e out of range");
  if (s.alpha < 0.0 || s.alpha > 1.0 || !std::isfinite(s.theta)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  for (const auto* st : {&s.psi_e, &s.psi_s}) {
    for (const auto& [det, amp] : st->terms()) {
      if (det.occupied(s.e)) throw std::invalid_argument("sample state has support on orbital e");
    }
  }
  if (s.psi_e.electron_count() && s.psi_s.electron_count() &&
      *s.psi_e.electron_count() + 1 != *s.psi_s.electron_count()) {
    throw std::invalid_argument("psi_e must hold one electron fewer than psi_s");
  }
}

struct MeasureValue {
  double value = 0.0;
  bool inconclusive = false;
};

MeasureValue evaluate(const PureState& state, InequalityMeasure measure) {
  if (measure == InequalityMeasure::kEntropy) return {particle_entropy(state), false};
  const std::size_t m = state.num_orbitals();
  const int n = state.electron_count().value_or(0);
  const int holes = static_cast<int>(m) - n;
  if (n <= 2 || holes <= 2) return {geometric_entanglement(state).value, false};
  if (m <= 6 && n <= 3) {
    BruteForceResult r = brute_force_closest_fock(state);
    return {r.best, !r.conclusive};
  }
  GeometricResult r = geometric_entanglement(state, {GeometricMode::kOptimize, 32, 0, 1e-12, 2000});
  return {r.value, true};
}

}  // namespace

PureState inequality_initial_state(const InequalitySample& sample) {
  check_sample(sample);
  const std::size_t m = sample.psi_s.num_orbitals();
  PureState out(m, sample.psi_s.electron_count());
  if (sample.alpha > 0.0) {
    PureState pe = state_apply_creation(sample.psi_e.normalized(), sample.e);
    out = out + pe.scaled(std::sqrt(sample.alpha) * std::exp(Complex(0.0, sample.theta)));
  }
  if (sample.alpha < 1.0) out = out + sample.psi_s.normalized().scaled(std::sqrt(1.0 - sample.alpha));
  return out;
}

InequalityResult check_measurement_inequality(const InequalitySample& sample, InequalityMeasure measure) {
  PureState combined = inequality_initial_state(sample);
  InequalityResult out;
  MeasureValue lhs = evaluate(combined.normalized(), measure);
  out.lhs = lhs.value;
  out.inconclusive = lhs.inconclusive;
  out.rhs = 0.0;
  if (sample.alpha > 0.0) {
    MeasureValue ve = evaluate(state_apply_creation(sample.psi_e.normalized(), sample.e), measure);
    out.rhs += sample.alpha * ve.value;
    out.inconclusive = out.inconclusive || ve.inconclusive;
  }
  if (sample.alpha < 1.0) {
    MeasureValue vs = evaluate(sample.psi_s.normalized(), measure);
    out.rhs += (1.0 - sample.alpha) * vs.value;
    out.inconclusive = out.inconclusive || vs.inconclusive;
  }
  const double tol = measure == InequalityMeasure::kEntropy ? kEntropyInequalityTol : kGeometricInequalityTol;
  out.slack = out.lhs - out.rhs;
  out.holds = out.lhs >= out.rhs - tol;
  return out;
}

BetaBound check_beta_bound(const InequalitySample& sample) {
  check_sample(sample);
  const std::size_t m = sample.psi_s.num_orbitals();
  const int n = sample.psi_s.electron_count().value_or(0);
  PureState pe = sample.psi_e.normalized();
  PureState ps = sample.psi_s.normalized();

  Vector v = Vector::Zero(static_cast<Eigen::Index>(m));
  for (const auto& [det, amp] : pe.terms()) {
    // S_i = c_{i_{N-1}} ... c_{i_1}; the string helper applies its last entry first.
    auto occ = det.orbitals();
    std::reverse(occ.begin(), occ.end());
    PureState lowered = apply_annihilation_string(ps, occ);
    for (const auto& [d, x] : lowered.terms()) {
      v(static_cast<Eigen::Index>(d.orbitals().front())) += std::conj(amp) * x;
    }
  }
  if ((n - 1) % 2 != 0) v = -v;

  BetaBound out;
  out.beta = v.squaredNorm();
  if (out.beta <= 1e-28) {
    out.bound = 0.0;
    return out;
  }
  Vector s = v / std::sqrt(out.beta);
  auto occupation = [&](const PureState& st) {
    Matrix rho = one_particle_rdm(st);
    return (s.adjoint() * rho * s)(0, 0).real();
  };
  const double rho_s = occupation(ps);
  const double rho_e = occupation(state_apply_creation(pe, sample.e));
  out.bound = rho_s * (1.0 - rho_e);
  out.holds = out.beta <= out.bound + 1e-10;
  return out;
}

PureState random_state(std::size_t num_orbitals, int electrons, std::uint64_t seed,
                       std::optional<std::size_t> exclude_orbital) {
  if (num_orbitals == 0 || num_orbitals > 20) throw std::invalid_argument("random_state supports 1 <= M <= 20");
  std::uint64_t allowed = (std::uint64_t{1} << num_orbitals) - 1;
  if (exclude_orbital) {
    if (*exclude_orbital >= num_orbitals) throw std::out_of_range("excluded orbital out of range");
    allowed &= ~(std::uint64_t{1} << *exclude_orbital);
  }
  if (electrons < 0 || electrons > std::popcount(allowed)) {
    throw std::invalid_argument("no determinant satisfies the requested constraints");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::map<std::uint64_t, Complex> amps;
  for (std::uint64_t mask = 0; mask <= allowed; ++mask) {
    if ((mask & ~allowed) != 0 || std::popcount(mask) != electrons) continue;
    double re = gauss(rng);
    double im = gauss(rng);
    amps[mask] = Complex(re, im);
  }
  return PureState::from_masks(num_orbitals, electrons, amps).normalized();
}

InequalitySample random_inequality_sample(std::size_t num_orbitals, int electrons, std::uint64_t seed) {
  if (electrons < 1 || electrons >= static_cast<int>(num_orbitals)) {
    throw std::invalid_argument("inequality samples need 1 <= N <= M-1");
  }
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_int_distribution<std::size_t> pick(0, num_orbitals - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  InequalitySample s;
  s.e = pick(rng);
  s.alpha = unit(rng);
  s.theta = 2.0 * std::numbers::pi * unit(rng);
  s.psi_e = random_state(num_orbitals, electrons - 1, mix_seed(seed, 1), s.e);
  s.psi_s = random_state(num_orbitals, electrons, mix_seed(seed, 2), s.e);
  return s;
}

}  // namespace fermitele
