#include "fermitele/dynamics.hpp"

#include <atomic>
#include <bit>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "fermitele/linalg.hpp"

namespace fermitele {

namespace {

std::atomic<PhaseConvention> g_convention{PhaseConvention::kPositiveExponent};

void check_hamiltonian(const Matrix& h1, std::size_t m) {
  if (static_cast<std::size_t>(h1.rows()) != m || h1.rows() != h1.cols()) {
    throw std::invalid_argument("one-body Hamiltonian must be M x M");
  }
  if (hermiticity_error(h1) > 1e-12) throw std::invalid_argument("one-body Hamiltonian is not hermitian");
}

std::uint64_t term_mask(const DensityTerm& term) {
  std::uint64_t mask = 0;
  for (std::size_t k : term.orbitals) mask |= std::uint64_t{1} << k;
  return mask;
}

double interaction_energy(std::uint64_t det, const std::vector<std::pair<std::uint64_t, double>>& terms) {
  double e = 0.0;
  for (const auto& [mask, energy] : terms) {
    if ((det & mask) == mask) e += energy;
  }
  return e;
}

std::vector<std::pair<std::uint64_t, double>> compiled(const DensityInteraction& v) {
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(v.terms.size());
  for (const auto& term : v.terms) out.emplace_back(term_mask(term), term.energy);
  return out;
}

PureState apply_phases(const PureState& state, const DensityInteraction& v, double t) {
  auto terms = compiled(v);
  const double sign = phase_sign();
  std::map<std::uint64_t, Complex> acc;
  for (const auto& [det, amp] : state.terms()) {
    double e = interaction_energy(det.mask(), terms);
    acc[det.mask()] = amp * std::exp(Complex(0.0, sign * t * e));
  }
  return PureState::from_masks(state.num_orbitals(), state.electron_count(), acc);
}

}  // namespace

void set_phase_convention(PhaseConvention convention) { g_convention.store(convention); }

PhaseConvention phase_convention() { return g_convention.load(); }

double phase_sign() { return phase_convention() == PhaseConvention::kPositiveExponent ? 1.0 : -1.0; }

void DensityInteraction::validate(std::size_t num_orbitals) const {
  for (const auto& term : terms) {
    if (term.orbitals.size() < 2) throw std::invalid_argument("density term needs at least two orbitals");
    std::uint64_t mask = 0;
    for (std::size_t k : term.orbitals) {
      if (k >= num_orbitals) throw std::out_of_range("density term orbital out of range");
      std::uint64_t b = std::uint64_t{1} << k;
      if (mask & b) throw std::invalid_argument("density term repeats an orbital");
      mask |= b;
    }
    if (!std::isfinite(term.energy)) throw std::invalid_argument("density term energy is not finite");
  }
  if (orbital_columns) {
    if (static_cast<std::size_t>(orbital_columns->rows()) != num_orbitals) {
      throw std::invalid_argument("diagonalizing basis has the wrong dimension");
    }
    OrbitalUnitary check(*orbital_columns);
    (void)check;
  }
}

OrbitalUnitary one_body_propagator(const Matrix& h1, double t) {
  return OrbitalUnitary(expi_hermitian(h1, phase_sign() * t), 1e-10);
}

PureState evolve_one_body(const PureState& state, const Matrix& h1, double t) {
  check_hamiltonian(h1, state.num_orbitals());
  return apply_orbital_unitary(state, one_body_propagator(h1, t));
}

PureState evolve_density_density(const PureState& state, const DensityInteraction& v, double t) {
  v.validate(state.num_orbitals());
  if (!v.orbital_columns) return apply_phases(state, v, t);
  OrbitalUnitary into = OrbitalUnitary::from_orbital_columns(*v.orbital_columns);
  PureState rotated = apply_orbital_unitary(state, into);
  return apply_orbital_unitary(apply_phases(rotated, v, t), into.adjoint());
}

PureState trotter_evolve(const PureState& state, const Matrix& h1, const DensityInteraction& v,
                         double t, int steps) {
  if (steps < 1) throw std::invalid_argument("Trotter step count must be >= 1");
  check_hamiltonian(h1, state.num_orbitals());
  v.validate(state.num_orbitals());
  const double dt = t / steps;
  OrbitalUnitary w1 = one_body_propagator(h1, dt);
  PureState s = state;
  for (int k = 0; k < steps; ++k) {
    s = evolve_density_density(s, v, dt);
    s = apply_orbital_unitary(s, w1);
  }
  return s;
}

PureState dense_evolution_oracle(const PureState& state, const Matrix& h1,
                                 const DensityInteraction& v, double t) {
  const std::size_t m = state.num_orbitals();
  check_hamiltonian(h1, m);
  v.validate(m);
  if (!state.electron_count()) return state;
  const int n = *state.electron_count();

  std::vector<std::uint64_t> basis;
  const std::uint64_t limit = m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m);
  if (m > 24) throw std::invalid_argument("dense oracle limited to small M");
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    if (std::popcount(mask) == n) {
      basis.push_back(mask);
      if (basis.size() > kDenseOracleCap) throw std::invalid_argument("dense oracle dimension cap exceeded");
    }
  }
  std::unordered_map<std::uint64_t, Eigen::Index> index;
  for (std::size_t i = 0; i < basis.size(); ++i) index[basis[i]] = static_cast<Eigen::Index>(i);
  const auto dim = static_cast<Eigen::Index>(basis.size());

  Matrix h = Matrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    SlaterDeterminant det(basis[static_cast<std::size_t>(col)]);
    for (std::size_t q = 0; q < m; ++q) {
      auto lowered = det_annihilate(det, q, m);
      if (!lowered) continue;
      for (std::size_t p = 0; p < m; ++p) {
        Complex hpq = h1(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
        if (hpq == Complex{}) continue;
        auto raised = det_create(lowered->det, p, m);
        if (!raised) continue;
        h(index[raised->det.mask()], col) += hpq * double(lowered->sign * raised->sign);
      }
    }
  }

  auto terms = compiled(v);
  Vector diag(dim);
  for (Eigen::Index i = 0; i < dim; ++i) diag(i) = interaction_energy(basis[static_cast<std::size_t>(i)], terms);
  if (!v.orbital_columns) {
    h += Matrix(diag.asDiagonal());
  } else {
    // R maps working-basis amplitudes to diagonal-basis amplitudes.
    OrbitalUnitary into = OrbitalUnitary::from_orbital_columns(*v.orbital_columns);
    Matrix r = Matrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
      PureState rotated = apply_orbital_unitary(
          PureState::determinant(m, SlaterDeterminant(basis[static_cast<std::size_t>(col)])), into);
      for (const auto& [det, amp] : rotated.terms()) r(index[det.mask()], col) = amp;
    }
    h += r.adjoint() * diag.asDiagonal() * r;
  }

  Matrix prop = expi_hermitian(h, phase_sign() * t);
  Vector psi = Vector::Zero(dim);
  for (const auto& [det, amp] : state.terms()) psi(index[det.mask()]) = amp;
  Vector out = prop * psi;
  std::map<std::uint64_t, Complex> acc;
  for (Eigen::Index i = 0; i < dim; ++i) acc[basis[static_cast<std::size_t>(i)]] = out(i);
  return PureState::from_masks(m, n, acc);
}

}  // namespace fermitele
