#include "fermitele/fock.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

namespace fermitele {

namespace {

std::uint64_t bit(std::size_t k) { return std::uint64_t{1} << k; }

std::uint64_t below(std::size_t k) { return bit(k) - 1; }

int parity_sign(std::uint64_t mask) { return (std::popcount(mask) & 1) ? -1 : 1; }

std::uint64_t full_mask(std::size_t num_orbitals) {
  return num_orbitals >= 64 ? ~std::uint64_t{0} : bit(num_orbitals) - 1;
}

void check_orbital(std::size_t k, std::size_t num_orbitals) {
  if (k >= num_orbitals) {
    std::ostringstream msg;
    msg << "orbital index " << k << " out of range [0, " << num_orbitals << ")";
    throw std::out_of_range(msg.str());
  }
}

void check_num_orbitals(std::size_t num_orbitals) {
  if (num_orbitals == 0 || num_orbitals > kMaxOrbitals) {
    throw std::invalid_argument("number of orbitals must be in [1, 64]");
  }
}

}  // namespace

SlaterDeterminant SlaterDeterminant::from_orbitals(std::span<const std::size_t> orbitals) {
  std::uint64_t mask = 0;
  for (std::size_t k : orbitals) {
    if (k >= kMaxOrbitals) throw std::invalid_argument("orbital index exceeds 63");
    if (mask & bit(k)) throw std::invalid_argument("duplicate orbital in determinant");
    mask |= bit(k);
  }
  return SlaterDeterminant(mask);
}

SlaterDeterminant SlaterDeterminant::from_orbitals(std::initializer_list<std::size_t> orbitals) {
  return from_orbitals(std::span<const std::size_t>(orbitals.begin(), orbitals.size()));
}

int SlaterDeterminant::count() const { return std::popcount(mask_); }

std::vector<std::size_t> SlaterDeterminant::orbitals() const {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(count()));
  for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
  }
  return out;
}

std::optional<SignedDeterminant> det_create(SlaterDeterminant det, std::size_t k,
                                            std::size_t num_orbitals) {
  check_orbital(k, num_orbitals);
  if (det.occupied(k)) return std::nullopt;
  return SignedDeterminant{SlaterDeterminant(det.mask() | bit(k)),
                           parity_sign(det.mask() & below(k))};
}

std::optional<SignedDeterminant> det_annihilate(SlaterDeterminant det, std::size_t k,
                                                std::size_t num_orbitals) {
  check_orbital(k, num_orbitals);
  if (!det.occupied(k)) return std::nullopt;
  return SignedDeterminant{SlaterDeterminant(det.mask() & ~bit(k)),
                           parity_sign(det.mask() & below(k))};
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(std::size_t num_orbitals, std::optional<int> electrons)
    : num_orbitals_(num_orbitals), electrons_(electrons) {
  check_num_orbitals(num_orbitals);
  if (electrons && (*electrons < 0 || *electrons > static_cast<int>(num_orbitals))) {
    throw std::invalid_argument("electron count outside [0, M]");
  }
}

PureState PureState::vacuum(std::size_t num_orbitals) {
  return determinant(num_orbitals, SlaterDeterminant{});
}

PureState PureState::determinant(std::size_t num_orbitals, SlaterDeterminant det,
                                 Complex amplitude) {
  PureState out(num_orbitals, det.count());
  out.add(det, amplitude);
  return out;
}

PureState PureState::from_masks(std::size_t num_orbitals, std::optional<int> electrons,
                                const std::map<std::uint64_t, Complex>& amplitudes) {
  PureState out(num_orbitals, electrons);
  for (const auto& [mask, amp] : amplitudes) {
    if (std::abs(amp) <= kDropTolerance) continue;
    SlaterDeterminant det(mask);
    out.check_determinant(det);
    out.terms_.emplace(det, amp);
  }
  return out;
}

void PureState::check_determinant(SlaterDeterminant det) {
  if ((det.mask() & ~full_mask(num_orbitals_)) != 0) {
    throw std::out_of_range("determinant occupies orbitals beyond the state's M");
  }
  if (!electrons_) {
    electrons_ = det.count();
  } else if (*electrons_ != det.count()) {
    throw std::invalid_argument("determinant electron count differs from the state's");
  }
}

Complex PureState::amplitude(SlaterDeterminant det) const {
  auto it = terms_.find(det);
  return it == terms_.end() ? Complex{} : it->second;
}

double PureState::norm_squared() const {
  double sum = 0.0;
  for (const auto& [det, amp] : terms_) sum += std::norm(amp);
  return sum;
}

void PureState::add(SlaterDeterminant det, Complex amplitude) {
  check_determinant(det);
  Complex& slot = terms_[det];
  slot += amplitude;
  if (std::abs(slot) <= kDropTolerance) terms_.erase(det);
}

PureState PureState::scaled(Complex factor) const {
  PureState out(num_orbitals_, electrons_);
  for (const auto& [det, amp] : terms_) {
    Complex v = amp * factor;
    if (std::abs(v) > kDropTolerance) out.terms_.emplace(det, v);
  }
  return out;
}

PureState PureState::normalized() const {
  double n = norm_squared();
  if (n <= 0.0) throw std::domain_error("cannot normalize the zero state");
  return scaled(1.0 / std::sqrt(n));
}

PureState PureState::operator+(const PureState& other) const {
  if (other.num_orbitals_ != num_orbitals_) {
    throw std::invalid_argument("orbital count mismatch in state sum");
  }
  PureState out = *this;
  for (const auto& [det, amp] : other.terms_) out.add(det, amp);
  return out;
}

// ---------------------------------------------------------------------------
// OrbitalUnitary

OrbitalUnitary::OrbitalUnitary(Matrix matrix, double tolerance) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("orbital unitary must be a non-empty square matrix");
  }
  check_num_orbitals(static_cast<std::size_t>(matrix_.rows()));
  Matrix gram = matrix_.adjoint() * matrix_;
  Matrix diff = gram - Matrix::Identity(matrix_.rows(), matrix_.cols());
  if (diff.cwiseAbs().maxCoeff() > tolerance) {
    std::ostringstream msg;
    msg << "matrix is not unitary (max |U†U - 1| = " << diff.cwiseAbs().maxCoeff() << ")";
    throw std::invalid_argument(msg.str());
  }
}

OrbitalUnitary OrbitalUnitary::identity(std::size_t dim) {
  return OrbitalUnitary(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                         static_cast<Eigen::Index>(dim)));
}

OrbitalUnitary OrbitalUnitary::from_orbital_columns(const Matrix& columns) {
  return OrbitalUnitary(columns.adjoint());
}

OrbitalUnitary OrbitalUnitary::embed(std::size_t dim, std::span<const std::size_t> orbitals,
                                     const Matrix& block) {
  if (static_cast<std::size_t>(block.rows()) != orbitals.size() ||
      block.rows() != block.cols()) {
    throw std::invalid_argument("block size does not match orbital list");
  }
  Matrix full = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < orbitals.size(); ++r) {
    check_orbital(orbitals[r], dim);
    for (std::size_t c = 0; c < orbitals.size(); ++c) {
      full(static_cast<Eigen::Index>(orbitals[r]), static_cast<Eigen::Index>(orbitals[c])) =
          block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return OrbitalUnitary(std::move(full));
}

OrbitalUnitary OrbitalUnitary::adjoint() const { return OrbitalUnitary(matrix_.adjoint()); }

OrbitalUnitary OrbitalUnitary::operator*(const OrbitalUnitary& rhs) const {
  if (rhs.dim() != dim()) throw std::invalid_argument("orbital unitary dimension mismatch");
  return OrbitalUnitary(matrix_ * rhs.matrix_);
}

std::vector<std::size_t> OrbitalUnitary::support(double tolerance) const {
  std::vector<std::size_t> out;
  const Eigen::Index n = matrix_.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    bool trivial = true;
    for (Eigen::Index j = 0; j < n && trivial; ++j) {
      Complex id = (j == k) ? 1.0 : 0.0;
      if (std::abs(matrix_(j, k) - id) > tolerance || std::abs(matrix_(k, j) - id) > tolerance) {
        trivial = false;
      }
    }
    if (!trivial) out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// OrbitalPartition

OrbitalPartition::OrbitalPartition(std::size_t num_orbitals, std::uint64_t mask_a)
    : num_orbitals_(num_orbitals), mask_a_(mask_a) {}

OrbitalPartition::OrbitalPartition(std::size_t num_orbitals, std::span<const std::size_t> side_a)
    : num_orbitals_(num_orbitals), mask_a_(0) {
  check_num_orbitals(num_orbitals);
  for (std::size_t k : side_a) {
    check_orbital(k, num_orbitals);
    mask_a_ |= bit(k);
  }
}

OrbitalPartition::OrbitalPartition(std::size_t num_orbitals,
                                   std::initializer_list<std::size_t> side_a)
    : OrbitalPartition(num_orbitals, std::span<const std::size_t>(side_a.begin(), side_a.size())) {}

std::uint64_t OrbitalPartition::mask_b() const { return full_mask(num_orbitals_) & ~mask_a_; }

OrbitalPartition OrbitalPartition::swapped() const { return OrbitalPartition(num_orbitals_, mask_b()); }

SplitDeterminant split_determinant(SlaterDeterminant det, const OrbitalPartition& partition) {
  const std::uint64_t a = det.mask() & partition.mask_a();
  const std::uint64_t b = det.mask() & ~partition.mask_a();
  // Each B operator has to move right past every A operator with a larger index.
  int transpositions = 0;
  for (std::uint64_t m = a; m != 0; m &= m - 1) {
    transpositions += std::popcount(b & below(static_cast<std::size_t>(std::countr_zero(m))));
  }
  return {SlaterDeterminant(a), SlaterDeterminant(b), (transpositions & 1) ? -1 : 1};
}

// ---------------------------------------------------------------------------
// State-level operators

PureState filled_state(std::size_t num_orbitals) {
  check_num_orbitals(num_orbitals);
  return PureState::determinant(num_orbitals, SlaterDeterminant(full_mask(num_orbitals)));
}

namespace {

std::optional<int> shifted(std::optional<int> electrons, int delta) {
  if (!electrons) return std::nullopt;
  return *electrons + delta;
}

template <typename Op>
PureState apply_single(const PureState& state, std::size_t k, int delta, Op op) {
  check_orbital(k, state.num_orbitals());
  auto n = shifted(state.electron_count(), delta);
  if (n && (*n < 0 || *n > static_cast<int>(state.num_orbitals()))) {
    // c|vacuum> or c†|filled>: always the zero state.
    return PureState(state.num_orbitals(), std::nullopt);
  }
  std::map<std::uint64_t, Complex> acc;
  for (const auto& [det, amp] : state.terms()) {
    if (auto r = op(det, k, state.num_orbitals())) acc[r->det.mask()] += amp * double(r->sign);
  }
  return PureState::from_masks(state.num_orbitals(), n, acc);
}

template <typename Op>
PureState apply_combination(const PureState& state, std::span<const Complex> coeffs, int delta,
                            Op op) {
  const std::size_t m = state.num_orbitals();
  if (coeffs.size() != m) throw std::invalid_argument("coefficient vector length must equal M");
  auto n = shifted(state.electron_count(), delta);
  if (n && (*n < 0 || *n > static_cast<int>(m))) return PureState(m, std::nullopt);
  std::map<std::uint64_t, Complex> acc;
  for (const auto& [det, amp] : state.terms()) {
    for (std::size_t k = 0; k < m; ++k) {
      if (coeffs[k] == Complex{}) continue;
      if (auto r = op(det, k, m)) acc[r->det.mask()] += coeffs[k] * amp * double(r->sign);
    }
  }
  return PureState::from_masks(m, n, acc);
}

}  // namespace

PureState state_apply_creation(const PureState& state, std::size_t k) {
  return apply_single(state, k, +1, det_create);
}

PureState state_apply_annihilation(const PureState& state, std::size_t k) {
  return apply_single(state, k, -1, det_annihilate);
}

PureState create_orbital(const PureState& state, std::span<const Complex> coeffs) {
  return apply_combination(state, coeffs, +1, det_create);
}

PureState annihilate_orbital(const PureState& state, std::span<const Complex> coeffs) {
  // c_phi = sum_k conj(phi_k) c_k is the adjoint of create_orbital(phi); callers
  // pass the coefficients of the annihilators directly.
  return apply_combination(state, coeffs, -1, det_annihilate);
}

PureState apply_creation_string(const PureState& state, std::span<const std::size_t> orbitals) {
  PureState out = state;
  for (auto it = orbitals.rbegin(); it != orbitals.rend(); ++it) {
    out = state_apply_creation(out, *it);
  }
  return out;
}

PureState apply_annihilation_string(const PureState& state,
                                    std::span<const std::size_t> orbitals) {
  PureState out = state;
  for (auto it = orbitals.rbegin(); it != orbitals.rend(); ++it) {
    out = state_apply_annihilation(out, *it);
  }
  return out;
}

Complex inner_product(const PureState& bra, const PureState& ket) {
  if (bra.num_orbitals() != ket.num_orbitals()) {
    throw std::invalid_argument("inner product of states with different orbital counts");
  }
  const PureState& small = bra.size() <= ket.size() ? bra : ket;
  const PureState& large = bra.size() <= ket.size() ? ket : bra;
  Complex sum{};
  for (const auto& [det, amp] : small.terms()) {
    auto it = large.terms().find(det);
    if (it == large.terms().end()) continue;
    sum += (&small == &bra) ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return sum;
}

PureState apply_orbital_unitary(const PureState& state, const OrbitalUnitary& unitary) {
  const std::size_t m = state.num_orbitals();
  if (unitary.dim() != m) throw std::invalid_argument("unitary dimension differs from M");
  const Matrix& u = unitary.matrix();

  // Column sparsity pattern, so local unitaries stay cheap.
  std::vector<std::vector<std::pair<std::size_t, Complex>>> columns(m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      Complex v = u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      if (v != Complex{}) columns[k].emplace_back(j, v);
    }
  }

  std::map<std::uint64_t, Complex> acc;
  std::map<std::uint64_t, Complex> current;
  std::map<std::uint64_t, Complex> next;
  for (const auto& [det, amp] : state.terms()) {
    current.clear();
    current[0] = amp;
    const auto occ = det.orbitals();
    // c†_{i1} ... c†_{iN}|0>: the rightmost operator acts first.
    for (auto it = occ.rbegin(); it != occ.rend(); ++it) {
      next.clear();
      for (const auto& [mask, coeff] : current) {
        for (const auto& [j, v] : columns[*it]) {
          if (mask & bit(j)) continue;
          next[mask | bit(j)] += coeff * v * double(parity_sign(mask & below(j)));
        }
      }
      current.swap(next);
    }
    for (const auto& [mask, coeff] : current) acc[mask] += coeff;
  }
  return PureState::from_masks(m, state.electron_count(), acc);
}

}  // namespace fermitele
