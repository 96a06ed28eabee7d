#include "fermitele/entanglement.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <unordered_map>

namespace fermitele {

namespace {

bool basis_less(SlaterDeterminant x, SlaterDeterminant y) {
  int cx = x.count();
  int cy = y.count();
  if (cx != cy) return cx < cy;
  return x.mask() < y.mask();
}

}  // namespace

std::vector<SlaterDeterminant> side_basis(std::uint64_t side_mask) {
  std::vector<SlaterDeterminant> out;
  if (std::popcount(side_mask) > 20) {
    throw std::invalid_argument("side too large for a dense Fock basis");
  }
  // Enumerate submasks of side_mask.
  std::uint64_t sub = 0;
  do {
    out.emplace_back(sub);
    sub = (sub - side_mask) & side_mask;
  } while (sub != 0);
  std::sort(out.begin(), out.end(), basis_less);
  return out;
}

Matrix ModeDensityMatrix::full(std::uint64_t side_mask) const {
  auto all = side_basis(side_mask);
  const auto n = static_cast<Eigen::Index>(all.size());
  std::vector<Eigen::Index> where(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    auto it = std::lower_bound(all.begin(), all.end(), basis[i], basis_less);
    if (it == all.end() || *it != basis[i]) {
      throw std::invalid_argument("sub-determinant outside the given side");
    }
    where[i] = it - all.begin();
  }
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      out(where[i], where[j]) =
          matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

ModeDensityMatrix mode_rdm(const PureState& state, const OrbitalPartition& partition) {
  if (partition.num_orbitals() != state.num_orbitals()) {
    throw std::invalid_argument("partition and state disagree on M");
  }
  // Group signed amplitudes by the traced-out B configuration.
  std::map<std::uint64_t, std::vector<std::pair<SlaterDeterminant, Complex>>> by_b;
  std::vector<SlaterDeterminant> basis;
  for (const auto& [det, amp] : state.terms()) {
    SplitDeterminant s = split_determinant(det, partition);
    by_b[s.b.mask()].emplace_back(s.a, amp * double(s.sign));
    basis.push_back(s.a);
  }
  std::sort(basis.begin(), basis.end(), basis_less);
  basis.erase(std::unique(basis.begin(), basis.end()), basis.end());

  std::unordered_map<std::uint64_t, Eigen::Index> index;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    index[basis[i].mask()] = static_cast<Eigen::Index>(i);
  }

  ModeDensityMatrix out;
  out.basis = basis;
  const auto n = static_cast<Eigen::Index>(basis.size());
  out.matrix = Matrix::Zero(n, n);
  for (const auto& [b, block] : by_b) {
    for (const auto& [a1, v1] : block) {
      for (const auto& [a2, v2] : block) {
        out.matrix(index[a1.mask()], index[a2.mask()]) += v1 * std::conj(v2);
      }
    }
  }
  return out;
}

double mode_entropy(const PureState& state, const OrbitalPartition& partition) {
  return linear_entropy(mode_rdm(state, partition).matrix);
}

Matrix transition_one_body(const PureState& bra, const PureState& ket) {
  const std::size_t m = ket.num_orbitals();
  if (bra.num_orbitals() != m) throw std::invalid_argument("orbital count mismatch");
  // <bra| c†_m c_n |ket> = <c_m bra | c_n ket>.
  std::vector<PureState> lowered_bra;
  std::vector<PureState> lowered_ket;
  lowered_bra.reserve(m);
  lowered_ket.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    lowered_bra.push_back(state_apply_annihilation(bra, k));
    lowered_ket.push_back(state_apply_annihilation(ket, k));
  }
  const auto n = static_cast<Eigen::Index>(m);
  Matrix t = Matrix::Zero(n, n);
  for (std::size_t r = 0; r < m; ++r) {
    if (lowered_bra[r].is_zero()) continue;
    for (std::size_t c = 0; c < m; ++c) {
      if (lowered_ket[c].is_zero()) continue;
      t(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          inner_product(lowered_bra[r], lowered_ket[c]);
    }
  }
  return t;
}

Matrix one_particle_rdm(const PureState& state) {
  // rho_ij = <c†_j c_i> = T_ji.
  return transition_one_body(state, state).transpose();
}

double particle_entropy(const PureState& state) {
  double norm = state.norm_squared();
  if (norm <= 0.0) throw std::domain_error("particle entropy of the zero state");
  Matrix rho = one_particle_rdm(state);
  return rho.trace().real() - rho.squaredNorm() / norm;
}

}  // namespace fermitele
