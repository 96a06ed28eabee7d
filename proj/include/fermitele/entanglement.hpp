#pragma once

#include <vector>

#include "fermitele/fock.hpp"
#include "fermitele/linalg.hpp"

namespace fermitele {

/// Reduced density matrix of one side of an orbital partition.
struct ModeDensityMatrix {
  /// Sub-determinants on the kept side, sorted by (popcount, mask).
  std::vector<SlaterDeterminant> basis;
  Matrix matrix;

  /// Embeds the matrix in the full 2^|side| Fock basis of the side, same
  /// (popcount, mask) ordering. Entries for unreachable sub-determinants are 0.
  Matrix full(std::uint64_t side_mask) const;
};

/// Partial trace over side B of the partition: rho_A.
ModeDensityMatrix mode_rdm(const PureState& state, const OrbitalPartition& partition);

/// Every sub-determinant of `side_mask`, sorted by (popcount, mask).
std::vector<SlaterDeterminant> side_basis(std::uint64_t side_mask);

/// Linear entropy of rho_A for the given partition.
double mode_entropy(const PureState& state, const OrbitalPartition& partition);

/// rho_ij = <Psi| c†_j c_i |Psi>. Not normalized.
Matrix one_particle_rdm(const PureState& state);

/// T_mn = <bra| c†_m c_n |ket>.
Matrix transition_one_body(const PureState& bra, const PureState& ket);

/// <Psi|Psi> * S[rho / <Psi|Psi>]. Throws std::domain_error for the zero state.
double particle_entropy(const PureState& state);

}  // namespace fermitele
