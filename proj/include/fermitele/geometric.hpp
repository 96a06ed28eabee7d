#pragma once

#include <cstdint>
#include <optional>

#include "fermitele/entanglement.hpp"

namespace fermitele {

enum class GeometricMode {
  kAuto,          // closed form when N or M-N is <= 2, optimizer otherwise
  kClosedTwoBody,
  kOptimize,
  kBruteOracle,
};

struct GeometricOptions {
  GeometricMode mode = GeometricMode::kAuto;
  int restarts = 32;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  int max_iterations = 2000;
};

/// Fock state apply_orbital_unitary(|occupied>, unitary): the columns of the
/// unitary listed in `occupied` are the filled orbitals.
struct FockWitness {
  OrbitalUnitary unitary = OrbitalUnitary::identity(1);
  SlaterDeterminant occupied;
};

struct GeometricResult {
  double value = 0.0;
  double overlap = 0.0;  // max |<Fock|Psi>|^2 found
  FockWitness witness;
  bool converged = true;
  int best_restart = 0;
};

/// E_G = <Psi|Psi> - max |<Fock|Psi>|^2. The state must be normalized to 1e-9.
GeometricResult geometric_entanglement(const PureState& state, const GeometricOptions& options = {});

/// The Fock state described by a witness.
PureState witness_state(const FockWitness& witness, std::size_t num_orbitals);

struct BruteForceResult {
  bool conclusive = false;
  double value = 0.0;   // meaningful only when conclusive
  double best = 0.0;    // best E_G seen, even if inconclusive
  int agreeing_restarts = 0;
};

struct BruteForceBudget {
  int restarts = 200;
  int max_sweeps = 20000;
  std::uint64_t seed = 12345;
};

/// Independent orbital-by-orbital search, for test use. Requires M <= 6, N <= 3.
BruteForceResult brute_force_closest_fock(const PureState& state, const BruteForceBudget& budget = {});

struct FockDecomposition {
  double alpha_prime = 0.0;
  Vector s_orbital;          // unit vector orthogonal to orbital e (zero if unused)
  double s_coefficient = 0.0;
  Matrix residual_columns;   // M x (N-1)
  Complex phase{1.0, 0.0};   // original = phase * factored form
};

/// Writes prod_k c†_{C_k}|0> as (a' c†_e + s c†_s) c†_{r_1}...c†_{r_{N-1}}|0>
/// with a' >= 0 and c_s orthogonal to c_e.
FockDecomposition fock_decompose_wrt_orbital(const Matrix& occupied_columns, std::size_t e);

/// prod_k c†_{columns_k}|0>, first column leftmost.
PureState slater_from_columns(const Matrix& columns);

}  // namespace fermitele
