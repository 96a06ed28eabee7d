#pragma once

#include <optional>
#include <vector>

#include "fermitele/fock.hpp"

namespace fermitele {

/// Sign of the evolution exponent. kPositiveExponent uses e^{+iHt}; kNegativeExponent e^{-iHt}.
enum class PhaseConvention { kPositiveExponent, kNegativeExponent };

void set_phase_convention(PhaseConvention convention);
PhaseConvention phase_convention();

/// +1 for kPositiveExponent, -1 for kNegativeExponent.
double phase_sign();

/// Occupation-product term E * n_{i1} n_{i2} ... (orbitals distinct, size >= 2).
struct DensityTerm {
  std::vector<std::size_t> orbitals;
  double energy = 0.0;
};

struct DensityInteraction {
  std::vector<DensityTerm> terms;
  /// Columns are the orbitals (in the working basis) in which the terms are
  /// diagonal. Absent means the working basis itself.
  std::optional<Matrix> orbital_columns;

  void validate(std::size_t num_orbitals) const;
};

/// Orbital-space propagator W = exp(+-i H t).
OrbitalUnitary one_body_propagator(const Matrix& h1, double t);

PureState evolve_one_body(const PureState& state, const Matrix& h1, double t);

PureState evolve_density_density(const PureState& state, const DensityInteraction& v, double t);

/// (W1(t/M) W2(t/M))^M: each step applies the interaction phases first.
PureState trotter_evolve(const PureState& state, const Matrix& h1, const DensityInteraction& v,
                         double t, int steps);

inline constexpr std::size_t kDenseOracleCap = 4096;

/// Exact exponential of the full many-body Hamiltonian in the fixed-N sector.
PureState dense_evolution_oracle(const PureState& state, const Matrix& h1,
                                 const DensityInteraction& v, double t);

}  // namespace fermitele
