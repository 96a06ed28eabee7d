#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fermitele/fock.hpp"

namespace fermitele {

enum class Aggregate { kPerOrbital, kTotal };

/// One component of a classical outcome: `count` electrons found in `orbitals`.
/// For spin measurements `axis` names the quantization axis (else empty).
struct OutcomeEntry {
  std::vector<std::size_t> orbitals;
  int count = 0;
  std::string axis;

  bool operator==(const OutcomeEntry&) const = default;
};

using OutcomeLabel = std::vector<OutcomeEntry>;

using OrbitalNamer = std::function<std::string(std::size_t)>;

/// "2=1,3=0" style text; orbital names come from `namer` when given.
std::string format_label(const OutcomeLabel& label, const OrbitalNamer& namer = {});

struct Branch {
  OutcomeLabel label;
  double probability = 1.0;
  PureState post_state{1};
  std::vector<std::string> history;
  std::vector<std::string> corrections;
};

/// Projective occupation measurement. Branches are ordered lexicographically by
/// their counts (orbitals ascending); zero-probability outcomes are omitted.
std::vector<Branch> measure_occupation(const PureState& state, std::span<const std::size_t> orbitals,
                                       Aggregate aggregate);

/// Rotates `orbitals` by the k x k block whose columns are the new orbitals
/// (expressed in the listed orbitals), then measures each new orbital. The
/// post-states stay in the rotated basis, and `axis_names[i]` tags entry i.
std::vector<Branch> measure_in_local_basis(const PureState& state, std::span<const std::size_t> orbitals,
                                           const Matrix& columns,
                                           const std::vector<std::string>& axis_names);

/// Unit spin direction; the named axes are relative to the pair's own
/// quantization frame.
struct SpinAxis {
  double theta = 0.0;
  double phi = 0.0;
  std::string name = "z";

  static SpinAxis x();
  static SpinAxis y();
  static SpinAxis z();
  /// Accepts "x", "y", "z", or "theta,phi" in radians.
  static SpinAxis parse(const std::string& text);
};

/// 2x2 block whose columns are the up/down eigenspinors along the axis,
/// components ordered (up, dn).
Matrix spin_eigenbasis(const SpinAxis& axis);

/// Spin measurement on the pair (up, dn). The post-state holds the pair in
/// the axis eigenbasis: index `up` is the spin-up-along-axis orbital.
std::vector<Branch> measure_spin_axis(const PureState& state, std::size_t up, std::size_t dn,
                                      const SpinAxis& axis);

/// exp(-i angle sigma.n / 2) on the (up, dn) pair, identity elsewhere.
OrbitalUnitary spin_rotation(std::size_t num_orbitals, std::size_t up, std::size_t dn,
                             const SpinAxis& axis, double angle);

/// Applies a receiver-side unitary. Throws std::invalid_argument if it acts on
/// an orbital named in the branch's outcome label.
Branch apply_correction(const Branch& branch, const OrbitalUnitary& correction,
                        const std::string& description = "unitary");

enum class Encoding { kParticle, kHole };

struct FidelityResult {
  double fidelity = 0.0;
  std::string diagnostic;
};

/// |<target|post>|^2 where the target holds a*op(first) + b*op(second) on the
/// pair (op = c† for particles, c for holes) times the definite configuration
/// of every other orbital.
FidelityResult teleport_fidelity(const Branch& branch, std::size_t first, std::size_t second,
                                 Complex a, Complex b, Encoding encoding = Encoding::kParticle);

// ---------------------------------------------------------------------------
// Measurement inequality

struct InequalitySample {
  std::size_t e = 0;
  PureState psi_e{1};  // N-1 electrons, no support on e
  PureState psi_s{1};  // N electrons, no support on e
  double alpha = 0.5;
  double theta = 0.0;
};

enum class InequalityMeasure { kEntropy, kGeometric };

struct InequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double slack = 0.0;       // lhs - rhs
  bool inconclusive = false;  // oracle could not certify a geometric value
};

inline constexpr double kEntropyInequalityTol = 1e-9;
inline constexpr double kGeometricInequalityTol = 1e-6;

/// The combined state sqrt(a) e^{i theta} c†_e|psi_e> + sqrt(1-a)|psi_s>, with
/// both parts normalized first.
PureState inequality_initial_state(const InequalitySample& sample);

InequalityResult check_measurement_inequality(const InequalitySample& sample, InequalityMeasure measure);

struct BetaBound {
  double beta = 0.0;
  double bound = 0.0;  // rho^s_ss (1 - rho^e_ss)
  bool holds = true;
};

BetaBound check_beta_bound(const InequalitySample& sample);

/// Complex-Gaussian amplitudes over the N-electron sector, normalized.
PureState random_state(std::size_t num_orbitals, int electrons, std::uint64_t seed,
                       std::optional<std::size_t> exclude_orbital = std::nullopt);

/// Random sample with N electrons in the combined state, seeded.
InequalitySample random_inequality_sample(std::size_t num_orbitals, int electrons, std::uint64_t seed);

}  // namespace fermitele
