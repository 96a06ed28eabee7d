#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fermitele/dynamics.hpp"
#include "fermitele/geometric.hpp"
#include "fermitele/measurement.hpp"

namespace fermitele {

// Orbital index maps of the three schemes.
namespace h2 {
inline constexpr std::size_t kADn = 0, kAUp = 1, kBDn = 2, kBUp = 3;
inline constexpr std::size_t kNumOrbitals = 4;
}  // namespace h2

namespace nv {
inline constexpr std::size_t k0Dn = 0, k0Up = 1, k1Dn = 2, k1Up = 3, kM1Dn = 4, kM1Up = 5, kNDn = 6, kNUp = 7;
inline constexpr std::size_t kNumOrbitals = 8;
}  // namespace nv

namespace qdot {
inline constexpr std::size_t k1Up = 0, k1Dn = 1, k2Up = 2, k2Dn = 3, k3Up = 4, k3Dn = 5;
inline constexpr std::size_t kNumOrbitals = 6;
}  // namespace qdot

struct StageReport {
  std::string label;
  double particle_entropy = 0.0;
  double geometric = 0.0;
  bool geometric_converged = true;
  std::vector<std::pair<std::string, double>> mode_entropies;
};

struct BranchReport {
  std::string label;
  double probability = 0.0;
  std::string correction;  // "identity", "rotate AXIS ANGLE", or "none"
  double fidelity = 0.0;
  std::string diagnostic;
};

struct ProtocolReport {
  std::string name;
  std::vector<StageReport> stages;
  std::vector<BranchReport> branches;
  double success_probability = 0.0;
  double nominal_success = 1.0;
  std::vector<std::string> notes;

  // Raw states, for callers that want to inspect them.
  std::vector<PureState> stage_states;
  std::vector<Branch> corrected_branches;
};

/// Evaluates both particle measures and the listed mode cuts of a state.
StageReport evaluate_stage(const std::string& label, const PureState& state,
                           const std::vector<std::pair<std::string, OrbitalPartition>>& cuts,
                           const GeometricOptions& options = {});

void check_qubit(Complex a, Complex b);

// H2 molecule --------------------------------------------------------------

PureState h2_resource_state();                       // (c†_{A dn} + c†_{B dn})/sqrt2 |0>
PureState h2_injected_state(Complex a, Complex b);   // (a c†_{A up} + b c†_{B up})|0>
PureState h2_combined_state(Complex a, Complex b);
ProtocolReport run_h2_protocol(Complex a, Complex b);

// NV0 centre ---------------------------------------------------------------

PureState nv_bell_pair();
PureState nv_combined_state(Complex a, Complex b);
/// The (a, b)-dependent spin-flip step as an orbital unitary.
OrbitalUnitary nv_spin_flip_unitary(Complex a, Complex b);
/// Columns of the Alice-side measurement orbitals (f+, f-, g+, g-) placed on
/// the C m_l = +-1 slots.
Matrix nv_measurement_block();
ProtocolReport run_nv_protocol(Complex a, Complex b);

// Quantum-dot array ---------------------------------------------------------

struct ResourcePreparation {
  PureState state{qdot::kNumOrbitals};
  double probability = 0.0;
};

enum class ResourceMode { kConditionalTunneling };

ResourcePreparation resource_preparation_qdot(ResourceMode mode = ResourceMode::kConditionalTunneling);
PureState qdot_combined_state(const PureState& resource, Complex alpha, Complex beta);
/// Bonding/anti-bonding orbitals of dots 1 and 2 as columns (a up, a dn, b up, b dn, 3 up, 3 dn).
Matrix qdot_bonding_columns();
DensityInteraction qdot_conditional_hopping(double u);
ProtocolReport run_qdot_protocol(Complex alpha, Complex beta, double u);

}  // namespace fermitele
