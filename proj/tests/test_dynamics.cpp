#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fermitele/dynamics.hpp"
#include "fermitele/entanglement.hpp"
#include "fermitele/geometric.hpp"
#include "fermitele/linalg.hpp"
#include "fermitele/measurement.hpp"
#include "fermitele/protocols.hpp"
#include "oracles.hpp"

using namespace fermitele;
using std::numbers::pi;

namespace {

SlaterDeterminant dets(std::initializer_list<std::size_t> o) { return SlaterDeterminant::from_orbitals(o); }

double max_diff(const PureState& x, const PureState& y) {
  double d = 0.0;
  for (const auto& [det, amp] : x.terms()) d = std::max(d, std::abs(amp - y.amplitude(det)));
  for (const auto& [det, amp] : y.terms()) d = std::max(d, std::abs(amp - x.amplitude(det)));
  return d;
}

double distance(const PureState& x, const PureState& y) { return (oracle::dense(x) - oracle::dense(y)).norm(); }

// Two sites, 1u=0 1d=1 2u=2 2d=3.
DensityInteraction onsite(double u) { return {{{{0, 1}, u}, {{2, 3}, u}}, std::nullopt}; }

// a = (1 + 2)/sqrt2, b = (1 - 2)/sqrt2 per spin; columns a_u a_d b_u b_d.
Matrix bonding() {
  const double h = 1.0 / std::sqrt(2.0);
  Matrix c = Matrix::Zero(4, 4);
  c(0, 0) = h;
  c(2, 0) = h;
  c(1, 1) = h;
  c(3, 1) = h;
  c(0, 2) = h;
  c(2, 2) = -h;
  c(1, 3) = h;
  c(3, 3) = -h;
  return c;
}

PureState minimal_start() {
  Matrix c = bonding();
  Matrix occ(4, 2);
  occ.col(0) = c.col(0);
  occ.col(1) = c.col(3);
  return slater_from_columns(occ);
}

Matrix hopping(double j) {
  Matrix h = Matrix::Zero(4, 4);
  h(0, 2) = h(2, 0) = -j;
  h(1, 3) = h(3, 1) = -j;
  return h;
}

struct ConventionGuard {
  ~ConventionGuard() { set_phase_convention(PhaseConvention::kPositiveExponent); }
};

}  // namespace

TEST_CASE("zero Hamiltonian is the identity") {
  PureState s = random_state(5, 2, 4);
  CHECK(max_diff(evolve_one_body(s, Matrix::Zero(5, 5), 3.0), s) < 1e-15);
  CHECK(max_diff(evolve_density_density(s, {}, 3.0), s) < 1e-15);
}

TEST_CASE("a sigma_y coupling at t = pi/2 is the spin-x basis change") {
  ConventionGuard guard;
  Matrix h = Matrix::Zero(4, 4);
  // -sigma_y / 2 on each (up, dn) pair
  for (int s = 0; s < 2; ++s) {
    h(2 * s, 2 * s + 1) = Complex(0, 0.5);
    h(2 * s + 1, 2 * s) = Complex(0, -0.5);
  }
  PureState start = PureState::determinant(4, dets({0, 2}));
  const double r = 0.5;
  PureState expect(4, 2);
  expect.add(dets({0, 2}), r);
  expect.add(dets({0, 3}), r);
  expect.add(dets({1, 2}), r);
  expect.add(dets({1, 3}), r);
  CHECK(max_diff(evolve_one_body(start, h, pi / 2), expect) < 1e-14);

  set_phase_convention(PhaseConvention::kNegativeExponent);
  CHECK(phase_sign() == -1.0);
  CHECK(max_diff(evolve_one_body(start, Matrix(-h), pi / 2), expect) < 1e-14);
}

TEST_CASE("non-hermitian one-body input is rejected") {
  Matrix h = Matrix::Zero(3, 3);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(evolve_one_body(random_state(3, 1, 0), h, 1.0), std::invalid_argument);
}

TEST_CASE("evolutions preserve norm and electron count") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    PureState s = random_state(6, 3, 60 + trial);
    Matrix h = random_hermitian(6, rng);
    PureState e = evolve_one_body(s, h, 0.7 * trial);
    CHECK(std::abs(e.norm_squared() - 1.0) < 1e-10);
    CHECK(e.electron_count() == 3);
    DensityInteraction v{{{{0, 3}, 0.4}, {{1, 2, 5}, -1.3}}, haar_unitary(6, rng)};
    PureState d = evolve_density_density(s, v, 1.1 * trial);
    CHECK(std::abs(d.norm_squared() - 1.0) < 1e-10);
    CHECK(d.electron_count() == 3);
    CHECK(std::abs(particle_entropy(e) - particle_entropy(s)) < 1e-10);
  }
}

TEST_CASE("minimal model amplitudes") {
  const double u = 1.7;
  for (double t : {0.0, 0.3, pi / (2 * u), 1.4}) {
    PureState evolved = evolve_density_density(minimal_start(), onsite(u), t);
    PureState in_ab = apply_orbital_unitary(evolved, OrbitalUnitary::from_orbital_columns(bonding()));
    Complex e = std::exp(Complex(0, u * t));
    CHECK(std::abs(in_ab.amplitude(dets({0, 3})) - (e + 1.0) / 2.0) < 1e-12);
    CHECK(std::abs(in_ab.amplitude(dets({1, 2})) - (1.0 - e) / 2.0) < 1e-12);
  }
  PureState quarter = apply_orbital_unitary(evolve_density_density(minimal_start(), onsite(u), pi / (2 * u)),
                                            OrbitalUnitary::from_orbital_columns(bonding()));
  CHECK(std::abs(quarter.amplitude(dets({0, 3})) - Complex(0.5, 0.5)) < 1e-12);
  CHECK(std::abs(quarter.amplitude(dets({1, 2})) - Complex(0.5, -0.5)) < 1e-12);
}

TEST_CASE("minimal model entanglement trajectory") {
  const double u = 1.0;
  auto at = [&](double t) { return evolve_density_density(minimal_start(), onsite(u), t); };
  auto rho_a = [&](double t) {
    PureState ab = apply_orbital_unitary(at(t), OrbitalUnitary::from_orbital_columns(bonding()));
    return mode_entropy(ab, OrbitalPartition(4, {0, 1}));
  };
  CHECK(std::abs(rho_a(0.0)) < 1e-12);
  CHECK(std::abs(rho_a(pi / (2 * u)) - 0.5) < 1e-10);
  CHECK(std::abs(particle_entropy(at(pi / (2 * u))) - 1.0) < 1e-10);
  const double site0 = mode_entropy(at(0.0), OrbitalPartition(4, {0, 1}));
  for (int k = 0; k <= 20; ++k) {
    double t = pi / u * k / 20.0;
    CHECK(std::abs(mode_entropy(at(t), OrbitalPartition(4, {0, 1})) - site0) < 1e-10);
  }
}

TEST_CASE("an interaction eigen-determinant only picks up a phase") {
  PureState d = PureState::determinant(4, dets({0, 1}), Complex(0.6, 0.8));
  PureState e = evolve_density_density(d, onsite(2.0), 0.9);
  CHECK(std::abs(e.amplitude(dets({0, 1})) - Complex(0.6, 0.8) * std::exp(Complex(0, 1.8))) < 1e-14);
  CHECK(e.size() == 1);
}

TEST_CASE("interaction inside a partition keeps its mode entropy") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    PureState s = random_state(6, 3, 700 + trial);
    DensityInteraction v{{{{0, 1}, 1.3}, {{1, 2}, -0.4}, {{0, 1, 2}, 0.8}}, std::nullopt};
    PureState e = evolve_density_density(s, v, 0.5 + trial);
    OrbitalPartition p(6, {0, 1, 2});
    CHECK(std::abs(mode_entropy(e, p) - mode_entropy(s, p)) < 1e-10);
  }
}

TEST_CASE("quantum-dot conditional hopping gives the post-tunneling state") {
  Complex al(0.6, 0.0), be(0.3, std::sqrt(1 - 0.36 - 0.09));
  auto rep = run_qdot_protocol(al, be, 2.0);
  const PureState& tunneled = rep.stage_states.at(2);
  using namespace qdot;
  PureState expect(kNumOrbitals, 3);
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  expect.add(dets({k1Up, k1Dn, k3Up}), -0.5 * i * al);
  expect.add(dets({k1Up, k1Dn, k3Dn}), -0.5 * be);
  expect.add(dets({k2Up, k2Dn, k3Up}), -0.5 * al);
  expect.add(dets({k2Up, k2Dn, k3Dn}), -0.5 * i * be);
  expect.add(dets({k1Up, k2Up, k3Dn}), h * al);
  expect.add(dets({k1Dn, k2Dn, k3Up}), -h * be);
  CHECK(max_diff(tunneled, expect) < 1e-12);

  // Phases picked up by the four bonding-basis pairs.
  PureState combined = rep.stage_states.at(1);
  Matrix cols = qdot_bonding_columns();
  PureState before = apply_orbital_unitary(combined, OrbitalUnitary::from_orbital_columns(cols));
  PureState after = apply_orbital_unitary(tunneled, OrbitalUnitary::from_orbital_columns(cols));
  const std::vector<std::pair<std::vector<std::size_t>, double>> pairs{
      {{0, 1}, pi / 4}, {{2, 3}, -3 * pi / 4}, {{1, 2}, 3 * pi / 4}, {{0, 3}, -pi / 4}};
  for (const auto& [p, phase] : pairs) {
    for (std::size_t third : {std::size_t{4}, std::size_t{5}}) {
      SlaterDeterminant d = SlaterDeterminant::from_orbitals({p[0], p[1], third});
      Complex b = before.amplitude(d);
      if (std::abs(b) < 1e-12) continue;
      CHECK(std::abs(after.amplitude(d) / b - std::exp(Complex(0, phase))) < 1e-12);
    }
  }
}

TEST_CASE("qdot conditional hopping rejects non-positive U") {
  CHECK_THROWS_AS(qdot_conditional_hopping(0.0), std::invalid_argument);
  CHECK_THROWS_AS(run_qdot_protocol(1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("dense oracle agrees with the sparse evolutions") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    PureState s = random_state(5, 2, 800 + trial);
    Matrix h = random_hermitian(5, rng);
    CHECK(distance(dense_evolution_oracle(s, h, {}, 0.8), evolve_one_body(s, h, 0.8)) < 1e-10);
    DensityInteraction v{{{{0, 4}, 1.1}, {{2, 3}, -0.6}}, haar_unitary(5, rng)};
    CHECK(distance(dense_evolution_oracle(s, Matrix::Zero(5, 5), v, 1.3), evolve_density_density(s, v, 1.3)) < 1e-10);
    oracle::Vector ref = oracle::expi(oracle::hamiltonian(5, h, v), 0.6) * oracle::dense(s);
    CHECK((oracle::dense(dense_evolution_oracle(s, h, v, 0.6)) - ref).norm() < 1e-10);
  }
}

TEST_CASE("dense oracle enforces its dimension cap") {
  PureState big = PureState::determinant(16, SlaterDeterminant(0xFF));
  CHECK_THROWS(dense_evolution_oracle(big, Matrix::Zero(16, 16), {}, 1.0));
}

TEST_CASE("Trotter special cases") {
  std::mt19937_64 rng(15);
  PureState s = random_state(4, 2, 17);
  Matrix h = random_hermitian(4, rng);
  for (int steps : {1, 3, 10}) {
    CHECK(max_diff(trotter_evolve(s, h, {}, 0.9, steps), evolve_one_body(s, h, 0.9)) < 1e-10);
  }
  Matrix diag = Matrix::Zero(4, 4);
  diag(0, 0) = 0.3;
  diag(1, 1) = -1.2;
  diag(3, 3) = 0.7;
  PureState one = trotter_evolve(s, diag, onsite(1.5), 2.0, 1);
  for (int steps : {2, 7, 40}) CHECK(max_diff(trotter_evolve(s, diag, onsite(1.5), 2.0, steps), one) < 1e-10);
  CHECK_THROWS_AS(trotter_evolve(s, diag, onsite(1.0), 1.0, 0), std::invalid_argument);
}

TEST_CASE("Trotter error on the two-site Hubbard model shrinks like 1/steps") {
  PureState start = PureState::determinant(4, dets({0, 1}));
  const Matrix h = hopping(1.0);
  const auto v = onsite(2.0);
  PureState exact = dense_evolution_oracle(start, h, v, 1.0);
  std::vector<double> err;
  for (int steps : {4, 8, 16, 32}) err.push_back(distance(trotter_evolve(start, h, v, 1.0, steps), exact));
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    double ratio = err[k] / err[k + 1];
    CAPTURE(k);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}
