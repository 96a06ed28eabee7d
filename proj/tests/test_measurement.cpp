#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <set>

#include "fermitele/entanglement.hpp"
#include "fermitele/geometric.hpp"
#include "fermitele/measurement.hpp"
#include "fermitele/protocols.hpp"
#include "oracles.hpp"

using namespace fermitele;
using std::numbers::pi;

namespace {

SlaterDeterminant dets(std::initializer_list<std::size_t> o) { return SlaterDeterminant::from_orbitals(o); }

double sum_p(const std::vector<Branch>& bs) {
  double t = 0.0;
  for (const auto& b : bs) t += b.probability;
  return t;
}

std::vector<double> probs(const std::vector<Branch>& bs) {
  std::vector<double> p;
  for (const auto& b : bs) p.push_back(b.probability);
  return p;
}

}  // namespace

TEST_CASE("empty orbital set is rejected") {
  std::vector<std::size_t> none;
  CHECK_THROWS_AS(measure_occupation(random_state(4, 2, 1), none, Aggregate::kPerOrbital), std::invalid_argument);
}

TEST_CASE("a determinant gives one certain branch") {
  std::vector<std::size_t> o{0, 2};
  auto bs = measure_occupation(PureState::determinant(4, dets({1, 2})), o, Aggregate::kPerOrbital);
  REQUIRE(bs.size() == 1);
  CHECK(bs[0].probability == doctest::Approx(1.0));
  CHECK(format_label(bs[0].label) == "0=0,2=1");
}

TEST_CASE("branches sum to one and reconstruct the dephased state") {
  const std::vector<std::vector<std::size_t>> sets{{0}, {1, 3}, {0, 2, 4}};
  for (int trial = 0; trial < 10; ++trial) {
    PureState s = random_state(5, 2, 40 + trial);
    oracle::Vector v = oracle::dense(s);
    for (const auto& set : sets) {
      for (Aggregate agg : {Aggregate::kPerOrbital, Aggregate::kTotal}) {
        auto bs = measure_occupation(s, set, agg);
        CHECK(std::abs(sum_p(bs) - 1.0) < 1e-10);
        oracle::Matrix mix = oracle::Matrix::Zero(v.size(), v.size());
        for (const auto& b : bs) {
          CHECK(std::abs(b.post_state.norm_squared() - 1.0) < 1e-10);
          oracle::Vector w = oracle::dense(b.post_state);
          mix += b.probability * w * w.adjoint();
        }
        auto key = [&](Eigen::Index x) {
          int c = 0;
          std::uint64_t k = 0;
          for (std::size_t o : set) {
            bool occ = (static_cast<std::uint64_t>(x) >> o) & 1U;
            c += occ;
            k = (k << 1) | (occ ? 1U : 0U);
          }
          return agg == Aggregate::kTotal ? static_cast<std::uint64_t>(c) : k;
        };
        oracle::Matrix full = v * v.adjoint();
        for (Eigen::Index x = 0; x < v.size(); ++x) {
          for (Eigen::Index y = 0; y < v.size(); ++y) {
            if (key(x) != key(y)) full(x, y) = 0.0;
          }
        }
        CHECK((mix - full).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("measuring twice is deterministic") {
  std::vector<std::size_t> o{1, 2};
  for (int trial = 0; trial < 10; ++trial) {
    for (const auto& b : measure_occupation(random_state(5, 3, trial), o, Aggregate::kPerOrbital)) {
      auto again = measure_occupation(b.post_state, o, Aggregate::kPerOrbital);
      REQUIRE(again.size() == 1);
      CHECK(again[0].label == b.label);
      CHECK(again[0].probability == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("branches are ordered by their counts") {
  std::vector<std::size_t> o{0, 1};
  auto bs = measure_occupation(random_state(4, 2, 3), o, Aggregate::kPerOrbital);
  REQUIRE(bs.size() == 4);
  CHECK(format_label(bs[0].label) == "0=0,1=0");
  CHECK(format_label(bs[1].label) == "0=0,1=1");
  CHECK(format_label(bs[2].label) == "0=1,1=0");
  CHECK(format_label(bs[3].label) == "0=1,1=1");
  auto total = measure_occupation(random_state(4, 2, 3), o, Aggregate::kTotal);
  REQUIRE(total.size() == 3);
  CHECK(format_label(total[2].label) == "0+1=2");
}

TEST_CASE("H2 spin measurement along x on atom A") {
  Complex a(0.6, 0.0), b(0.0, 0.8);
  auto bs = measure_spin_axis(h2_combined_state(a, b), h2::kAUp, h2::kADn, SpinAxis::x());
  REQUIRE(bs.size() == 4);
  auto p = probs(bs);
  CHECK(p[0] == doctest::Approx(std::norm(b) / 2).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p[3] == doctest::Approx(std::norm(a) / 2).epsilon(1e-12));

  // One electron on B in the two middle branches; B empty or full otherwise.
  auto on_b = [](const PureState& s) {
    std::set<int> counts;
    for (const auto& [d, amp] : s.terms()) counts.insert(d.occupied(h2::kBDn) + d.occupied(h2::kBUp));
    return counts;
  };
  CHECK(on_b(bs[0].post_state) == std::set<int>{2});
  CHECK(on_b(bs[1].post_state) == std::set<int>{1});
  CHECK(on_b(bs[2].post_state) == std::set<int>{1});
  CHECK(on_b(bs[3].post_state) == std::set<int>{0});

  // Branch with the sign flipped on the down component; a z rotation by pi fixes it.
  auto raw = teleport_fidelity(bs[1], h2::kBDn, h2::kBUp, a, b);
  CHECK(raw.fidelity < 1.0 - 1e-3);
  Branch fixed = apply_correction(bs[1], spin_rotation(4, h2::kBUp, h2::kBDn, SpinAxis::z(), pi), "rotate z pi");
  CHECK(teleport_fidelity(fixed, h2::kBDn, h2::kBUp, a, b).fidelity == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fixed.corrections == std::vector<std::string>{"rotate z pi"});
  CHECK(fixed.probability == bs[1].probability);
  // The corrected amplitudes pick up the common phase -i.
  PureState target = fixed.post_state;
  Complex ratio_dn = target.amplitude(dets({h2::kAUp, h2::kBDn})) / a;
  Complex ratio_up = target.amplitude(dets({h2::kAUp, h2::kBUp})) / b;
  CHECK(std::abs(ratio_dn - ratio_up) < 1e-12);

  CHECK(teleport_fidelity(bs[2], h2::kBDn, h2::kBUp, a, b).fidelity == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("identity correction changes nothing") {
  auto bs = measure_spin_axis(h2_combined_state(0.6, 0.8), h2::kAUp, h2::kADn, SpinAxis::x());
  Branch same = apply_correction(bs[2], OrbitalUnitary::identity(4), "identity");
  CHECK(std::abs(inner_product(same.post_state, bs[2].post_state) - 1.0) < 1e-14);
}

TEST_CASE("corrections may not touch measured orbitals") {
  auto bs = measure_spin_axis(h2_combined_state(0.6, 0.8), h2::kAUp, h2::kADn, SpinAxis::x());
  CHECK_THROWS_AS(apply_correction(bs[1], spin_rotation(4, h2::kAUp, h2::kADn, SpinAxis::z(), pi)),
                  std::invalid_argument);
}

TEST_CASE("z measurement of an up electron is certain") {
  auto bs = measure_spin_axis(PureState::determinant(2, dets({0})), 0, 1, SpinAxis::z());
  REQUIRE(bs.size() == 1);
  CHECK(bs[0].probability == doctest::Approx(1.0));
  CHECK_THROWS_AS(measure_spin_axis(PureState::determinant(2, dets({0})), 0, 0, SpinAxis::z()), std::invalid_argument);
}

TEST_CASE("spin axis parsing and eigenbases") {
  CHECK(SpinAxis::parse("y").name == "y");
  SpinAxis t = SpinAxis::parse("1.5707963267948966,0");
  Matrix x = spin_eigenbasis(SpinAxis::x());
  CHECK((spin_eigenbasis(t) - x).norm() < 1e-12);
  CHECK_THROWS_AS(SpinAxis::parse("w"), std::invalid_argument);
  for (const auto& axis : {SpinAxis::x(), SpinAxis::y(), SpinAxis::z()}) {
    Matrix e = spin_eigenbasis(axis);
    CHECK((e.adjoint() * e - Matrix::Identity(2, 2)).norm() < 1e-14);
  }
  Matrix rz = spin_rotation(2, 0, 1, SpinAxis::z(), pi).matrix();
  CHECK(std::abs(rz(0, 0) - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(rz(1, 1) - Complex(0, 1)) < 1e-14);
}

TEST_CASE("NV combined state after the spin flip") {
  Complex a(0.6, 0.0), b(0.0, 0.8);
  auto rep = run_nv_protocol(a, b);
  const PureState& flipped = rep.stage_states.at(2);
  std::vector<std::size_t> c{nv::k1Dn, nv::k1Up, nv::kM1Dn, nv::kM1Up};
  auto occ = measure_occupation(flipped, c, Aggregate::kPerOrbital);
  REQUIRE(occ.size() == 4);
  std::multiset<double> plain;
  for (const auto& b : occ) plain.insert(std::round(b.probability * 1e10) / 1e10);
  CHECK(plain == std::multiset<double>{0.18, 0.18, 0.32, 0.32});
  auto bs = measure_in_local_basis(flipped, c, nv_measurement_block(), {"g-", "f+", "f-", "g+"});
  REQUIRE(bs.size() == 4);
  for (const auto& b : bs) CHECK(b.probability == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("quantum-dot x-basis branches") {
  auto rep = run_qdot_protocol(Complex(0.6, 0.0), Complex(0.0, 0.8), 2.0);
  std::vector<std::size_t> o{qdot::k1Up, qdot::k1Dn, qdot::k2Up, qdot::k2Dn};
  Matrix x = Matrix::Zero(4, 4);
  x.block(0, 0, 2, 2) = spin_eigenbasis(SpinAxis::x());
  x.block(2, 2, 2, 2) = spin_eigenbasis(SpinAxis::x());
  auto bs = measure_in_local_basis(rep.stage_states.at(2), o, x, {"x", "x", "x", "x"});
  REQUIRE(bs.size() == 6);
  std::multiset<double> p;
  for (const auto& b : bs) p.insert(std::round(b.probability * 1e10) / 1e10);
  CHECK(p == std::multiset<double>{0.125, 0.125, 0.125, 0.125, 0.25, 0.25});
}

TEST_CASE("teleport fidelity edge cases") {
  // Branch holding (-a c_dn + b c_up) on a two-orbital pair.
  const double h = 1.0 / std::sqrt(2.0);
  Branch br;
  br.post_state = PureState(2, 1);
  br.post_state.add(dets({0}), -h);
  br.post_state.add(dets({1}), h);
  CHECK(teleport_fidelity(br, 0, 1, h, h).fidelity < 1e-15);

  Branch one;
  one.post_state = PureState::determinant(2, dets({0}), -1.0);
  CHECK(teleport_fidelity(one, 0, 1, 1.0, 0.0).fidelity == doctest::Approx(1.0));

  // Undefined rest configuration is reported, not thrown.
  Branch mixed;
  mixed.post_state = PureState(4, 2);
  mixed.post_state.add(dets({0, 2}), h);
  mixed.post_state.add(dets({0, 3}), h);
  auto r = teleport_fidelity(mixed, 0, 1, 1.0, 0.0);
  CHECK(r.fidelity == 0.0);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("hole encoding fidelity") {
  // filled(3) with a hole (a c_0 + b c_1)
  Complex a(0.6, 0.0), b(0.0, 0.8);
  std::vector<Complex> coeffs{a, b, 0.0};
  Branch br;
  br.post_state = annihilate_orbital(filled_state(3), coeffs);
  CHECK(teleport_fidelity(br, 0, 1, a, b, Encoding::kHole).fidelity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(teleport_fidelity(br, 0, 1, b, a, Encoding::kHole).fidelity < 1.0 - 1e-3);
}

TEST_CASE("random_state contract") {
  PureState x = random_state(6, 3, 99), y = random_state(6, 3, 99);
  CHECK(x.terms() == y.terms());
  CHECK(std::abs(x.norm_squared() - 1.0) < 1e-12);
  PureState e = random_state(6, 2, 5, std::size_t{3});
  for (const auto& [d, amp] : e.terms()) CHECK_FALSE(d.occupied(3));
  CHECK_THROWS_AS(random_state(3, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(random_state(3, 3, 0, std::size_t{0}), std::invalid_argument);

  double mean = 0.0;
  for (int k = 0; k < 1000; ++k) mean += particle_entropy(random_state(4, 2, 10000 + k));
  CHECK(mean / 1000 > 0.1);
}

TEST_CASE("inequality is tight at alpha 0 and 1") {
  for (double alpha : {0.0, 1.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      InequalitySample s = random_inequality_sample(5, 2, 60 + trial);
      s.alpha = alpha;
      for (auto m : {InequalityMeasure::kEntropy, InequalityMeasure::kGeometric}) {
        auto r = check_measurement_inequality(s, m);
        CHECK(std::abs(r.lhs - r.rhs) < 1e-10);
        CHECK(r.holds);
      }
    }
  }
}

TEST_CASE("inequality support constraints") {
  InequalitySample s = random_inequality_sample(5, 2, 1);
  s.psi_s = random_state(5, 2, 2);
  CHECK_THROWS_AS(check_measurement_inequality(s, InequalityMeasure::kEntropy), std::invalid_argument);
}

TEST_CASE("entropy inequality and beta bound on random samples") {
  int violations = 0, beta = 0;
  for (int k = 0; k < 300; ++k) {
    InequalitySample s = random_inequality_sample(4 + k % 3, 1 + k % 3, mix_seed(5, k));
    auto r = check_measurement_inequality(s, InequalityMeasure::kEntropy);
    if (!r.holds) ++violations;
    if (!check_beta_bound(s).holds) ++beta;
  }
  CHECK(violations == 0);
  CHECK(beta == 0);
}

TEST_CASE("geometric inequality for two electrons") {
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    auto r = check_measurement_inequality(random_inequality_sample(5, 2, mix_seed(6, k)), InequalityMeasure::kGeometric);
    CHECK_FALSE(r.inconclusive);
    if (!r.holds) ++violations;
  }
  CHECK(violations == 0);
}
