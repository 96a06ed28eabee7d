#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fermitele/fock.hpp"
#include "fermitele/linalg.hpp"
#include "fermitele/measurement.hpp"
#include "oracles.hpp"

using namespace fermitele;

namespace {

double max_diff(const PureState& x, const PureState& y) {
  double d = 0.0;
  for (const auto& [det, amp] : x.terms()) d = std::max(d, std::abs(amp - y.amplitude(det)));
  for (const auto& [det, amp] : y.terms()) d = std::max(d, std::abs(amp - x.amplitude(det)));
  return d;
}

SlaterDeterminant dets(std::initializer_list<std::size_t> o) { return SlaterDeterminant::from_orbitals(o); }

}  // namespace

TEST_CASE("det_create signs follow the ascending order") {
  auto r = det_create(dets({}), 3, 4);
  REQUIRE(r);
  CHECK(r->det == dets({3}));
  CHECK(r->sign == 1);

  r = det_create(dets({0, 2}), 1, 4);
  REQUIRE(r);
  CHECK(r->det == dets({0, 1, 2}));
  CHECK(r->sign == -1);

  CHECK_FALSE(det_create(dets({1}), 1, 4));
  CHECK_THROWS_AS(det_create(dets({}), 4, 4), std::out_of_range);
}

TEST_CASE("det_annihilate") {
  auto r = det_annihilate(dets({0, 1, 2}), 2, 4);
  REQUIRE(r);
  CHECK(r->det == dets({0, 1}));
  CHECK(r->sign == 1);

  r = det_annihilate(dets({0, 1, 2}), 1, 4);
  REQUIRE(r);
  CHECK(r->sign == -1);

  CHECK_FALSE(det_annihilate(dets({0}), 1, 4));
}

TEST_CASE("from_orbitals rejects duplicates") {
  std::vector<std::size_t> dup{1, 1};
  CHECK_THROWS_AS(SlaterDeterminant::from_orbitals(dup), std::invalid_argument);
  std::vector<std::size_t> big{64};
  CHECK_THROWS_AS(SlaterDeterminant::from_orbitals(big), std::invalid_argument);
}

TEST_CASE("creation strings match the dense Jordan-Wigner oracle") {
  // c†_2 c†_0 |0> = -c†_0 c†_2 |0>
  std::vector<std::size_t> s{2, 0};
  PureState st = apply_creation_string(PureState::vacuum(4), s);
  CHECK(st.amplitude(dets({0, 2})) == Complex(-1.0));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    PureState r = random_state(5, 2, 100 + trial);
    std::size_t k = rng() % 5;
    PureState created = state_apply_creation(r, k);
    if (created.is_zero()) continue;
    oracle::Vector expect = oracle::creation(5, k) * oracle::dense(r);
    CHECK((oracle::dense(created) - expect).norm() < 1e-13);
    oracle::Vector ann = oracle::creation(5, k).adjoint() * oracle::dense(r);
    PureState a = state_apply_annihilation(r, k);
    CHECK((oracle::dense(a) - ann).norm() < 1e-13);
  }
}

TEST_CASE("anticommutation and Pauli exclusion at state level") {
  for (int trial = 0; trial < 30; ++trial) {
    PureState r = random_state(6, 2, 7 + trial);
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) {
        if (i == j) {
          CHECK(state_apply_creation(state_apply_creation(r, i), i).is_zero());
          CHECK(state_apply_annihilation(state_apply_annihilation(r, i), i).is_zero());
          continue;
        }
        PureState ij = state_apply_creation(state_apply_creation(r, i), j);
        PureState ji = state_apply_creation(state_apply_creation(r, j), i);
        CHECK(max_diff(ij, ji.scaled(-1.0)) < 1e-14);
      }
    }
  }
}

TEST_CASE("electron count is enforced") {
  PureState s(4, 2);
  CHECK_THROWS_AS(s.add(dets({0}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(s.add(dets({0, 5}), 1.0), std::out_of_range);
  s.add(dets({0, 1}), 1e-16);
  CHECK(s.is_zero());
}

TEST_CASE("filled_state and hole construction") {
  PureState f = filled_state(4);
  CHECK(f.size() == 1);
  CHECK(f.amplitude(dets({0, 1, 2, 3})) == Complex(1.0));
  PureState h = state_apply_annihilation(f, 2);
  // c_2 c†_0 c†_1 c†_2 c†_3 |0> = + c†_0 c†_1 c†_3 |0>
  CHECK(h.amplitude(dets({0, 1, 3})) == Complex(1.0));
  CHECK(state_apply_annihilation(f, 1).amplitude(dets({0, 2, 3})) == Complex(-1.0));
}

TEST_CASE("inner products") {
  PureState x(4, 1), y(4, 1);
  x.add(dets({0}), Complex(0, 1));
  y.add(dets({0}), 2.0);
  y.add(dets({1}), 3.0);
  CHECK(inner_product(x, y) == Complex(0, -2));
  CHECK(inner_product(y, y) == Complex(13));
  CHECK(std::abs(inner_product(x, PureState::vacuum(4))) == 0.0);
}

TEST_CASE("a spin-x basis change turns the product example into one determinant") {
  // (c†_1u + c†_1d)(c†_2u + c†_2d)/2 with 1u=0, 1d=1, 2u=2, 2d=3.
  const double h = 1.0 / std::sqrt(2.0);
  std::vector<Complex> one{h, h, 0, 0}, two{0, 0, h, h};
  PureState psi = create_orbital(create_orbital(PureState::vacuum(4), two), one);
  Matrix cols = Matrix::Zero(4, 4);
  cols.block(0, 0, 2, 2) = spin_eigenbasis(SpinAxis::x());
  cols.block(2, 2, 2, 2) = spin_eigenbasis(SpinAxis::x());
  PureState rotated = apply_orbital_unitary(psi, OrbitalUnitary::from_orbital_columns(cols));
  CHECK(rotated.size() == 1);
  CHECK(std::abs(rotated.amplitude(dets({0, 2})) - 1.0) < 1e-14);
}

TEST_CASE("apply_orbital_unitary agrees with the dense oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix u = haar_unitary(5, rng);
    PureState r = random_state(5, 2 + trial % 2, 40 + trial);
    PureState got = apply_orbital_unitary(r, OrbitalUnitary(u));
    CHECK((oracle::dense(got) - oracle::apply_unitary(r, u)).norm() < 1e-12);
  }
}

TEST_CASE("orbital unitaries compose and preserve inner products") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    OrbitalUnitary u1(haar_unitary(6, rng)), u2(haar_unitary(6, rng));
    PureState s1 = random_state(6, 3, 2 * trial), s2 = random_state(6, 3, 2 * trial + 1);
    Complex before = inner_product(s1, s2);
    Complex after = inner_product(apply_orbital_unitary(s1, u1), apply_orbital_unitary(s2, u1));
    CHECK(std::abs(before - after) < 1e-12);
    PureState seq = apply_orbital_unitary(apply_orbital_unitary(s1, u1), u2);
    PureState once = apply_orbital_unitary(s1, u2 * u1);
    CHECK(max_diff(seq, once) < 1e-12);
  }
}

TEST_CASE("OrbitalUnitary validation and helpers") {
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(OrbitalUnitary{bad}, std::invalid_argument);
  std::vector<std::size_t> pair{1, 3};
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  OrbitalUnitary e = OrbitalUnitary::embed(4, pair, flip);
  CHECK(e.support() == std::vector<std::size_t>{1, 3});
  CHECK((e * e.adjoint()).matrix().isApprox(Matrix::Identity(4, 4)));
  PureState s = PureState::determinant(4, dets({1}));
  CHECK(apply_orbital_unitary(s, e).amplitude(dets({3})) == Complex(1.0));
}

TEST_CASE("split_determinant examples") {
  auto r = split_determinant(dets({0, 1}), OrbitalPartition(4, {0}));
  CHECK(r.a == dets({0}));
  CHECK(r.b == dets({1}));
  CHECK(r.sign == 1);

  r = split_determinant(dets({0, 1, 2}), OrbitalPartition(4, {1}));
  CHECK(r.a == dets({1}));
  CHECK(r.b == dets({0, 2}));
  CHECK(r.sign == -1);

  r = split_determinant(dets({0, 2}), OrbitalPartition(4, {0, 2, 3}));
  CHECK(r.a == dets({0, 2}));
  CHECK(r.b == dets({}));
  CHECK(r.sign == 1);
}

TEST_CASE("split_determinant reassembles with the returned sign") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::uint64_t mask = rng() & 0xFF;
    std::uint64_t side = rng() & 0xFF;
    std::vector<std::size_t> a;
    for (std::size_t k = 0; k < 8; ++k) {
      if ((side >> k) & 1U) a.push_back(k);
    }
    SlaterDeterminant det(mask);
    OrbitalPartition p(8, a);
    auto s = split_determinant(det, p);
    std::vector<std::size_t> order = s.a.orbitals();
    for (auto k : s.b.orbitals()) order.push_back(k);
    PureState built = apply_creation_string(PureState::vacuum(8), order);
    CHECK(built.amplitude(det) == Complex(s.sign));
  }
}
