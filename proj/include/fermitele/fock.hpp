#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fermitele {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kMaxOrbitals = 64;
inline constexpr double kDropTolerance = 1e-14;
inline constexpr double kUnitaryTolerance = 1e-12;

/// Occupation set over at most 64 spin-orbitals. The represented operator
/// string is always the canonical ascending product c†_{i1} c†_{i2} ... |0>.
class SlaterDeterminant {
 public:
  constexpr SlaterDeterminant() = default;
  explicit constexpr SlaterDeterminant(std::uint64_t mask) : mask_(mask) {}

  /// Throws std::invalid_argument on duplicate indices or indices >= 64.
  static SlaterDeterminant from_orbitals(std::span<const std::size_t> orbitals);
  static SlaterDeterminant from_orbitals(std::initializer_list<std::size_t> orbitals);

  constexpr std::uint64_t mask() const { return mask_; }
  bool occupied(std::size_t k) const { return k < kMaxOrbitals && ((mask_ >> k) & 1U) != 0; }
  int count() const;
  std::vector<std::size_t> orbitals() const;

  constexpr auto operator<=>(const SlaterDeterminant&) const = default;

 private:
  std::uint64_t mask_ = 0;
};

struct SignedDeterminant {
  SlaterDeterminant det;
  int sign = 1;
  bool operator==(const SignedDeterminant&) const = default;
};

/// c†_k applied to a canonical determinant. Empty if k is already occupied.
/// The sign is (-1)^(number of occupied orbitals below k).
std::optional<SignedDeterminant> det_create(SlaterDeterminant det, std::size_t k,
                                            std::size_t num_orbitals);
std::optional<SignedDeterminant> det_annihilate(SlaterDeterminant det, std::size_t k,
                                                std::size_t num_orbitals);

/// Sparse amplitude map over determinants with a fixed electron number.
/// Amplitudes with magnitude <= kDropTolerance are never stored.
class PureState {
 public:
  using Terms = std::map<SlaterDeterminant, Complex>;

  explicit PureState(std::size_t num_orbitals, std::optional<int> electrons = std::nullopt);

  static PureState vacuum(std::size_t num_orbitals);
  static PureState determinant(std::size_t num_orbitals, SlaterDeterminant det,
                               Complex amplitude = 1.0);

  /// Builds a state from raw accumulated amplitudes; prunes small entries.
  static PureState from_masks(std::size_t num_orbitals, std::optional<int> electrons,
                              const std::map<std::uint64_t, Complex>& amplitudes);

  std::size_t num_orbitals() const { return num_orbitals_; }
  std::optional<int> electron_count() const { return electrons_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Complex amplitude(SlaterDeterminant det) const;
  double norm_squared() const;

  /// Accumulates amplitude onto det. Throws if det lies outside [0, M) or its
  /// popcount disagrees with the state's electron count.
  void add(SlaterDeterminant det, Complex amplitude);

  PureState scaled(Complex factor) const;
  PureState normalized() const;
  PureState operator+(const PureState& other) const;

 private:
  void check_determinant(SlaterDeterminant det);

  std::size_t num_orbitals_;
  std::optional<int> electrons_;
  Terms terms_;
};

/// Unitary M x M matrix acting on creation operators as
/// c†_i -> sum_j c†_j U_ji.
class OrbitalUnitary {
 public:
  /// Throws std::invalid_argument unless U†U = 1 to kUnitaryTolerance.
  explicit OrbitalUnitary(Matrix matrix, double tolerance = kUnitaryTolerance);

  static OrbitalUnitary identity(std::size_t dim);

  /// Basis change into new orbitals whose coefficients (in the current
  /// basis) are the columns of `columns`. Applying the result to a state
  /// yields its amplitudes in the new basis.
  static OrbitalUnitary from_orbital_columns(const Matrix& columns);

  /// Embeds a small unitary acting on the listed orbitals into dimension M.
  static OrbitalUnitary embed(std::size_t dim, std::span<const std::size_t> orbitals,
                              const Matrix& block);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  OrbitalUnitary adjoint() const;
  OrbitalUnitary operator*(const OrbitalUnitary& rhs) const;

  /// Orbitals on which the unitary acts nontrivially (row or column differs
  /// from the identity).
  std::vector<std::size_t> support(double tolerance = 1e-12) const;

 private:
  Matrix matrix_;
};

class OrbitalPartition {
 public:
  OrbitalPartition(std::size_t num_orbitals, std::span<const std::size_t> side_a);
  OrbitalPartition(std::size_t num_orbitals, std::initializer_list<std::size_t> side_a);

  std::size_t num_orbitals() const { return num_orbitals_; }
  std::uint64_t mask_a() const { return mask_a_; }
  std::uint64_t mask_b() const;
  OrbitalPartition swapped() const;

 private:
  OrbitalPartition(std::size_t num_orbitals, std::uint64_t mask_a);

  std::size_t num_orbitals_;
  std::uint64_t mask_a_;
};

struct SplitDeterminant {
  SlaterDeterminant a;
  SlaterDeterminant b;
  int sign = 1;
};

/// Factorizes the canonical product into (A-part canonical)(B-part canonical)
/// and returns the parity of that reordering.
SplitDeterminant split_determinant(SlaterDeterminant det, const OrbitalPartition& partition);

PureState filled_state(std::size_t num_orbitals);

PureState state_apply_creation(const PureState& state, std::size_t k);
PureState state_apply_annihilation(const PureState& state, std::size_t k);

/// sum_k coeffs[k] c†_k |state>, and the analogous annihilator combination.
PureState create_orbital(const PureState& state, std::span<const Complex> coeffs);
PureState annihilate_orbital(const PureState& state, std::span<const Complex> coeffs);

/// Applies c†_{k1} c†_{k2} ... c†_{kn} (rightmost first) to the state.
PureState apply_creation_string(const PureState& state, std::span<const std::size_t> orbitals);
PureState apply_annihilation_string(const PureState& state, std::span<const std::size_t> orbitals);

Complex inner_product(const PureState& bra, const PureState& ket);

PureState apply_orbital_unitary(const PureState& state, const OrbitalUnitary& unitary);

}  // namespace fermitele
