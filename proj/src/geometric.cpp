#include "fermitele/geometric.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fermitele {

namespace {

constexpr double kNormTolerance = 1e-9;

std::vector<Complex> to_coeffs(const Vector& v) {
  return std::vector<Complex>(v.data(), v.data() + v.size());
}

std::vector<Complex> conj_coeffs(const Vector& v) {
  std::vector<Complex> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = std::conj(v(i));
  return out;
}

Vector one_electron_amplitudes(const PureState& s) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(s.num_orbitals()));
  for (const auto& [det, amp] : s.terms()) {
    out(static_cast<Eigen::Index>(det.orbitals().front())) = amp;
  }
  return out;
}

// Extends orthonormal columns to a full unitary (Gram-Schmidt against unit vectors).
Matrix complete_unitary(const Matrix& cols, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix out(n, n);
  Eigen::Index filled = 0;
  for (Eigen::Index c = 0; c < cols.cols(); ++c) out.col(filled++) = cols.col(c);
  for (Eigen::Index k = 0; k < n && filled < n; ++k) {
    Vector v = Vector::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < filled; ++j) v -= out.col(j) * out.col(j).dot(v);
    }
    double norm = v.norm();
    if (norm > 1e-6) out.col(filled++) = v / norm;
  }
  return out;
}

// Orthonormalizes columns in place, keeping the span of each prefix.
void orthonormalize(Matrix& cols) {
  for (Eigen::Index k = 0; k < cols.cols(); ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < k; ++j) cols.col(k) -= cols.col(j) * cols.col(j).dot(cols.col(k));
    }
    cols.col(k).normalize();
  }
}

struct OverlapData {
  Complex overlap;
  Matrix w;  // column k: d overlap / d conj(u_k)
};

// O = <0| c_{u_N} ... c_{u_1} |Psi>, and w_k with O = u_k^† w_k.
OverlapData overlap_and_partials(const PureState& psi, const Matrix& cols) {
  const auto n = cols.cols();
  const auto m = cols.rows();
  OverlapData out;
  out.w = Matrix::Zero(m, n);

  std::vector<PureState> prefix;  // prefix[k] = c_{u_k}...c_{u_1} Psi
  prefix.reserve(static_cast<std::size_t>(n) + 1);
  prefix.push_back(psi);
  for (Eigen::Index k = 0; k < n; ++k) {
    prefix.push_back(annihilate_orbital(prefix.back(), conj_coeffs(cols.col(k))));
  }
  out.overlap = prefix.back().amplitude(SlaterDeterminant{});

  for (Eigen::Index k = 0; k < n; ++k) {
    PureState rest = prefix[static_cast<std::size_t>(k)];
    for (Eigen::Index j = k + 1; j < n; ++j) {
      rest = annihilate_orbital(rest, conj_coeffs(cols.col(j)));
    }
    double sign = ((n - 1 - k) % 2 == 0) ? 1.0 : -1.0;
    out.w.col(k) = sign * one_electron_amplitudes(rest);
  }
  return out;
}

double overlap_sq(const PureState& psi, const Matrix& cols) {
  PureState s = psi;
  for (Eigen::Index k = 0; k < cols.cols(); ++k) {
    s = annihilate_orbital(s, conj_coeffs(cols.col(k)));
  }
  return std::norm(s.amplitude(SlaterDeterminant{}));
}

SlaterDeterminant first_n(int n) {
  return SlaterDeterminant(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
}

struct AscentResult {
  Matrix unitary;
  double f = 0.0;
  bool converged = false;
};

AscentResult riemannian_ascent(const PureState& psi, Matrix u, int n, const GeometricOptions& opt) {
  AscentResult r;
  auto occupied = [&](const Matrix& full) { return Matrix(full.leftCols(n)); };
  OverlapData d = overlap_and_partials(psi, occupied(u));
  double f = std::norm(d.overlap);
  double step = 0.5;
  for (int it = 0; it < opt.max_iterations; ++it) {
    Matrix t = d.w * occupied(u).adjoint();
    Matrix b = Complex(0.0, -1.0) * std::conj(d.overlap) * t;
    Matrix g = 0.5 * (b + b.adjoint());
    double slope = 2.0 * g.squaredNorm();
    if (slope < opt.tol * opt.tol) {
      r.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-14) {
      Matrix trial = expi_hermitian(g, step) * u;
      OverlapData td = overlap_and_partials(psi, occupied(trial));
      double ft = std::norm(td.overlap);
      if (ft >= f + 1e-4 * step * slope) {
        u = trial;
        d = std::move(td);
        f = ft;
        step = std::min(step * 1.6, 1e3);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      r.converged = true;  // no ascent direction left at machine precision
      break;
    }
  }
  r.unitary = u;
  r.f = f;
  return r;
}

GeometricResult closed_form(const PureState& psi) {
  const std::size_t m = psi.num_orbitals();
  const int n = psi.electron_count().value_or(0);
  const int holes = static_cast<int>(m) - n;
  const double norm = psi.norm_squared();
  GeometricResult out{0.0, norm, {OrbitalUnitary::identity(m), first_n(n)}, true, 0};
  if (psi.is_zero() || n == 0 || holes == 0) return out;

  Matrix rho = one_particle_rdm(psi);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const auto dim = static_cast<Eigen::Index>(m);

  if (n <= 2) {
    Vector phi1 = es.eigenvectors().col(dim - 1);
    Matrix cols(dim, n);
    if (n == 1) {
      cols.col(0) = one_electron_amplitudes(psi).normalized();
      out.value = 0.0;
    } else {
      cols.col(0) = phi1;
      PureState chi = annihilate_orbital(psi, conj_coeffs(phi1));
      Vector phi2 = one_electron_amplitudes(chi);
      cols.col(1) = phi2 / phi2.norm();
      out.value = std::max(0.0, norm - es.eigenvalues()(dim - 1));
    }
    out.overlap = norm - out.value;
    out.witness = {OrbitalUnitary(complete_unitary(cols, m), 1e-9), first_n(n)};
    return out;
  }

  // One or two holes: work with the hole orbitals instead.
  const std::uint64_t full = m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  auto hole_vector = [&](const PureState& s) {
    // s = sum_j A_j |full \ j>; c_chi|full> = sum_j conj(chi_j)(-1)^j |full \ j>.
    Vector chi = Vector::Zero(dim);
    for (const auto& [det, amp] : s.terms()) {
      auto j = static_cast<Eigen::Index>(std::countr_zero(full & ~det.mask()));
      chi(j) = std::conj(amp) * ((j % 2 == 0) ? 1.0 : -1.0);
    }
    return Vector(chi / chi.norm());
  };
  Matrix hole_cols(dim, holes);
  if (holes == 1) {
    hole_cols.col(0) = hole_vector(psi);
    out.value = 0.0;
  } else {
    Vector chi1 = es.eigenvectors().col(0);
    hole_cols.col(0) = chi1;
    hole_cols.col(1) = hole_vector(create_orbital(psi, to_coeffs(chi1)));
    out.value = std::max(0.0, es.eigenvalues()(0));
  }
  out.overlap = norm - out.value;
  Matrix u = complete_unitary(hole_cols, m);
  // Occupied orbitals go first.
  Matrix reordered(dim, dim);
  reordered << u.rightCols(dim - holes), u.leftCols(holes);
  out.witness = {OrbitalUnitary(reordered, 1e-9), first_n(n)};
  return out;
}

struct BruteInternal {
  BruteForceResult result;
  Matrix best_cols;
};

BruteInternal brute_force(const PureState& psi, const BruteForceBudget& budget) {
  const std::size_t m = psi.num_orbitals();
  const int n = psi.electron_count().value_or(0);
  const double norm = psi.norm_squared();
  BruteInternal out;
  out.best_cols = Matrix::Identity(static_cast<Eigen::Index>(m), n);
  if (psi.is_zero() || n == 0 || n == static_cast<int>(m)) {
    out.result = {true, norm - overlap_sq(psi, out.best_cols), norm - overlap_sq(psi, out.best_cols),
                  budget.restarts};
    return out;
  }
  std::vector<double> finals;
  std::vector<bool> converged;
  double best_f = -1.0;
  for (int r = 0; r < budget.restarts; ++r) {
    std::mt19937_64 rng(mix_seed(budget.seed, static_cast<std::uint64_t>(r)));
    Matrix cols = haar_unitary(m, rng).leftCols(n);
    double f = overlap_sq(psi, cols);
    bool done = false;
    for (int sweep = 0; sweep < budget.max_sweeps && !done; ++sweep) {
      for (Eigen::Index k = 0; k < n; ++k) {
        OverlapData d = overlap_and_partials(psi, cols);
        Vector wk = d.w.col(k);
        double len = wk.norm();
        if (len > 1e-300) cols.col(k) = wk / len;
      }
      orthonormalize(cols);
      double fn = overlap_sq(psi, cols);
      if (fn - f < 1e-16) done = true;
      f = std::max(f, fn);
    }
    finals.push_back(f);
    converged.push_back(done);
    if (f > best_f) {
      best_f = f;
      out.best_cols = cols;
    }
  }
  int agree = 0;
  bool best_converged = false;
  for (std::size_t r = 0; r < finals.size(); ++r) {
    if (best_f - finals[r] <= 1e-9) {
      ++agree;
      best_converged = best_converged || converged[r];
    }
  }
  out.result.best = norm - best_f;
  out.result.agreeing_restarts = agree;
  out.result.conclusive = agree >= 3 && best_converged;
  out.result.value = out.result.conclusive ? out.result.best : 0.0;
  return out;
}

}  // namespace

PureState slater_from_columns(const Matrix& columns) {
  PureState s = PureState::vacuum(static_cast<std::size_t>(columns.rows()));
  for (Eigen::Index k = columns.cols(); k-- > 0;) {
    Vector col = columns.col(k);
    s = create_orbital(s, to_coeffs(col));
  }
  return s;
}

PureState witness_state(const FockWitness& witness, std::size_t num_orbitals) {
  return apply_orbital_unitary(PureState::determinant(num_orbitals, witness.occupied),
                               witness.unitary);
}

GeometricResult geometric_entanglement(const PureState& state, const GeometricOptions& options) {
  const double norm = state.norm_squared();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    throw std::invalid_argument("geometric entanglement needs a normalized state");
  }
  const std::size_t m = state.num_orbitals();
  const int n = state.electron_count().value_or(0);
  const int holes = static_cast<int>(m) - n;
  const bool closed_ok = n <= 2 || holes <= 2;

  switch (options.mode) {
    case GeometricMode::kClosedTwoBody:
      if (!closed_ok) throw std::invalid_argument("closed form needs at most two electrons or holes");
      return closed_form(state);
    case GeometricMode::kAuto:
      if (closed_ok) return closed_form(state);
      break;
    case GeometricMode::kBruteOracle: {
      BruteInternal b = brute_force(state, BruteForceBudget{std::max(options.restarts, 200), 20000,
                                                           options.seed});
      GeometricResult out;
      out.value = b.result.best;
      out.overlap = norm - b.result.best;
      out.converged = b.result.conclusive;
      out.witness = {OrbitalUnitary(complete_unitary(b.best_cols, m), 1e-9), first_n(n)};
      return out;
    }
    case GeometricMode::kOptimize:
      break;
  }

  if (n == 0 || holes == 0) return closed_form(state);

  GeometricResult best;
  best.overlap = -1.0;
  Matrix rho = one_particle_rdm(state);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Matrix start;
    if (r == 0) {
      start = es.eigenvectors().rowwise().reverse();
    } else {
      std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(r)));
      start = haar_unitary(m, rng);
    }
    AscentResult a = riemannian_ascent(state, start, n, options);
    if (a.f > best.overlap) {
      best.overlap = a.f;
      best.value = std::max(0.0, norm - a.f);
      best.converged = a.converged;
      best.best_restart = r;
      Matrix u = a.unitary;
      // Re-unitarize against accumulated round-off.
      Eigen::HouseholderQR<Matrix> qr(u);
      Matrix q = qr.householderQ() * Matrix::Identity(u.rows(), u.cols());
      Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        Complex dj = rr(j, j);
        if (std::abs(dj) > 0.0) q.col(j) *= dj / std::abs(dj);
      }
      best.witness = {OrbitalUnitary(q, 1e-9), first_n(n)};
    }
  }
  return best;
}

BruteForceResult brute_force_closest_fock(const PureState& state, const BruteForceBudget& budget) {
  if (state.num_orbitals() > 6 || state.electron_count().value_or(0) > 3) {
    throw std::invalid_argument("brute-force oracle limited to M <= 6, N <= 3");
  }
  return brute_force(state, budget).result;
}

FockDecomposition fock_decompose_wrt_orbital(const Matrix& occupied_columns, std::size_t e) {
  const auto m = occupied_columns.rows();
  const auto n = occupied_columns.cols();
  if (n == 0) throw std::invalid_argument("need at least one occupied column");
  if (e >= static_cast<std::size_t>(m)) throw std::out_of_range("orbital e out of range");
  Matrix gram = occupied_columns.adjoint() * occupied_columns;
  if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("occupied columns are not orthonormal");
  }
  const auto ei = static_cast<Eigen::Index>(e);
  Vector row = occupied_columns.row(ei).transpose();  // r_k = C(e, k)
  double alpha = row.norm();

  Matrix q = Matrix::Identity(n, n);
  if (alpha > 1e-14) {
    Matrix first(n, 1);
    first.col(0) = row.conjugate() / alpha;
    q = complete_unitary(first, static_cast<std::size_t>(n));
  }
  Matrix rotated = occupied_columns * q;

  FockDecomposition out;
  out.phase = std::conj(q.determinant());
  out.alpha_prime = std::min(1.0, std::abs(rotated(ei, 0)));
  Complex lead = rotated(ei, 0);
  if (alpha > 1e-14) {
    // Make the e component real and non-negative (it already is, up to round-off).
    Complex ph = lead / std::abs(lead);
    rotated.col(0) /= ph;
    out.phase *= ph;
  }
  Vector rest = rotated.col(0);
  rest(ei) = 0.0;
  double rest_norm = rest.norm();
  out.s_coefficient = std::sqrt(std::max(0.0, 1.0 - out.alpha_prime * out.alpha_prime));
  out.s_orbital = rest_norm > 1e-14 ? Vector(rest / rest_norm) : Vector(Vector::Zero(m));
  out.residual_columns = rotated.rightCols(n - 1);
  return out;
}

}  // namespace fermitele
