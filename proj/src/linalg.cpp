#include "fermitele/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace fermitele {

double hermiticity_error(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

Matrix expi_hermitian(const Matrix& h, double scale) {
  Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Matrix& v = es.eigenvectors();
  Vector phases(v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    phases(j) = std::exp(Complex(0.0, scale * es.eigenvalues()(j)));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

Matrix haar_unitary(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix z(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      double re = gauss(rng);
      double im = gauss(rng);
      z(r, c) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    Complex d = r(j, j);
    double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

Matrix random_hermitian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix h(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    h(r, r) = gauss(rng);
    for (Eigen::Index c = r + 1; c < n; ++c) {
      double re = gauss(rng);
      double im = gauss(rng);
      h(r, c) = Complex(re, im) / std::sqrt(2.0);
      h(c, r) = std::conj(h(r, c));
    }
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (index * 0xd1b54a32d192ed03ULL));
}

double linear_entropy(const Matrix& rho) {
  // Tr[rho^2] = sum |rho_ij|^2 for hermitian rho.
  return rho.trace().real() - rho.squaredNorm();
}

}  // namespace fermitele
