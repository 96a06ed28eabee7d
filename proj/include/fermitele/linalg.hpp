#pragma once

#include <cstdint>
#include <random>

#include "fermitele/fock.hpp"

namespace fermitele {

/// Max elementwise |A - A†|.
double hermiticity_error(const Matrix& a);

/// exp(i * scale * H) for hermitian H, through its eigendecomposition.
Matrix expi_hermitian(const Matrix& h, double scale);

/// Haar-distributed unitary (QR of a complex Ginibre matrix, phase-fixed R).
Matrix haar_unitary(std::size_t dim, std::mt19937_64& rng);

/// Random hermitian matrix with entries of unit variance.
Matrix random_hermitian(std::size_t dim, std::mt19937_64& rng);

/// SplitMix64 finalizer; used to derive independent RNG streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` under `master`.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Linear entropy Tr[rho] - Tr[rho^2] of a hermitian matrix.
double linear_entropy(const Matrix& rho);

}  // namespace fermitele
