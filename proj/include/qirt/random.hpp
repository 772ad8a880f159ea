#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qirt/linalg.hpp"

namespace qirt {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

// Derives an independent stream for sub-task `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);
ComplexMatrix haar_unitary(std::size_t d, Rng& rng);
// Haar-random isometry from C^d_in into C^d_out (d_out >= d_in), via QR of a Ginibre matrix.
ComplexMatrix haar_isometry(std::size_t d_out, std::size_t d_in, Rng& rng);
ComplexMatrix haar_pure_state(std::size_t d, Rng& rng);  // column vector
ComplexMatrix random_density(std::size_t d, Rng& rng, std::size_t rank = 0);
ComplexMatrix random_hermitian(std::size_t d, Rng& rng);
std::vector<double> dirichlet_uniform(std::size_t n, Rng& rng);
double uniform01(Rng& rng);

}  // namespace qirt
