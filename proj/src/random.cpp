#include "qirt/random.hpp"

#include <cmath>

#include <Eigen/QR>

namespace qirt {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ComplexMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = cd(re, im) / std::sqrt(2.0);
    }
  return g;
}

ComplexMatrix haar_isometry(std::size_t d_out, std::size_t d_in, Rng& rng) {
  if (d_out < d_in) throw Error("haar_isometry: output dimension too small");
  Eigen::MatrixXcd g = ginibre(d_out, d_in, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d_out, d_in);
  Eigen::MatrixXcd r = qr.matrixQR().topLeftCorner(d_in, d_in);
  // Fix the phases so the distribution is Haar.
  for (std::size_t k = 0; k < d_in; ++k) {
    const cd diag = r(k, k);
    const double a = std::abs(diag);
    if (a > 0) q.col(k) *= diag / a;
  }
  return q;
}

ComplexMatrix haar_unitary(std::size_t d, Rng& rng) { return haar_isometry(d, d, rng); }

ComplexMatrix haar_pure_state(std::size_t d, Rng& rng) {
  ComplexMatrix v = ginibre(d, 1, rng);
  return v / v.norm();
}

ComplexMatrix random_density(std::size_t d, Rng& rng, std::size_t rank) {
  if (rank == 0) rank = d;
  ComplexMatrix g = ginibre(d, rank, rng);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
  ComplexMatrix g = ginibre(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

std::vector<double> dirichlet_uniform(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  double s = 0;
  for (auto& x : p) {
    x = e(rng);
    s += x;
  }
  for (auto& x : p) x /= s;
  return p;
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace qirt
