#include <doctest.h>

#include "oracles.hpp"
#include "qirt/linalg.hpp"
#include "qirt/random.hpp"

using namespace qirt;

TEST_CASE("tensor products") {
  CHECK(max_abs(tensor(identity(2), identity(2)) - identity(4)) == 0.0);
  const ComplexMatrix xx = tensor(pauli_x(), pauli_x());
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(xx(r, c) == cd(r + c == 3 ? 1.0 : 0.0, 0.0));
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng), c = ginibre(2, 2, rng);
    CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    CHECK(max_abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))) < 1e-12);
    CHECK(max_abs(tensor({a, b, c}) - tensor(a, tensor(b, c))) < 1e-12);
  }
  CHECK(tensor(ginibre(2, 3, rng), ginibre(3, 1, rng)).rows() == 6);
}

TEST_CASE("partial trace") {
  Rng rng(2);
  const ComplexMatrix rho = random_density(2, rng), sigma = random_density(3, rng);
  CHECK(max_abs(partial_trace(tensor(rho, sigma), {2, 3}, {0}) - rho) < 1e-12);
  CHECK(max_abs(partial_trace(tensor(rho, sigma), {2, 3}, {1}) - sigma) < 1e-12);
  CHECK(max_abs(partial_trace(oracle::phi_plus(), {2, 2}, {0}) - 0.5 * identity(2)) < 1e-12);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix m = ginibre(6, 6, rng);
    CHECK(std::abs(partial_trace(m, {2, 3}, {0}).trace() - m.trace()) < 1e-12);
    CHECK(max_abs(partial_trace(m, {2, 3}, {0}) - oracle::partial_trace2(m, 2, 3, true)) < 1e-12);
    CHECK(max_abs(partial_trace(m, {2, 3}, {1}) - oracle::partial_trace2(m, 2, 3, false)) < 1e-12);
    const ComplexMatrix a = ginibre(2, 2, rng), b = ginibre(3, 3, rng);
    CHECK(max_abs(partial_trace(tensor(a, b), {2, 3}, {0}) - b.trace() * a) < 1e-12);
  }
  const ComplexMatrix m3 = ginibre(12, 12, rng);
  CHECK(max_abs(partial_trace(partial_trace(m3, {2, 3, 2}, {0, 1}), {2, 3}, {0}) - partial_trace(m3, {2, 3, 2}, {0})) <
        1e-12);
  CHECK(std::abs(partial_trace(m3, {2, 3, 2}, {}).trace() - m3.trace()) < 1e-12);
  CHECK_THROWS_AS(partial_trace(m3, {2, 3}, {0}), Error);
}

TEST_CASE("partial transpose") {
  Rng rng(3);
  const ComplexMatrix rho = random_density(2, rng), sigma = random_density(3, rng);
  CHECK(max_abs(partial_transpose(tensor(rho, sigma), {2, 3}, 1) - tensor(rho, sigma.transpose())) < 1e-12);
  const auto ev = hermitian_eigs(partial_transpose(oracle::phi_plus(), {2, 2}, 1)).values;
  CHECK(ev(ev.size() - 1) == doctest::Approx(-0.5).epsilon(1e-12));
  const ComplexMatrix m = ginibre(6, 6, rng);
  CHECK(max_abs(partial_transpose(partial_transpose(m, {2, 3}, 1), {2, 3}, 1) - m) == 0.0);
  CHECK(max_abs(partial_transpose(m, {2, 3}, 1) - oracle::transpose_second(m, 2, 3)) < 1e-15);
  const ComplexMatrix h = random_hermitian(6, rng);
  CHECK(is_hermitian(partial_transpose(h, {2, 3}, 0)));
}

TEST_CASE("permutation convention") {
  Rng rng(4);
  const ComplexMatrix u = haar_pure_state(2, rng), v = haar_pure_state(3, rng), w = haar_pure_state(2, rng);
  // P (v0 ⊗ v1 ⊗ v2) = v_{perm[0]} ⊗ v_{perm[1]} ⊗ v_{perm[2]}.
  const ComplexMatrix p = permutation_matrix({2, 3, 2}, {1, 2, 0});
  CHECK(max_abs(p * tensor({u, v, w}) - tensor({v, w, u})) < 1e-12);
  const ComplexMatrix swap = permutation_matrix({2, 3}, {1, 0});
  CHECK(max_abs(swap * tensor(u, v) - tensor(v, u)) < 1e-12);
  CHECK(max_abs(swap.adjoint() * swap - identity(6)) < 1e-12);
  const ComplexMatrix a = random_hermitian(2, rng), b = random_hermitian(3, rng);
  CHECK(max_abs(permute_subsystems(tensor(a, b), {2, 3}, {1, 0}) - tensor(b, a)) < 1e-12);
  CHECK(max_abs(permutation_matrix({2, 2}, {0, 1}) - identity(4)) == 0.0);
}

TEST_CASE("hermitian eigendecomposition") {
  auto z = hermitian_eigs(pauli_z()).values;
  CHECK(z(0) == doctest::Approx(1.0));
  CHECK(z(1) == doctest::Approx(-1.0));
  const ComplexMatrix m = 0.5 * identity(2) + pauli_x() / 6.0;
  const auto e = hermitian_eigs(m);
  CHECK(e.values(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(e.values(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix h = random_hermitian(5, rng);
    const auto d = hermitian_eigs(h);
    CHECK(std::abs(d.values.sum() - h.trace().real()) < 1e-10);
    CHECK((d.vectors.adjoint() * d.vectors - identity(5)).norm() <= 1e-9);
    const ComplexMatrix rec = d.vectors * d.values.cast<cd>().asDiagonal() * d.vectors.adjoint();
    CHECK((rec - h).norm() <= 1e-9 * h.norm());
    for (int i = 1; i < 5; ++i) CHECK(d.values(i - 1) >= d.values(i));
    CHECK(min_eigenvalue(h) == doctest::Approx(oracle::min_eig(h)).epsilon(1e-10));
  }
  ComplexMatrix bad = identity(2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eigs(bad), Error);
}

TEST_CASE("norms and positivity") {
  CHECK(trace_norm(pauli_z()) == doctest::Approx(2.0));
  CHECK(trace_norm(oracle::phi_plus() - identity(4) / 4.0) == doctest::Approx(1.5).epsilon(1e-12));
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    CHECK(trace_norm(random_density(3, rng)) == doctest::Approx(1.0).epsilon(1e-12));
    const ComplexMatrix a = random_hermitian(3, rng), b = random_hermitian(3, rng);
    CHECK(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10);
    CHECK(trace_norm(-2.5 * a) == doctest::Approx(2.5 * trace_norm(a)).epsilon(1e-10));
    const ComplexMatrix g = ginibre(3, 3, rng);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
    CHECK(trace_norm(g) == doctest::Approx(svd.singularValues().sum()).epsilon(1e-10));
  }
  CHECK(is_psd(identity(3), 1e-12));
  CHECK_FALSE(is_psd(pauli_z(), 1e-12));
  CHECK(is_psd(0.5 * identity(2) + pauli_x() / 6.0, 1e-12));
  CHECK(operator_norm(pauli_y()) == doctest::Approx(1.0));
}

TEST_CASE("hermitian coordinates pair with Re Tr") {
  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix a = random_hermitian(3, rng), b = random_hermitian(3, rng);
    CHECK(herm_coords(a).dot(herm_coords(b)) == doctest::Approx((a * b).trace().real()).epsilon(1e-12));
    CHECK(max_abs(herm_from_coords(herm_coords(a), 3) - a) < 1e-12);
  }
  for (std::size_t k = 0; k < 9; ++k) CHECK(is_hermitian(herm_basis(3, k)));
}
