#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qirt {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<cd, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tolerance for Hermiticity checks before an eigensolve.
inline constexpr double kHermitianTol = 1e-10;

ComplexMatrix identity(std::size_t d);
ComplexMatrix zeros(std::size_t rows, std::size_t cols);
ComplexMatrix ket(std::size_t d, std::size_t i);
ComplexMatrix projector(std::size_t d, std::size_t i);
ComplexMatrix outer(const ComplexMatrix& ket_a, const ComplexMatrix& ket_b);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// Kronecker product.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors);

std::size_t product(const Dims& dims);

// Traces out every subsystem not listed in keep. Kept factors stay in their original order.
ComplexMatrix partial_trace(const ComplexMatrix& m, const Dims& dims,
                            const std::vector<std::size_t>& keep);
ComplexMatrix partial_transpose(const ComplexMatrix& m, const Dims& dims, std::size_t system);

// Reorders tensor factors of a square operator: factor k of the result is factor perm[k] of m.
ComplexMatrix permute_subsystems(const ComplexMatrix& m, const Dims& dims,
                                 const std::vector<std::size_t>& perm);
// Permutation matrix P with P (v_0 ⊗ ... ⊗ v_{n-1}) = v_{perm[0]} ⊗ ... ⊗ v_{perm[n-1]}.
ComplexMatrix permutation_matrix(const Dims& dims, const std::vector<std::size_t>& perm);

struct EigenDecomposition {
  RealVector values;      // descending
  ComplexMatrix vectors;  // columns
};

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);
ComplexMatrix hermitian_part(const ComplexMatrix& m);
EigenDecomposition hermitian_eigs(const ComplexMatrix& m);
double min_eigenvalue(const ComplexMatrix& m);
double max_eigenvalue(const ComplexMatrix& m);
double trace_norm(const ComplexMatrix& m);
double operator_norm(const ComplexMatrix& m);
bool is_psd(const ComplexMatrix& m, double tol);
// Clips negative eigenvalues of the Hermitian part.
ComplexMatrix psd_projection(const ComplexMatrix& m);
double max_abs(const ComplexMatrix& m);

// Real coordinates of a Hermitian matrix in an orthonormal basis: diagonal entries, then
// sqrt(2) Re m_ij and sqrt(2) Im m_ij for i < j. The Euclidean product of coordinates is
// Re Tr(A B).
RealVector herm_coords(const ComplexMatrix& m);
ComplexMatrix herm_from_coords(const RealVector& v, std::size_t d);
// Basis element k of the coordinate system above.
ComplexMatrix herm_basis(std::size_t d, std::size_t k);

}  // namespace qirt
