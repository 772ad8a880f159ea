#include "qirt/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qirt {

ComplexMatrix identity(std::size_t d) { return ComplexMatrix::Identity(d, d); }

ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return ComplexMatrix::Zero(rows, cols); }

ComplexMatrix ket(std::size_t d, std::size_t i) {
  if (i >= d) throw Error("ket index out of range");
  ComplexMatrix k = ComplexMatrix::Zero(d, 1);
  k(i, 0) = 1.0;
  return k;
}

ComplexMatrix projector(std::size_t d, std::size_t i) {
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  p(i, i) = 1.0;
  return p;
}

ComplexMatrix outer(const ComplexMatrix& ket_a, const ComplexMatrix& ket_b) {
  return ket_a * ket_b.adjoint();
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) return identity(1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
  return out;
}

std::size_t product(const Dims& dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

namespace {

void check_square_dims(const ComplexMatrix& m, const Dims& dims) {
  if (m.rows() != m.cols()) throw Error("operator must be square");
  if (product(dims) != static_cast<std::size_t>(m.rows()))
    throw Error("subsystem dimensions do not match operator size");
}

// Digits of a flat index in the mixed radix given by dims (most significant first).
void digits_of(std::size_t index, const Dims& dims, std::vector<std::size_t>& out) {
  out.resize(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
}

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& m, const Dims& dims,
                            const std::vector<std::size_t>& keep) {
  check_square_dims(m, dims);
  std::vector<bool> kept(dims.size(), false);
  for (auto k : keep) {
    if (k >= dims.size()) throw Error("partial_trace: subsystem index out of range");
    kept[k] = true;
  }
  const std::size_t n = dims.size();
  const std::size_t total = product(dims);
  // Split each flat index into its kept part and its traced part.
  std::vector<std::size_t> kidx(total), tidx(total);
  std::vector<std::size_t> dig;
  std::size_t kdim = 1;
  for (std::size_t s = 0; s < n; ++s)
    if (kept[s]) kdim *= dims[s];
  for (std::size_t r = 0; r < total; ++r) {
    digits_of(r, dims, dig);
    std::size_t a = 0, b = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (kept[s]) a = a * dims[s] + dig[s];
      else b = b * dims[s] + dig[s];
    }
    kidx[r] = a;
    tidx[r] = b;
  }
  ComplexMatrix out = ComplexMatrix::Zero(kdim, kdim);
  for (std::size_t r = 0; r < total; ++r)
    for (std::size_t c = 0; c < total; ++c)
      if (tidx[r] == tidx[c]) out(kidx[r], kidx[c]) += m(r, c);
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const Dims& dims, std::size_t system) {
  check_square_dims(m, dims);
  if (system >= dims.size()) throw Error("partial_transpose: subsystem index out of range");
  const std::size_t total = product(dims);
  std::size_t stride = 1;
  for (std::size_t s = system + 1; s < dims.size(); ++s) stride *= dims[s];
  const std::size_t d = dims[system];
  ComplexMatrix out(total, total);
  for (std::size_t r = 0; r < total; ++r) {
    const std::size_t rd = (r / stride) % d;
    for (std::size_t c = 0; c < total; ++c) {
      const std::size_t cd_ = (c / stride) % d;
      const std::size_t r2 = r - rd * stride + cd_ * stride;
      const std::size_t c2 = c - cd_ * stride + rd * stride;
      out(r2, c2) = m(r, c);
    }
  }
  return out;
}

ComplexMatrix permutation_matrix(const Dims& dims, const std::vector<std::size_t>& perm) {
  if (perm.size() != dims.size()) throw Error("permutation size mismatch");
  std::vector<bool> seen(dims.size(), false);
  for (auto p : perm) {
    if (p >= dims.size() || seen[p]) throw Error("invalid permutation");
    seen[p] = true;
  }
  Dims new_dims(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) new_dims[k] = dims[perm[k]];
  const std::size_t total = product(dims);
  ComplexMatrix p = ComplexMatrix::Zero(total, total);
  std::vector<std::size_t> dig;
  for (std::size_t i = 0; i < total; ++i) {
    digits_of(i, dims, dig);
    std::size_t j = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) j = j * new_dims[k] + dig[perm[k]];
    p(j, i) = 1.0;
  }
  return p;
}

ComplexMatrix permute_subsystems(const ComplexMatrix& m, const Dims& dims,
                                 const std::vector<std::size_t>& perm) {
  check_square_dims(m, dims);
  const ComplexMatrix p = permutation_matrix(dims, perm);
  return p * m * p.transpose();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

EigenDecomposition hermitian_eigs(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw Error("hermitian_eigs: matrix must be square");
  if (!is_hermitian(m)) throw Error("hermitian_eigs: matrix is not Hermitian");
  Eigen::MatrixXcd h = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw Error("hermitian_eigs: eigensolver failed");
  const Eigen::Index n = h.rows();
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

double min_eigenvalue(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return hermitian_eigs(m).values.minCoeff();
}

double max_eigenvalue(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return hermitian_eigs(m).values.maxCoeff();
}

double trace_norm(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw Error("trace_norm: matrix must be square");
  if (is_hermitian(m)) return hermitian_eigs(m).values.cwiseAbs().sum();
  const Eigen::MatrixXcd mm = m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mm);
  return svd.singularValues().sum();
}

double operator_norm(const ComplexMatrix& m) {
  const Eigen::MatrixXcd mm = m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mm);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

bool is_psd(const ComplexMatrix& m, double tol) { return min_eigenvalue(m) >= -tol; }

ComplexMatrix psd_projection(const ComplexMatrix& m) {
  auto e = hermitian_eigs(hermitian_part(m));
  RealVector clipped = e.values.cwiseMax(0.0);
  return e.vectors * clipped.cast<cd>().asDiagonal() * e.vectors.adjoint();
}

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

RealVector herm_coords(const ComplexMatrix& m) {
  const std::size_t d = m.rows();
  RealVector v(d * d);
  const double s = std::sqrt(2.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) v(k++) = m(i, i).real();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const cd z = 0.5 * (m(i, j) + std::conj(m(j, i)));
      v(k++) = s * z.real();
      v(k++) = s * z.imag();
    }
  return v;
}

ComplexMatrix herm_from_coords(const RealVector& v, std::size_t d) {
  if (static_cast<std::size_t>(v.size()) != d * d) throw Error("coordinate length mismatch");
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) m(i, i) = v(k++);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const cd z(s * v(k), s * v(k + 1));
      k += 2;
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  return m;
}

ComplexMatrix herm_basis(std::size_t d, std::size_t k) {
  RealVector e = RealVector::Zero(d * d);
  e(k) = 1.0;
  return herm_from_coords(e, d);
}

}  // namespace qirt
