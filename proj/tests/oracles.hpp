#pragma once

// Index-loop reference implementations used as independent oracles.

#include <doctest.h>

#include "qirt/qobjects.hpp"

namespace oracle {

using qirt::cd;
using qirt::ComplexMatrix;

// Tr over the second factor (keep_first) or the first factor of a (da·db)-dimensional matrix.
inline ComplexMatrix partial_trace2(const ComplexMatrix& m, std::size_t da, std::size_t db, bool keep_first) {
  const std::size_t d = keep_first ? da : db;
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (std::size_t a1 = 0; a1 < da; ++a1)
    for (std::size_t a2 = 0; a2 < da; ++a2)
      for (std::size_t b1 = 0; b1 < db; ++b1)
        for (std::size_t b2 = 0; b2 < db; ++b2) {
          const cd v = m(a1 * db + b1, a2 * db + b2);
          if (keep_first && b1 == b2) out(a1, a2) += v;
          if (!keep_first && a1 == a2) out(b1, b2) += v;
        }
  return out;
}

inline ComplexMatrix transpose_second(const ComplexMatrix& m, std::size_t da, std::size_t db) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t a1 = 0; a1 < da; ++a1)
    for (std::size_t a2 = 0; a2 < da; ++a2)
      for (std::size_t b1 = 0; b1 < db; ++b1)
        for (std::size_t b2 = 0; b2 < db; ++b2) out(a1 * db + b1, a2 * db + b2) = m(a1 * db + b2, a2 * db + b1);
  return out;
}

// J = Σ_ij |i><j| ⊗ Σ_k K|i><j|K†.
inline ComplexMatrix choi(const std::vector<ComplexMatrix>& kraus) {
  const std::size_t din = kraus[0].cols(), dout = kraus[0].rows();
  ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
  for (std::size_t r = 0; r < din; ++r)
    for (std::size_t c = 0; c < din; ++c)
      for (const auto& k : kraus) {
        const ComplexMatrix blk = k.col(r) * k.col(c).adjoint();
        j.block(r * dout, c * dout, dout, dout) += blk;
      }
  return j;
}

inline ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& kraus, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(kraus[0].rows(), kraus[0].rows());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

// Φ(ρ) = Tr_in[(ρ^T ⊗ I) J].
inline ComplexMatrix apply_choi(const ComplexMatrix& j, std::size_t din, std::size_t dout, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  for (std::size_t r = 0; r < din; ++r)
    for (std::size_t c = 0; c < din; ++c) out += rho(r, c) * j.block(r * dout, c * dout, dout, dout);
  return out;
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

inline double min_eig(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(0.5 * (h + h.adjoint())));
  return es.eigenvalues().minCoeff();
}

inline ComplexMatrix phi_plus() {
  ComplexMatrix v = ComplexMatrix::Zero(4, 1);
  v(0, 0) = v(3, 0) = 1.0 / std::sqrt(2.0);
  return v * v.adjoint();
}

}  // namespace oracle
