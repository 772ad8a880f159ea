#include <doctest.h>

#include "oracles.hpp"
#include "qirt/model.hpp"
#include "qirt/random.hpp"
#include "qirt/sdp.hpp"

using namespace qirt;

namespace {

// Checks an infeasibility ray directly: -A^T y must lie in the dual cone, y <= 0 on inequality
// rows, and b^T y must be positive.
struct RayCheck {
  double cone_violation = 0.0;
  double value = 0.0;
};

RayCheck check_ray(const SdpProblem& p, const RealVector& y) {
  RealVector s = RealVector::Zero(p.num_vars());
  RayCheck r;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    for (const auto& [col, v] : c.coeffs) s(col) -= y(i) * v;
    r.value += c.rhs * y(i);
    if (c.rel == Relation::LessEqual) r.cone_violation = std::max(r.cone_violation, y(i));
  }
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const std::size_t d = p.blocks[k];
    const ComplexMatrix h = herm_from_coords(s.segment(p.block_offset(k), d * d), d);
    r.cone_violation = std::max(r.cone_violation, -oracle::min_eig(h));
  }
  for (std::size_t j = 0; j < p.nonneg; ++j) r.cone_violation = std::max(r.cone_violation, -s(p.nonneg_offset() + j));
  for (std::size_t j = 0; j < p.free; ++j) r.cone_violation = std::max(r.cone_violation, std::abs(s(p.free_offset() + j)));
  return r;
}

}  // namespace

TEST_CASE("scalar and matrix minimization") {
  Model m;
  const HermExpr x = m.psd(1);
  m.leq(HermExpr::constant_scalar(1.0), x);
  m.minimize(x);
  const SdpSolution s = m.solve();
  REQUIRE(s.optimal());
  CHECK(m.objective_value() == doctest::Approx(1.0).epsilon(1e-7));

  Model m2;
  const HermExpr rho = m2.psd(2);
  m2.psd_constraint(rho - HermExpr::constant_matrix(projector(2, 0)));
  m2.minimize(trace(rho));
  REQUIRE(m2.solve().optimal());
  CHECK(m2.objective_value() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("diamond-norm program for Id - full depolarization") {
  // max <J, W> s.t. 0 <= W <= rho ⊗ I, Tr rho = 1, with J the Choi difference; half the norm.
  ComplexMatrix v = ComplexMatrix::Zero(4, 1);
  v(0, 0) = v(3, 0) = 1.0;
  const ComplexMatrix delta = v * v.adjoint() - identity(4) / 2.0;
  Model m;
  const HermExpr w = m.psd(4), rho = m.psd(2);
  m.psd_constraint(kron(rho, identity(2)) - w);
  m.equal(trace(rho), HermExpr::constant_scalar(1.0));
  m.maximize(inner(delta, w));
  const SdpSolution s = m.solve();
  REQUIRE(s.optimal());
  CHECK(2.0 * m.objective_value() == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(std::abs(s.dual_value - s.primal_value) <= 1e-7 * (1.0 + std::abs(s.primal_value)));
}

TEST_CASE("joint measurability feasibility") {
  const ComplexMatrix plus = 0.5 * (identity(2) + pauli_x()), minus = 0.5 * (identity(2) - pauli_x());
  auto build = [](Model& m, const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b) {
    std::vector<std::vector<HermExpr>> g(2, std::vector<HermExpr>());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g[i].push_back(m.psd(2));
    for (int i = 0; i < 2; ++i) m.equal(g[i][0] + g[i][1], HermExpr::constant_matrix(a[i]));
    for (int j = 0; j < 2; ++j) m.equal(g[0][j] + g[1][j], HermExpr::constant_matrix(b[j]));
  };
  Model commuting;
  build(commuting, {projector(2, 0), projector(2, 1)}, {projector(2, 0), projector(2, 1)});
  const SdpSolution ok = commuting.feasibility();
  CHECK(ok.status == SdpStatus::Optimal);
  CHECK(constraint_residual(commuting.problem(), ok.x) < 1e-8);

  Model mub;
  build(mub, {projector(2, 0), projector(2, 1)}, {plus, minus});
  const SdpSolution bad = mub.feasibility();
  REQUIRE(bad.status == SdpStatus::Infeasible);
  const RayCheck ray = check_ray(mub.problem(), bad.y);
  CHECK(ray.cone_violation <= 1e-8);
  CHECK(ray.value >= 1e-8);
  CHECK(infeasibility_violation(mub.problem(), bad.y) <= 1e-8);

  Model empty;
  empty.psd(2);
  CHECK(empty.feasibility().status == SdpStatus::Optimal);
}

TEST_CASE("random programs: weak duality and determinism") {
  Rng rng(21);
  for (int k = 0; k < 15; ++k) {
    const std::size_t d = 2 + k % 3;
    Model m;
    const HermExpr x = m.psd(d);
    const ComplexMatrix x0 = random_density(d, rng);
    for (int i = 0; i < 3; ++i) {
      const ComplexMatrix a = random_hermitian(d, rng);
      m.equal(inner(a, x), HermExpr::constant_scalar((a * x0).trace().real()));
    }
    const ComplexMatrix g = ginibre(d, d, rng);
    const ComplexMatrix c = g * g.adjoint() + 0.1 * identity(d);
    m.minimize(inner(c, x));
    const SdpSolution s1 = m.solve();
    REQUIRE(s1.optimal());
    CHECK(s1.dual_value <= s1.primal_value + 1e-9);
    CHECK(s1.gap <= 1e-7 * (1.0 + std::abs(s1.primal_value)));
    CHECK(s1.primal_value <= (c * x0).trace().real() + 1e-7);
    const SdpSolution s2 = m.solve();
    CHECK(s2.status == s1.status);
    CHECK(std::abs(s2.primal_value - s1.primal_value) <= 1e-12);
    CHECK(std::abs(s2.dual_value - s1.dual_value) <= 1e-12);
    CHECK((s2.x - s1.x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("infeasible and unbounded programs") {
  Model inf;
  const HermExpr x = inf.nonneg();
  inf.leq(x, HermExpr::constant_scalar(-1.0));
  inf.minimize(x);
  const SdpSolution s = inf.solve();
  CHECK(s.status == SdpStatus::Infeasible);
  const SdpSolution f = inf.feasibility();
  REQUIRE(f.status == SdpStatus::Infeasible);
  const RayCheck ray = check_ray(inf.problem(), f.y);
  CHECK(ray.cone_violation <= 1e-8);
  CHECK(ray.value >= 1e-8);

  Model unb;
  const HermExpr z = unb.free_scalar();
  unb.leq(z, HermExpr::constant_scalar(0.0));
  unb.minimize(z);
  CHECK(unb.solve().status != SdpStatus::Optimal);
}

TEST_CASE("complex to real embedding") {
  Rng rng(22);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix c = random_hermitian(3, rng), x = random_hermitian(3, rng);
    Eigen::MatrixXd big(6, 6);
    big << x.real(), -x.imag(), x.imag(), x.real();
    CHECK((embed_hermitian(c).cwiseProduct(big)).sum() == doctest::Approx((c * x).trace().real()).epsilon(1e-12));
    CHECK(max_abs(unembed_hermitian(embed_hermitian(x, 1.0)) - x) < 1e-12);
    const ComplexMatrix p = random_density(3, rng);
    Eigen::MatrixXd pb(6, 6);
    pb << p.real(), -p.imag(), p.imag(), p.real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pb);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(pb.trace() == doctest::Approx(2.0));
  }
}

TEST_CASE("sdp.v1 round trip") {
  Model m;
  const HermExpr x = m.psd(2), t = m.nonneg();
  m.equal(trace(x), t);
  m.leq(t, HermExpr::constant_scalar(2.0));
  m.maximize(inner(pauli_z(), x));
  const SdpProblem p = m.build();
  const SdpProblem q = sdp_from_json(sdp_to_json(p));
  CHECK(sdp_to_json(q).dump() == sdp_to_json(p).dump());
  const SdpSolution a = solve(p), b = solve(q);
  CHECK(a.primal_value == b.primal_value);
}
