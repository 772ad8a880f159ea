#include "qirt/distances.hpp"

#include <algorithm>
#include <cmath>

#include "qirt/model.hpp"

namespace qirt {

const char* to_string(DistanceMethod m) { return m == DistanceMethod::SDP ? "SDP" : "OracleLowerBound"; }

DistanceResult flagged_diamond_norm(std::size_t dim_in, std::size_t dim_out,
                                    const std::vector<ComplexMatrix>& deltas) {
  DistanceResult r;
  double scale = 0.0;
  for (const auto& d : deltas) scale = std::max(scale, max_abs(d));
  if (scale < 1e-14) {
    r.achiever = identity(dim_in) / static_cast<double>(dim_in);
    r.note = "identical arguments";
    return r;
  }
  Model m;
  HermExpr rho = m.psd(dim_in);
  m.equal(trace(rho), HermExpr::constant_scalar(1.0));
  const HermExpr bound = kron(rho, identity(dim_out));
  std::vector<HermExpr> obj;
  for (const auto& d : deltas) {
    HermExpr w = m.psd(dim_in * dim_out);
    m.psd_constraint(bound - w);
    obj.push_back(inner(hermitian_part(d), w));
  }
  m.maximize(sum(obj));
  const SdpSolution s = m.solve();
  r.status = s.status;
  r.gap = s.gap;
  r.value = std::clamp(2.0 * m.objective_value(), 0.0, 2.0);
  r.achiever = m.value(rho);
  return r;
}

DistanceResult diamond_distance(const CpMap& a, const CpMap& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out()) throw Error("diamond_distance: dimension mismatch");
  if (!a.is_trace_preserving() || !b.is_trace_preserving())
    throw Error("diamond_distance: both arguments must be trace preserving");
  return flagged_diamond_norm(a.dim_in(), a.dim_out(), {a.choi() - b.choi()});
}

namespace {

// (B ⊗ I) J (B ⊗ I)† for a reference-side operator B.
ComplexMatrix act_on_reference(const ComplexMatrix& j, const ComplexMatrix& b, std::size_t dout) {
  const ComplexMatrix bb = tensor(b, identity(dout));
  return bb * j * bb.adjoint();
}

// Quadratic form Q with Tr[P (B ⊗ I) J (B ⊗ I)†] = vec(B)† Q vec(B), vec index r*din + k.
ComplexMatrix seesaw_form(const ComplexMatrix& j, const ComplexMatrix& p, std::size_t din, std::size_t dout) {
  ComplexMatrix q = ComplexMatrix::Zero(din * din, din * din);
  for (std::size_t r = 0; r < din; ++r)
    for (std::size_t k = 0; k < din; ++k)
      for (std::size_t r2 = 0; r2 < din; ++r2)
        for (std::size_t k2 = 0; k2 < din; ++k2) {
          cd s = 0;
          for (std::size_t o = 0; o < dout; ++o)
            for (std::size_t o2 = 0; o2 < dout; ++o2)
              s += p(r2 * dout + o2, r * dout + o) * j(k * dout + o, k2 * dout + o2);
          q(r2 * din + k2, r * din + k) += s;
        }
  return hermitian_part(q);
}

ComplexMatrix sign_operator(const ComplexMatrix& x) {
  const auto e = hermitian_eigs(x);
  ComplexMatrix s = ComplexMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    const double sg = e.values(i) >= 0 ? 1.0 : -1.0;
    s += sg * e.vectors.col(i) * e.vectors.col(i).adjoint();
  }
  return s;
}

}  // namespace

DistanceResult diamond_lower_bound(const CpMap& a, const CpMap& b, std::size_t samples, std::uint64_t seed) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
    throw Error("diamond_lower_bound: dimension mismatch");
  const std::size_t din = a.dim_in(), dout = a.dim_out();
  const ComplexMatrix j = hermitian_part(a.choi() - b.choi());
  Rng rng(seed);
  auto value_of = [&](const ComplexMatrix& bm) { return trace_norm(hermitian_part(act_on_reference(j, bm, dout))); };

  std::vector<std::pair<double, ComplexMatrix>> cands;
  const ComplexMatrix me = identity(din) / std::sqrt(static_cast<double>(din));
  cands.emplace_back(value_of(me), me);
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix psi = haar_pure_state(din * din, rng);
    ComplexMatrix bm(din, din);
    for (std::size_t r = 0; r < din; ++r)
      for (std::size_t k = 0; k < din; ++k) bm(r, k) = psi(r * din + k, 0);
    cands.emplace_back(value_of(bm), bm);
  }
  std::stable_sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  const std::size_t refine = std::min<std::size_t>(cands.size(), 4);
  for (std::size_t c = 0; c < refine; ++c) {
    ComplexMatrix bm = cands[c].second;
    double v = cands[c].first;
    for (int it = 0; it < 100; ++it) {
      const ComplexMatrix p = sign_operator(hermitian_part(act_on_reference(j, bm, dout)));
      const auto e = hermitian_eigs(seesaw_form(j, p, din, dout));
      ComplexMatrix next(din, din);
      for (std::size_t r = 0; r < din; ++r)
        for (std::size_t k = 0; k < din; ++k) next(r, k) = e.vectors(r * din + k, 0);
      const double nv = value_of(next);
      if (nv <= v + 1e-13) break;
      v = nv;
      bm = next;
    }
    cands.emplace_back(v, bm);
  }
  auto best = std::max_element(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  DistanceResult r;
  r.method = DistanceMethod::OracleLowerBound;
  r.value = std::min(best->first, 2.0);
  // Reduced state of the reference system, B B†.
  r.achiever = best->second * best->second.adjoint();
  r.note = std::to_string(samples) + " Haar samples, maximally entangled state, see-saw refinement";
  return r;
}

DistanceResult instrument_distance(const Instrument& a, const Instrument& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
    throw Error("instrument_distance: dimension mismatch");
  if (a.outcomes() != b.outcomes()) throw Error("instrument_distance: outcome counts differ");
  std::vector<ComplexMatrix> d;
  for (std::size_t k = 0; k < a.outcomes(); ++k) d.push_back(a.branch(k).choi() - b.branch(k).choi());
  return flagged_diamond_norm(a.dim_in(), a.dim_out(), d);
}

DistanceResult measurement_distance(const Povm& m, const Povm& n) {
  if (m.dim() != n.dim()) throw Error("measurement_distance: dimension mismatch");
  if (m.outcomes() != n.outcomes()) throw Error("measurement_distance: outcome counts differ");
  return instrument_distance(povm_as_instrument(m), povm_as_instrument(n));
}

namespace {

template <class T, class F>
DistanceResult max_over(const std::vector<T>& a, const std::vector<T>& b, F&& f) {
  if (a.size() != b.size()) throw Error("set_distance: sets are not aligned");
  DistanceResult best;
  best.value = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    DistanceResult r = f(a[i], b[i]);
    if (i == 0 || r.value > best.value) {
      best = r;
      best.note = "index " + std::to_string(i);
    }
    if (r.status != SdpStatus::Optimal) best.status = r.status;
  }
  return best;
}

}  // namespace

DistanceResult set_distance(const InstrumentSet& a, const InstrumentSet& b) {
  return max_over(a, b, [](const Instrument& x, const Instrument& y) { return instrument_distance(x, y); });
}

DistanceResult set_distance(const ChannelSet& a, const ChannelSet& b) {
  return max_over(a, b, [](const CpMap& x, const CpMap& y) { return diamond_distance(x, y); });
}

DistanceResult set_distance(const PovmSet& a, const PovmSet& b) {
  return max_over(a, b, [](const Povm& x, const Povm& y) { return measurement_distance(x, y); });
}

}  // namespace qirt
