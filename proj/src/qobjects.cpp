#include "qirt/qobjects.hpp"

#include <algorithm>
#include <cmath>

namespace qirt {

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = std::to_string(i);
  return l;
}

std::string product_label(const std::string& a, const std::string& b) {
  return "(" + a + "," + b + ")";
}

namespace {

double scaled_tol(const ComplexMatrix& m, double tol) { return tol * std::max(1.0, max_abs(m)); }

ComplexMatrix tr_out(const ComplexMatrix& choi, std::size_t din, std::size_t dout) {
  return partial_trace(choi, {din, dout}, {0});
}

ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m) {
  auto e = hermitian_eigs(m);
  RealVector s = e.values.cwiseMax(0.0).cwiseSqrt();
  return e.vectors * s.cast<cd>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

void validate_choi(std::size_t dim_in, std::size_t dim_out, const ComplexMatrix& choi,
                   bool require_tp, double tol) {
  if (dim_in == 0 || dim_out == 0) throw Error("CP map dimensions must be positive");
  const auto n = static_cast<Eigen::Index>(dim_in * dim_out);
  if (choi.rows() != n || choi.cols() != n) throw Error("Choi matrix has the wrong size");
  if (!is_hermitian(choi, std::max(tol, kHermitianTol))) throw Error("Choi matrix is not Hermitian");
  if (min_eigenvalue(choi) < -scaled_tol(choi, tol))
    throw Error("Choi matrix is not positive semidefinite (map is not completely positive)");
  const ComplexMatrix t = tr_out(choi, dim_in, dim_out);
  if (max_eigenvalue(t) > 1.0 + scaled_tol(choi, tol)) throw Error("map increases trace");
  if (require_tp && max_abs(t - identity(dim_in)) > scaled_tol(choi, tol))
    throw Error("map is not trace-preserving");
}

Povm::Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels)
    : Povm(std::move(elements), std::move(labels), unchecked) {
  if (elements_.empty()) throw Error("POVM needs at least one element");
  ComplexMatrix total = ComplexMatrix::Zero(dim_, dim_);
  for (const auto& e : elements_) {
    if (static_cast<std::size_t>(e.rows()) != dim_ || e.rows() != e.cols())
      throw Error("POVM elements must share one square dimension");
    if (!is_hermitian(e, kValidityTol)) throw Error("POVM element is not Hermitian");
    if (min_eigenvalue(e) < -kValidityTol) throw Error("POVM element is not positive semidefinite");
    total += e;
  }
  if (max_abs(total - identity(dim_)) > kValidityTol) throw Error("POVM elements do not sum to identity");
}

Povm::Povm(std::vector<ComplexMatrix> elements, std::vector<std::string> labels, Unchecked)
    : elements_(std::move(elements)), labels_(std::move(labels)) {
  dim_ = elements_.empty() ? 0 : elements_.front().rows();
  if (labels_.empty()) labels_ = default_labels(elements_.size());
  if (labels_.size() != elements_.size()) throw Error("label count does not match outcome count");
}

CpMap::CpMap(std::size_t dim_in, std::size_t dim_out, ComplexMatrix choi)
    : CpMap(dim_in, dim_out, std::move(choi), unchecked) {
  validate_choi(dim_in_, dim_out_, choi_, false);
}

CpMap::CpMap(std::size_t dim_in, std::size_t dim_out, ComplexMatrix choi, Unchecked)
    : dim_in_(dim_in), dim_out_(dim_out), choi_(std::move(choi)) {
  const auto n = static_cast<Eigen::Index>(dim_in * dim_out);
  if (choi_.rows() != n || choi_.cols() != n) throw Error("Choi matrix has the wrong size");
}

CpMap CpMap::from_kraus(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw Error("empty Kraus list");
  const std::size_t dout = kraus.front().rows(), din = kraus.front().cols();
  ComplexMatrix s = ComplexMatrix::Zero(din, din);
  for (const auto& k : kraus) {
    if (static_cast<std::size_t>(k.rows()) != dout || static_cast<std::size_t>(k.cols()) != din)
      throw Error("Kraus operators must share dimensions");
    s += k.adjoint() * k;
  }
  if (max_eigenvalue(s) > 1.0 + kValidityTol) throw Error("Kraus operators increase trace");
  CpMap m(din, dout, choi_from_kraus(kraus), unchecked);
  m.kraus_ = kraus;
  return m;
}

std::vector<ComplexMatrix> CpMap::kraus() const {
  if (kraus_) return *kraus_;
  return kraus_from_choi(choi_, dim_in_, dim_out_);
}

bool CpMap::is_trace_preserving(double tol) const {
  return max_abs(tr_out(choi_, dim_in_, dim_out_) - identity(dim_in_)) <= tol;
}

Instrument::Instrument(std::vector<CpMap> branches, std::vector<std::string> labels)
    : Instrument(std::move(branches), std::move(labels), unchecked) {
  ComplexMatrix total = ComplexMatrix::Zero(dim_in_ * dim_out_, dim_in_ * dim_out_);
  for (const auto& b : branches_) {
    validate_choi(dim_in_, dim_out_, b.choi(), false);
    total += b.choi();
  }
  validate_choi(dim_in_, dim_out_, total, true);
}

Instrument::Instrument(std::vector<CpMap> branches, std::vector<std::string> labels, Unchecked)
    : branches_(std::move(branches)), labels_(std::move(labels)) {
  if (branches_.empty()) throw Error("instrument needs at least one branch");
  dim_in_ = branches_.front().dim_in();
  dim_out_ = branches_.front().dim_out();
  for (const auto& b : branches_)
    if (b.dim_in() != dim_in_ || b.dim_out() != dim_out_)
      throw Error("instrument branches must share dimensions");
  if (labels_.empty()) labels_ = default_labels(branches_.size());
  if (labels_.size() != branches_.size()) throw Error("label count does not match outcome count");
}

Instrument Instrument::from_chois(std::size_t dim_in, std::size_t dim_out,
                                  const std::vector<ComplexMatrix>& chois,
                                  std::vector<std::string> labels) {
  std::vector<CpMap> b;
  for (const auto& j : chois) b.emplace_back(dim_in, dim_out, j, unchecked);
  return Instrument(std::move(b), std::move(labels));
}

CpMap Instrument::channel() const { return sum(branches_); }

void validate_set_alignment(const InstrumentSet& a, const InstrumentSet& b) {
  if (a.size() != b.size()) throw Error("instrument sets have different sizes");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].dim_in() != b[i].dim_in() || a[i].dim_out() != b[i].dim_out())
      throw Error("instrument sets differ in dimensions at index " + std::to_string(i));
    if (a[i].outcomes() != b[i].outcomes())
      throw Error("instrument sets differ in outcome count at index " + std::to_string(i));
  }
}

ComplexMatrix choi_of_linear_map(const std::function<ComplexMatrix(const ComplexMatrix&)>& f,
                                 std::size_t dim_in, std::size_t dim_out) {
  ComplexMatrix j = ComplexMatrix::Zero(dim_in * dim_out, dim_in * dim_out);
  ComplexMatrix e = ComplexMatrix::Zero(dim_in, dim_in);
  for (std::size_t a = 0; a < dim_in; ++a)
    for (std::size_t b = 0; b < dim_in; ++b) {
      e(a, b) = 1.0;
      const ComplexMatrix out = f(e);
      if (static_cast<std::size_t>(out.rows()) != dim_out || out.rows() != out.cols())
        throw Error("linear map returned an operator of the wrong size");
      j.block(a * dim_out, b * dim_out, dim_out, dim_out) = out;
      e(a, b) = 0.0;
    }
  return j;
}

ComplexMatrix choi_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  const std::size_t dout = kraus.front().rows(), din = kraus.front().cols();
  ComplexMatrix j = ComplexMatrix::Zero(din * dout, din * dout);
  for (const auto& k : kraus) {
    // |K⟩⟩ = sum_i |i⟩ ⊗ K|i⟩
    ComplexVector v(din * dout);
    for (std::size_t i = 0; i < din; ++i)
      for (std::size_t o = 0; o < dout; ++o) v(i * dout + o) = k(o, i);
    j += v * v.adjoint();
  }
  return j;
}

std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t dim_in,
                                           std::size_t dim_out, double cut) {
  auto e = hermitian_eigs(choi);
  std::vector<ComplexMatrix> out;
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    if (e.values(k) <= cut) break;
    const double s = std::sqrt(e.values(k));
    ComplexMatrix kr(dim_out, dim_in);
    for (std::size_t i = 0; i < dim_in; ++i)
      for (std::size_t o = 0; o < dim_out; ++o) kr(o, i) = s * e.vectors(i * dim_out + o, k);
    out.push_back(std::move(kr));
  }
  if (out.empty()) out.push_back(ComplexMatrix::Zero(dim_out, dim_in));
  return out;
}

ComplexMatrix apply_choi(const ComplexMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                         const ComplexMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != dim_in || x.rows() != x.cols())
    throw Error("apply: input has the wrong dimension");
  ComplexMatrix out = ComplexMatrix::Zero(dim_out, dim_out);
  for (std::size_t j = 0; j < dim_in; ++j)
    for (std::size_t i = 0; i < dim_in; ++i) {
      const cd w = x(j, i);
      if (w == cd(0)) continue;
      out += w * choi.block(j * dim_out, i * dim_out, dim_out, dim_out);
    }
  return out;
}

ComplexMatrix dual_apply_choi(const ComplexMatrix& choi, std::size_t dim_in,
                              std::size_t dim_out, const ComplexMatrix& b) {
  if (static_cast<std::size_t>(b.rows()) != dim_out || b.rows() != b.cols())
    throw Error("dual_apply: operator has the wrong dimension");
  ComplexMatrix out(dim_in, dim_in);
  for (std::size_t i = 0; i < dim_in; ++i)
    for (std::size_t j = 0; j < dim_in; ++j)
      // Φ†(B)_ij = Tr[Φ(|j⟩⟨i|) B]
      out(i, j) = (choi.block(j * dim_out, i * dim_out, dim_out, dim_out).transpose().cwiseProduct(b)).sum();
  return out;
}

CpMap depolarizing(std::size_t d, double t) {
  if (d < 1) throw Error("depolarizing: dimension must be positive");
  const double lo = d > 1 ? -1.0 / (double(d) * d - 1.0) : -1.0;
  if (t < lo - 1e-15 || t > 1.0 + 1e-15) throw Error("depolarizing: parameter out of range");
  ComplexVector omega = ComplexVector::Zero(d * d);
  for (std::size_t i = 0; i < d; ++i) omega(i * d + i) = 1.0;
  ComplexMatrix j = t * omega * omega.adjoint() + ((1.0 - t) / d) * identity(d * d);
  return CpMap(d, d, j, unchecked);
}

CpMap identity_channel(std::size_t d) { return depolarizing(d, 1.0); }

CpMap unitary_channel(const ComplexMatrix& u) {
  if (max_abs(u.adjoint() * u - identity(u.cols())) > 1e-9) throw Error("operator is not an isometry");
  return CpMap::from_kraus({u});
}

CpMap trash_and_prepare(std::size_t dim_in, const ComplexMatrix& sigma) {
  if (!is_hermitian(sigma) || min_eigenvalue(sigma) < -kValidityTol ||
      std::abs(sigma.trace() - 1.0) > kValidityTol)
    throw Error("trash_and_prepare: sigma is not a density matrix");
  return CpMap(dim_in, sigma.rows(), tensor(identity(dim_in), sigma), unchecked);
}

CpMap partial_trace_channel(const Dims& dims, const std::vector<std::size_t>& keep) {
  const std::size_t din = product(dims);
  std::size_t dout = 1;
  for (auto k : keep) dout *= dims.at(k);
  auto f = [&](const ComplexMatrix& x) { return partial_trace(x, dims, keep); };
  return CpMap(din, dout, choi_of_linear_map(f, din, dout), unchecked);
}

CpMap append_state(std::size_t d, const ComplexMatrix& sigma, bool front) {
  const std::size_t ds = sigma.rows();
  auto f = [&](const ComplexMatrix& x) { return front ? tensor(sigma, x) : tensor(x, sigma); };
  return CpMap(d, d * ds, choi_of_linear_map(f, d, d * ds), unchecked);
}

CpMap permutation_channel(const Dims& dims, const std::vector<std::size_t>& perm) {
  return CpMap::from_kraus({permutation_matrix(dims, perm)});
}

ComplexMatrix apply(const CpMap& m, const ComplexMatrix& rho) {
  return apply_choi(m.choi(), m.dim_in(), m.dim_out(), rho);
}

ComplexMatrix dual_apply(const CpMap& m, const ComplexMatrix& b) {
  return dual_apply_choi(m.choi(), m.dim_in(), m.dim_out(), b);
}

CpMap compose(const CpMap& second, const CpMap& first) {
  if (first.dim_out() != second.dim_in()) throw Error("compose: dimension mismatch");
  auto f = [&](const ComplexMatrix& x) { return qirt::apply(second, qirt::apply(first, x)); };
  return CpMap(first.dim_in(), second.dim_out(), choi_of_linear_map(f, first.dim_in(), second.dim_out()),
               unchecked);
}

CpMap tensor_maps(const CpMap& a, const CpMap& b) {
  const ComplexMatrix j = tensor(a.choi(), b.choi());
  const ComplexMatrix p = permute_subsystems(j, {a.dim_in(), a.dim_out(), b.dim_in(), b.dim_out()}, {0, 2, 1, 3});
  return CpMap(a.dim_in() * b.dim_in(), a.dim_out() * b.dim_out(), p, unchecked);
}

CpMap scale(const CpMap& m, double s) {
  if (s < 0) throw Error("scale: negative factor");
  return CpMap(m.dim_in(), m.dim_out(), s * m.choi(), unchecked);
}

CpMap sum(const std::vector<CpMap>& maps) {
  if (maps.empty()) throw Error("sum of an empty list of maps");
  ComplexMatrix j = maps.front().choi();
  for (std::size_t k = 1; k < maps.size(); ++k) {
    if (maps[k].dim_in() != maps[0].dim_in() || maps[k].dim_out() != maps[0].dim_out())
      throw Error("sum: dimension mismatch");
    j += maps[k].choi();
  }
  return CpMap(maps[0].dim_in(), maps[0].dim_out(), j, unchecked);
}

CpMap mix(double p, const CpMap& a, const CpMap& b) {
  if (p < 0 || p > 1) throw Error("mixing weight outside [0,1]");
  return sum({scale(a, p), scale(b, 1 - p)});
}

Povm trivial_povm(std::size_t d) { return Povm({identity(d)}, {"0"}, unchecked); }

Povm pvm_from_basis(const ComplexMatrix& u) {
  std::vector<ComplexMatrix> e;
  for (Eigen::Index k = 0; k < u.cols(); ++k) e.push_back(u.col(k) * u.col(k).adjoint());
  return Povm(e);
}

Povm computational_pvm(std::size_t d) { return pvm_from_basis(identity(d)); }

Povm induced_povm(const Instrument& inst) {
  std::vector<ComplexMatrix> e;
  const ComplexMatrix id = identity(inst.dim_out());
  for (const auto& b : inst.branches()) e.push_back(hermitian_part(dual_apply(b, id)));
  return Povm(e, inst.labels(), unchecked);
}

CpMap flag_channel(const Instrument& inst) {
  const std::size_t n = inst.outcomes();
  const std::size_t d = inst.dim_in() * inst.dim_out();
  ComplexMatrix j = ComplexMatrix::Zero(d * n, d * n);
  for (std::size_t a = 0; a < n; ++a) j += tensor(inst.branch(a).choi(), projector(n, a));
  return CpMap(inst.dim_in(), inst.dim_out() * n, j, unchecked);
}

Instrument instrument_from_flag(const CpMap& flag, std::size_t dim_out, std::size_t outcomes) {
  if (flag.dim_out() != dim_out * outcomes) throw Error("instrument_from_flag: dimension mismatch");
  const std::size_t din = flag.dim_in();
  std::vector<CpMap> branches;
  for (std::size_t a = 0; a < outcomes; ++a) {
    ComplexMatrix j(din * dim_out, din * dim_out);
    for (std::size_t r = 0; r < din * dim_out; ++r)
      for (std::size_t c = 0; c < din * dim_out; ++c) j(r, c) = flag.choi()(r * outcomes + a, c * outcomes + a);
    branches.emplace_back(din, dim_out, j, unchecked);
  }
  return Instrument(std::move(branches), {}, unchecked);
}

CpMap measure_prepare_channel(const Povm& m) {
  const std::size_t n = m.outcomes();
  ComplexMatrix j = ComplexMatrix::Zero(m.dim() * n, m.dim() * n);
  for (std::size_t a = 0; a < n; ++a) j += tensor(m.element(a).transpose(), projector(n, a));
  return CpMap(m.dim(), n, j, unchecked);
}

Instrument post_process(const Instrument& inst, const std::vector<Instrument>& processors) {
  if (processors.size() != inst.outcomes()) throw Error("post_process: one processor per outcome required");
  const auto& p0 = processors.front();
  for (const auto& p : processors) {
    if (p.dim_in() != inst.dim_out()) throw Error("post_process: processor input dimension mismatch");
    if (p.dim_out() != p0.dim_out() || p.outcomes() != p0.outcomes())
      throw Error("post_process: processors must share output dimension and outcome count");
  }
  std::vector<CpMap> out;
  for (std::size_t b = 0; b < p0.outcomes(); ++b) {
    std::vector<CpMap> terms;
    for (std::size_t a = 0; a < inst.outcomes(); ++a) terms.push_back(compose(processors[a].branch(b), inst.branch(a)));
    out.push_back(sum(terms));
  }
  return Instrument(std::move(out), p0.labels(), unchecked);
}

Povm heisenberg_measurement(const Instrument& inst, const Povm& b) {
  if (b.dim() != inst.dim_out()) throw Error("heisenberg_measurement: dimension mismatch");
  std::vector<ComplexMatrix> e;
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < inst.outcomes(); ++a)
    for (std::size_t x = 0; x < b.outcomes(); ++x) {
      e.push_back(hermitian_part(dual_apply(inst.branch(a), b.element(x))));
      labels.push_back(product_label(inst.labels()[a], b.labels()[x]));
    }
  return Povm(e, labels, unchecked);
}

Instrument enlarge_instrument(const Instrument& inst, std::size_t dim_b) {
  if (dim_b < 1) throw Error("enlarge_instrument: dim_b must be at least 1");
  const CpMap trace_b = partial_trace_channel({dim_b}, {});
  std::vector<CpMap> out;
  for (const auto& b : inst.branches()) out.push_back(tensor_maps(b, trace_b));
  return Instrument(std::move(out), inst.labels(), unchecked);
}

Instrument one_outcome(const CpMap& channel) {
  if (!channel.is_trace_preserving()) throw Error("one_outcome: map is not trace-preserving");
  return Instrument({channel}, {"0"}, unchecked);
}

Instrument lueders_instrument(const Povm& m) {
  std::vector<CpMap> b;
  for (const auto& e : m.elements()) b.push_back(CpMap::from_kraus({matrix_sqrt_psd(e)}));
  return Instrument(std::move(b), m.labels(), unchecked);
}

Instrument povm_as_instrument(const Povm& m) {
  std::vector<CpMap> b;
  for (const auto& e : m.elements()) b.emplace_back(m.dim(), 1, ComplexMatrix(e.transpose()), unchecked);
  return Instrument(std::move(b), m.labels(), unchecked);
}

Povm instrument_as_povm(const Instrument& inst) {
  if (inst.dim_out() != 1) throw Error("instrument_as_povm: output must be one-dimensional");
  std::vector<ComplexMatrix> e;
  for (const auto& b : inst.branches()) e.push_back(b.choi().transpose());
  return Povm(e, inst.labels(), unchecked);
}

Povm classical_post_process(const Povm& m, const std::vector<std::vector<double>>& table) {
  if (table.size() != m.outcomes()) throw Error("post-processing table needs one row per outcome");
  const std::size_t nz = table.front().size();
  std::vector<ComplexMatrix> e(nz, ComplexMatrix::Zero(m.dim(), m.dim()));
  for (std::size_t x = 0; x < table.size(); ++x) {
    if (table[x].size() != nz) throw Error("ragged post-processing table");
    double s = 0;
    for (std::size_t z = 0; z < nz; ++z) {
      if (table[x][z] < 0) throw Error("negative post-processing weight");
      s += table[x][z];
      e[z] += table[x][z] * m.element(x);
    }
    if (std::abs(s - 1.0) > 1e-10) throw Error("post-processing table is not row-stochastic");
  }
  return Povm(e);
}

Instrument mix(double p, const Instrument& a, const Instrument& b) {
  if (a.outcomes() != b.outcomes() || a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
    throw Error("mix: instruments are not aligned");
  std::vector<CpMap> out;
  for (std::size_t k = 0; k < a.outcomes(); ++k) out.push_back(mix(p, a.branch(k), b.branch(k)));
  return Instrument(std::move(out), a.labels(), unchecked);
}

InstrumentSet mix(double p, const InstrumentSet& a, const InstrumentSet& b) {
  validate_set_alignment(a, b);
  InstrumentSet out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(mix(p, a[i], b[i]));
  return out;
}

CpMap random_channel(std::size_t dim_in, std::size_t dim_out, Rng& rng, std::size_t kraus_rank) {
  if (kraus_rank == 0) kraus_rank = dim_in * dim_out;
  while (dim_out * kraus_rank < dim_in) ++kraus_rank;
  const ComplexMatrix v = haar_isometry(dim_out * kraus_rank, dim_in, rng);
  std::vector<ComplexMatrix> k;
  for (std::size_t r = 0; r < kraus_rank; ++r) k.push_back(v.block(r * dim_out, 0, dim_out, dim_in));
  return CpMap(dim_in, dim_out, choi_from_kraus(k), unchecked);
}

Instrument random_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes,
                             Rng& rng, std::size_t kraus_rank) {
  if (kraus_rank == 0) kraus_rank = 1;
  while (dim_out * outcomes * kraus_rank < dim_in) ++kraus_rank;
  const ComplexMatrix v = haar_isometry(dim_out * outcomes * kraus_rank, dim_in, rng);
  std::vector<CpMap> branches;
  for (std::size_t a = 0; a < outcomes; ++a) {
    std::vector<ComplexMatrix> k;
    for (std::size_t r = 0; r < kraus_rank; ++r)
      k.push_back(v.block((a * kraus_rank + r) * dim_out, 0, dim_out, dim_in));
    branches.emplace_back(dim_in, dim_out, choi_from_kraus(k), unchecked);
  }
  return Instrument(std::move(branches), {}, unchecked);
}

Povm random_povm(std::size_t d, std::size_t outcomes, Rng& rng) {
  const ComplexMatrix v = haar_isometry(outcomes * d, d, rng);
  std::vector<ComplexMatrix> e;
  for (std::size_t x = 0; x < outcomes; ++x) {
    const ComplexMatrix b = v.block(x * d, 0, d, d);
    e.push_back(hermitian_part(b.adjoint() * b));
  }
  return Povm(e, {}, unchecked);
}

}  // namespace qirt
