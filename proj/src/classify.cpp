#include "qirt/classify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qirt {

const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Member: return "Member";
    case VerdictStatus::NonMember: return "NonMember";
    case VerdictStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(Relaxation r) {
  switch (r) {
    case Relaxation::Exact: return "Exact";
    case Relaxation::PptRelaxation: return "PptRelaxation";
    case Relaxation::WitnessFamily: return "WitnessFamily";
  }
  return "?";
}

namespace {

std::size_t tuple_count(const std::vector<std::size_t>& outcomes) {
  std::size_t n = 1;
  for (auto k : outcomes) n *= k;
  return n;
}

// Digit i of tuple index t in the mixed radix given by outcomes (first index most significant).
std::size_t digit(std::size_t t, const std::vector<std::size_t>& outcomes, std::size_t i) {
  for (std::size_t j = outcomes.size(); j-- > i + 1;) t /= outcomes[j];
  return t % outcomes[i];
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Verdict from_feasibility(const SdpSolution& s, Relaxation rel, const std::string& what) {
  Verdict v;
  v.relaxation = rel;
  if (s.status == SdpStatus::Optimal) {
    v.status = VerdictStatus::Member;
    v.margin = s.margin;
    v.certificate = what + ": explicit feasible point, residual " + fmt(s.primal_residual);
  } else if (s.status == SdpStatus::Infeasible && s.margin >= kNonMemberMargin &&
             s.certificate_violation <= default_sdp_settings().certificate_tol) {
    v.status = VerdictStatus::NonMember;
    v.margin = s.margin;
    v.relaxation = Relaxation::Exact;
    v.certificate = what + ": dual infeasibility certificate, value " + fmt(s.margin) + ", violation " +
                    fmt(s.certificate_violation);
  } else {
    v.status = VerdictStatus::Inconclusive;
    v.margin = s.margin;
    v.certificate = what + ": solver status " + to_string(s.status) + " within the undecided band";
  }
  return v;
}

// Farkas multipliers of the marginal equalities, one witness operator per branch in flattened order.
void attach_witnesses(const Model& m, const std::vector<std::size_t>& handles, Verdict& v) {
  for (std::size_t h : handles) v.certificate_data.push_back(m.dual_value(h));
  v.certificate += "; witness operators per branch attached";
}

void require_common_dims(const InstrumentSet& insts, bool same_out) {
  if (insts.empty()) throw Error("empty instrument list");
  for (const auto& i : insts) {
    if (i.dim_in() != insts[0].dim_in()) throw Error("instruments must share the input dimension");
    if (same_out && i.dim_out() != insts[0].dim_out()) throw Error("instruments must share the output dimension");
  }
}

PovmSet random_incompatible_pair(Rng& rng) {
  for (;;) {
    PovmSet s{pvm_from_basis(haar_unitary(2, rng)), pvm_from_basis(haar_unitary(2, rng))};
    if (joint_measurement(s).non_member()) return s;
  }
}

}  // namespace

HermExpr dual_image(const HermExpr& choi, std::size_t dim_in, std::size_t dim_out, const ComplexMatrix& b) {
  return LinearMap::from_function(
      [&](const ComplexMatrix& j) { return hermitian_part(dual_apply_choi(j, dim_in, dim_out, b)); },
      dim_in * dim_out, dim_in)(choi);
}

BranchExprs add_tc_joint(Model& m, std::size_t dim_in, std::size_t dim_out, const std::vector<std::size_t>& outcomes) {
  const std::size_t n = tuple_count(outcomes);
  const std::size_t d = dim_in * dim_out;
  BranchExprs out(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) out[i].assign(outcomes[i], HermExpr::zero(d));
  for (std::size_t t = 0; t < n; ++t) {
    const HermExpr g = m.psd(d);
    for (std::size_t i = 0; i < outcomes.size(); ++i) out[i][digit(t, outcomes, i)] += g;
  }
  return out;
}

BranchExprs add_pc_joint(Model& m, std::size_t dim_in, const Dims& dims_out, const std::vector<std::size_t>& outcomes) {
  if (dims_out.size() != outcomes.size()) throw Error("add_pc_joint: one output dimension per instrument");
  const std::size_t n = tuple_count(outcomes);
  const std::size_t d = dim_in * product(dims_out);
  Dims dims{dim_in};
  dims.insert(dims.end(), dims_out.begin(), dims_out.end());
  std::vector<std::vector<HermExpr>> sums(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) sums[i].assign(outcomes[i], HermExpr::zero(d));
  for (std::size_t t = 0; t < n; ++t) {
    const HermExpr g = m.psd(d);
    for (std::size_t i = 0; i < outcomes.size(); ++i) sums[i][digit(t, outcomes, i)] += g;
  }
  BranchExprs out(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    for (std::size_t a = 0; a < outcomes[i]; ++a) out[i].push_back(partial_trace(sums[i][a], dims, {0, 1 + i}));
  return out;
}

void add_joint_measurement(Model& m, const std::vector<std::vector<HermExpr>>& povms) {
  if (povms.empty()) return;
  std::vector<std::size_t> outcomes;
  for (const auto& p : povms) outcomes.push_back(p.size());
  const std::size_t d = povms[0][0].dim;
  const std::size_t n = tuple_count(outcomes);
  std::vector<std::vector<HermExpr>> sums(povms.size());
  for (std::size_t i = 0; i < povms.size(); ++i) sums[i].assign(outcomes[i], HermExpr::zero(d));
  for (std::size_t t = 0; t < n; ++t) {
    const HermExpr g = m.psd(d);
    for (std::size_t i = 0; i < povms.size(); ++i) sums[i][digit(t, outcomes, i)] += g;
  }
  for (std::size_t i = 0; i < povms.size(); ++i)
    for (std::size_t x = 0; x < outcomes[i]; ++x) m.equal(sums[i][x], povms[i][x]);
}

WitnessFamily make_witness_family(std::vector<PovmSet> sets, std::string note) {
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const Verdict v = joint_measurement(sets[k]);
    if (!v.non_member()) throw Error("witness set " + std::to_string(k) + " is not certified incompatible");
  }
  return {std::move(sets), std::move(note)};
}

WitnessFamily mub_pair_family() {
  return make_witness_family({{computational_pvm(2), pvm_from_basis(hermitian_eigs(pauli_x()).vectors)}},
                             "qubit MUB pair (σz, σx)");
}

WitnessFamily default_witness_family(std::uint64_t seed) {
  const Povm z = computational_pvm(2);
  const Povm x({0.5 * (identity(2) + pauli_x()), 0.5 * (identity(2) - pauli_x())});
  const Povm y({0.5 * (identity(2) + pauli_y()), 0.5 * (identity(2) - pauli_y())});
  const Povm a({projector(2, 0), projector(2, 1)}, {"1", "2"});
  const Povm b({0.5 * (identity(2) + pauli_x()), 0.5 * (identity(2) - pauli_x())}, {"1", "2"});
  std::vector<PovmSet> sets{{z, x}, {z, x, y}, {a, b}};
  Rng rng(seed);
  for (int k = 0; k < 5; ++k) sets.push_back(random_incompatible_pair(rng));
  return make_witness_family(std::move(sets), "MUB pair, MUB triple, {|0>,|1>} vs {|+>,|->}, 5 random pairs (seed " +
                                                  std::to_string(seed) + ")");
}

Verdict is_trash_and_prepare(const Instrument& inst) {
  const std::size_t din = inst.dim_in(), dout = inst.dim_out();
  double dev = 0.0;
  std::vector<ComplexMatrix> taus;
  for (const auto& b : inst.branches()) {
    const ComplexMatrix tau = partial_trace(b.choi(), {din, dout}, {1}) / static_cast<double>(din);
    dev = std::max(dev, max_abs(b.choi() - tensor(identity(din), tau)));
    taus.push_back(tau);
  }
  Verdict v;
  if (dev <= kEqualityTol) {
    v.status = VerdictStatus::Member;
    v.certificate = "every branch Choi equals I ⊗ τ_a; τ_a listed";
    v.certificate_data = taus;
  } else if (dev > kNonMemberMargin) {
    v.status = VerdictStatus::NonMember;
    v.margin = dev;
    v.certificate = "largest entrywise deviation from I ⊗ τ_a is " + fmt(dev);
  } else {
    v.margin = dev;
    v.certificate = "deviation " + fmt(dev) + " lies in the undecided band";
  }
  return v;
}

Verdict is_entanglement_breaking(const Instrument& inst) {
  const std::size_t din = inst.dim_in(), dout = inst.dim_out();
  const bool exact = din * dout <= 6;
  double stat = std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  ComplexMatrix witness;
  for (std::size_t a = 0; a < inst.outcomes(); ++a) {
    const auto e = hermitian_eigs(partial_transpose(inst.branch(a).choi(), {din, dout}, 1));
    const double l = e.values(e.values.size() - 1);
    if (l < stat) {
      stat = l;
      worst = a;
      const ComplexMatrix vec = e.vectors.col(e.values.size() - 1);
      witness = partial_transpose(vec * vec.adjoint(), {din, dout}, 1);
    }
  }
  Verdict v;
  if (stat < -kNonMemberMargin) {
    v.status = VerdictStatus::NonMember;
    v.margin = -stat;
    v.certificate = "branch " + std::to_string(worst) + " has partial-transpose eigenvalue " + fmt(stat) +
                    "; entanglement witness attached";
    v.certificate_data = {witness};
  } else if (stat >= -kPptTol) {
    v.margin = std::max(stat, 0.0);
    if (exact) {
      v.status = VerdictStatus::Member;
      v.certificate = "all branches PPT (minimum eigenvalue " + fmt(stat) + "), sufficient for " +
                      std::to_string(din) + "x" + std::to_string(dout);
    } else {
      v.relaxation = Relaxation::PptRelaxation;
      v.certificate = "all branches PPT but " + std::to_string(din) + "x" + std::to_string(dout) +
                      " is outside the exact regime";
    }
  } else {
    v.margin = stat;
    v.relaxation = exact ? Relaxation::Exact : Relaxation::PptRelaxation;
    v.certificate = "partial-transpose eigenvalue " + fmt(stat) + " lies in the undecided band";
  }
  return v;
}

Verdict is_weak_entanglement_breaking(const Instrument& inst) {
  return is_entanglement_breaking(Instrument({inst.channel()}, {"0"}, unchecked));
}

Verdict joint_measurement(const PovmSet& povms) {
  if (povms.empty()) throw Error("joint_measurement: empty set");
  for (const auto& p : povms)
    if (p.dim() != povms[0].dim()) throw Error("joint_measurement: POVMs must share the dimension");
  Model m;
  std::vector<std::vector<HermExpr>> targets;
  for (const auto& p : povms) {
    targets.emplace_back();
    for (const auto& e : p.elements()) targets.back().push_back(HermExpr::constant_matrix(e));
  }
  add_joint_measurement(m, targets);
  const SdpSolution s = m.feasibility();
  Verdict v = from_feasibility(s, Relaxation::Exact, "joint measurement");
  if (v.member())
    for (std::size_t b = 0; b < m.problem().blocks.size(); ++b) v.certificate_data.push_back(s.block(m.problem(), b));
  return v;
}

Verdict breaks_incompatibility(const Instrument& inst, const WitnessFamily& family) {
  Verdict out;
  out.status = VerdictStatus::Member;
  out.relaxation = Relaxation::WitnessFamily;
  out.margin = std::numeric_limits<double>::infinity();
  bool inconclusive = false;
  for (std::size_t k = 0; k < family.sets.size(); ++k) {
    PovmSet images;
    for (const auto& p : family.sets[k]) {
      if (p.dim() != inst.dim_out()) throw Error("witness measurements must act on the output space");
      images.push_back(heisenberg_measurement(inst, p));
    }
    const Verdict v = joint_measurement(images);
    if (v.non_member()) {
      Verdict r = v;
      r.certificate = "witness set " + std::to_string(k) + " stays incompatible: " + v.certificate;
      return r;
    }
    if (!v.member()) inconclusive = true;
    out.margin = std::min(out.margin, v.margin);
  }
  if (family.sets.empty()) out.margin = 0.0;
  if (inconclusive) {
    out.status = VerdictStatus::Inconclusive;
    out.certificate = "some witness sets undecided (" + family.note + ")";
  } else {
    out.certificate = "every witness set becomes jointly measurable (" + family.note + ")";
  }
  return out;
}

Verdict is_weak_incompatibility_breaking(const Instrument& inst, const WitnessFamily& family) {
  return breaks_incompatibility(Instrument({inst.channel()}, {"0"}, unchecked), family);
}

Verdict is_weakly_compatible(const InstrumentSet& insts) {
  require_common_dims(insts, true);
  const ComplexMatrix c0 = insts[0].channel().choi();
  double dev = 0.0;
  for (const auto& i : insts) dev = std::max(dev, max_abs(i.channel().choi() - c0));
  Verdict v;
  if (dev <= kEqualityTol) {
    v.status = VerdictStatus::Member;
    v.certificate = "induced channels agree; common channel attached";
    v.certificate_data = {c0};
  } else if (dev > kNonMemberMargin) {
    v.status = VerdictStatus::NonMember;
    v.margin = dev;
    v.certificate = "induced channel Chois differ by " + fmt(dev);
  } else {
    v.margin = dev;
    v.certificate = "induced channels differ by " + fmt(dev) + ", inside the undecided band";
  }
  return v;
}

Verdict is_traditionally_compatible(const InstrumentSet& insts) {
  require_common_dims(insts, true);
  const std::size_t din = insts[0].dim_in(), dout = insts[0].dim_out();
  std::vector<std::size_t> outcomes;
  for (const auto& i : insts) outcomes.push_back(i.outcomes());
  Model m;
  const BranchExprs marg = add_tc_joint(m, din, dout, outcomes);
  std::vector<std::size_t> handles;
  for (std::size_t i = 0; i < insts.size(); ++i)
    for (std::size_t a = 0; a < outcomes[i]; ++a)
      handles.push_back(m.equal(marg[i][a], HermExpr::constant_matrix(insts[i].branch(a).choi())));
  const SdpSolution s = m.feasibility();
  Verdict v = from_feasibility(s, Relaxation::Exact, "joint instrument");
  if (v.member())
    for (std::size_t b = 0; b < m.problem().blocks.size(); ++b) v.certificate_data.push_back(s.block(m.problem(), b));
  if (v.non_member()) attach_witnesses(m, handles, v);
  return v;
}

Verdict is_parallel_compatible(const InstrumentSet& insts) {
  require_common_dims(insts, false);
  const std::size_t din = insts[0].dim_in();
  std::vector<std::size_t> outcomes;
  Dims douts;
  for (const auto& i : insts) {
    outcomes.push_back(i.outcomes());
    douts.push_back(i.dim_out());
  }
  Model m;
  const BranchExprs marg = add_pc_joint(m, din, douts, outcomes);
  std::vector<std::size_t> handles;
  for (std::size_t i = 0; i < insts.size(); ++i)
    for (std::size_t a = 0; a < outcomes[i]; ++a)
      handles.push_back(m.equal(marg[i][a], HermExpr::constant_matrix(insts[i].branch(a).choi())));
  const SdpSolution s = m.feasibility();
  Verdict v = from_feasibility(s, Relaxation::Exact, "parallel joint instrument");
  if (v.member())
    for (std::size_t b = 0; b < m.problem().blocks.size(); ++b) v.certificate_data.push_back(s.block(m.problem(), b));
  if (v.non_member()) attach_witnesses(m, handles, v);
  return v;
}

DepolarizingThresholds depolarizing_thresholds(std::size_t d, std::size_t n) {
  if (d < 2 || n < 2) throw Error("depolarizing_thresholds: need d >= 2 and n >= 2");
  const double dd = static_cast<double>(d), nn = static_cast<double>(n);
  DepolarizingThresholds t;
  t.eb = 1.0 / (1.0 + dd);
  t.ibc_n = (nn + dd) / (nn * (1.0 + dd));
  t.ibc = (3.0 * dd - 1.0) * std::pow(dd - 1.0, dd - 1.0) / (std::pow(dd, dd) * (dd + 1.0));
  return t;
}

}  // namespace qirt
