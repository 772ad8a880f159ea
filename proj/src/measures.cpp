#include "qirt/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qirt {

const char* to_string(FreeClass c) {
  switch (c) {
    case FreeClass::TP: return "TP";
    case FreeClass::EB_PPT: return "EB_PPT";
    case FreeClass::WEB_PPT: return "WEB_PPT";
    case FreeClass::TC: return "TC";
    case FreeClass::PC: return "PC";
    case FreeClass::IB_Witness: return "IB_Witness";
    case FreeClass::WIB_Witness: return "WIB_Witness";
  }
  return "?";
}

FreeClass parse_free_class(const std::string& s) {
  std::string l;
  for (char c : s) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (l == "tp") return FreeClass::TP;
  if (l == "eb" || l == "eb_ppt") return FreeClass::EB_PPT;
  if (l == "web" || l == "web_ppt") return FreeClass::WEB_PPT;
  if (l == "tc") return FreeClass::TC;
  if (l == "pc") return FreeClass::PC;
  if (l == "ib" || l == "ib_witness") return FreeClass::IB_Witness;
  if (l == "wib" || l == "wib_witness") return FreeClass::WIB_Witness;
  throw Error("unknown free class '" + s + "'");
}

const char* to_string(BoundDirection b) {
  switch (b) {
    case BoundDirection::Exact: return "Exact";
    case BoundDirection::LowerBound: return "LowerBound";
    case BoundDirection::UpperBound: return "UpperBound";
  }
  return "?";
}

FreeSetSpec free_set(FreeClass tag) {
  if (tag == FreeClass::IB_Witness || tag == FreeClass::WIB_Witness) return free_set(tag, default_witness_family());
  FreeSetSpec f;
  f.tag = tag;
  switch (tag) {
    case FreeClass::TP: f.note = "trash-and-prepare branches I ⊗ τ_a, exact"; break;
    case FreeClass::EB_PPT: f.note = "PPT branches; exact for dim_in·dim_out ≤ 6, otherwise a superset"; break;
    case FreeClass::WEB_PPT: f.note = "PPT induced channel; exact for dim_in·dim_out ≤ 6, otherwise a superset"; break;
    case FreeClass::TC: f.note = "traditionally compatible sets, exact"; break;
    case FreeClass::PC: f.note = "parallel compatible sets, exact"; break;
    default: break;
  }
  return f;
}

FreeSetSpec free_set(FreeClass tag, WitnessFamily family) {
  FreeSetSpec f;
  f.tag = tag;
  f.family = std::move(family);
  f.note = std::string(tag == FreeClass::IB_Witness ? "branch" : "induced-channel") +
           " Heisenberg images of the witness sets jointly measurable; a superset of the exact free set (" +
           f.family.note + ")";
  return f;
}

BoundDirection bound_for(const FreeSetSpec& free, std::size_t dim_in, const Dims& dims_out) {
  switch (free.tag) {
    case FreeClass::IB_Witness:
    case FreeClass::WIB_Witness: return BoundDirection::LowerBound;
    case FreeClass::EB_PPT:
    case FreeClass::WEB_PPT:
      for (auto d : dims_out)
        if (dim_in * d > 6) return BoundDirection::LowerBound;
      return BoundDirection::Exact;
    default: return BoundDirection::Exact;
  }
}

namespace {

struct Shape {
  std::size_t din = 0;
  Dims douts;
  std::vector<std::size_t> outcomes;
};

Shape shape_of(const InstrumentSet& set) {
  if (set.empty()) throw Error("empty instrument set");
  Shape s;
  s.din = set[0].dim_in();
  for (const auto& i : set) {
    if (i.dim_in() != s.din) throw Error("instruments in a set must share the input dimension");
    s.douts.push_back(i.dim_out());
    s.outcomes.push_back(i.outcomes());
  }
  return s;
}

HermExpr out_trace(const HermExpr& e, std::size_t din, std::size_t dout) { return partial_trace(e, {din, dout}, {0}); }

std::vector<std::vector<ComplexMatrix>> extract(const Model& m, const BranchExprs& f, double scale) {
  std::vector<std::vector<ComplexMatrix>> out;
  for (const auto& inst : f) {
    out.emplace_back();
    for (const auto& e : inst) out.back().push_back(m.value(e) * scale);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

void finish(MeasureResult& r, const SdpSolution& s) {
  r.status = s.status;
  r.gap = s.gap;
  r.iterations = s.iterations;
  r.diagnostics = std::string("solver ") + to_string(s.status) + ", " + std::to_string(s.iterations) +
                  " iterations, gap " + fmt(s.gap);
}

void require_sdp_class(const FreeSetSpec& free, const char* what) {
  if (free.tag == FreeClass::IB_Witness || free.tag == FreeClass::WIB_Witness)
    throw Error(std::string(what) + " is not available for witness-relaxed free sets");
}

}  // namespace

BranchExprs add_free_cone(Model& m, const FreeSetSpec& free, std::size_t din, const Dims& douts,
                          const std::vector<std::size_t>& outcomes) {
  if (douts.size() != outcomes.size()) throw Error("add_free_cone: shape mismatch");
  if (free.tag == FreeClass::TC) {
    for (auto d : douts)
      if (d != douts[0]) throw Error("traditional compatibility needs a common output dimension");
    return add_tc_joint(m, din, douts[0], outcomes);
  }
  if (free.tag == FreeClass::PC) return add_pc_joint(m, din, douts, outcomes);
  BranchExprs f(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::size_t dout = douts[i], d = din * dout;
    for (std::size_t a = 0; a < outcomes[i]; ++a) {
      if (free.tag == FreeClass::TP) {
        f[i].push_back(kron(identity(din), m.psd(dout)));
      } else {
        f[i].push_back(m.psd(d));
        if (free.tag == FreeClass::EB_PPT) m.psd_constraint(partial_transpose(f[i].back(), {din, dout}, 1));
      }
    }
    const HermExpr total = sum(f[i]);
    if (free.tag == FreeClass::WEB_PPT) m.psd_constraint(partial_transpose(total, {din, dout}, 1));
    if (free.tag == FreeClass::IB_Witness || free.tag == FreeClass::WIB_Witness) {
      for (const auto& ws : free.family.sets) {
        std::vector<std::vector<HermExpr>> povms;
        for (const auto& meas : ws) {
          if (meas.dim() != dout) throw Error("witness measurements must act on the output space");
          povms.emplace_back();
          if (free.tag == FreeClass::IB_Witness) {
            for (std::size_t a = 0; a < outcomes[i]; ++a)
              for (const auto& e : meas.elements()) povms.back().push_back(dual_image(f[i][a], din, dout, e));
          } else {
            for (const auto& e : meas.elements()) povms.back().push_back(dual_image(total, din, dout, e));
          }
        }
        add_joint_measurement(m, povms);
      }
    }
  }
  return f;
}

MeasureResult robustness(const InstrumentSet& set, const FreeSetSpec& free) {
  require_sdp_class(free, "robustness");
  const Shape sh = shape_of(set);
  Model m;
  const HermExpr r = m.nonneg();
  const BranchExprs f = add_free_cone(m, free, sh.din, sh.douts, sh.outcomes);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t a = 0; a < sh.outcomes[i]; ++a)
      m.psd_constraint(f[i][a] - HermExpr::constant_matrix(set[i].branch(a).choi()));
    m.equal(out_trace(sum(f[i]), sh.din, sh.douts[i]), times(identity(sh.din), r + HermExpr::constant_scalar(1.0)));
  }
  m.minimize(r);
  const SdpSolution s = m.solve();
  MeasureResult res;
  finish(res, s);
  res.value = std::max(0.0, m.objective_value());
  res.optimizer = extract(m, f, 1.0 / (1.0 + res.value));
  res.bound = bound_for(free, sh.din, sh.douts);
  return res;
}

MeasureResult weight(const InstrumentSet& set, const FreeSetSpec& free) {
  require_sdp_class(free, "weight");
  const Shape sh = shape_of(set);
  Model m;
  const HermExpr s = m.nonneg();
  const BranchExprs f = add_free_cone(m, free, sh.din, sh.douts, sh.outcomes);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t a = 0; a < sh.outcomes[i]; ++a)
      m.psd_constraint(HermExpr::constant_matrix(set[i].branch(a).choi()) - f[i][a]);
    m.equal(out_trace(sum(f[i]), sh.din, sh.douts[i]), times(identity(sh.din), s));
  }
  m.maximize(s);
  const SdpSolution sol = m.solve();
  MeasureResult res;
  finish(res, sol);
  double sv = std::clamp(m.objective_value(), 0.0, 1.0);
  if (sv < kZeroWeightFraction) sv = 0.0;
  res.value = sv > 0.0 ? std::max(0.0, (1.0 - sv) / sv) : std::numeric_limits<double>::infinity();
  res.optimizer = sv > 0.0 ? extract(m, f, 1.0 / sv) : extract(m, f, 0.0);
  res.bound = bound_for(free, sh.din, sh.douts);
  res.diagnostics += ", free fraction " + fmt(sv);
  return res;
}

MeasureResult distance_measure(const InstrumentSet& set, const FreeSetSpec& free) {
  const Shape sh = shape_of(set);
  Model m;
  const HermExpr tau = m.nonneg();
  const BranchExprs f = add_free_cone(m, free, sh.din, sh.douts, sh.outcomes);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::size_t dout = sh.douts[i];
    m.equal(out_trace(sum(f[i]), sh.din, dout), HermExpr::constant_matrix(identity(sh.din)));
    std::vector<HermExpr> zs;
    for (std::size_t a = 0; a < sh.outcomes[i]; ++a) {
      const HermExpr z = m.psd(sh.din * dout);
      m.psd_constraint(z - HermExpr::constant_matrix(set[i].branch(a).choi()) + f[i][a]);
      zs.push_back(out_trace(z, sh.din, dout));
    }
    m.psd_constraint(times(identity(sh.din), tau) - sum(zs));
  }
  m.minimize(tau);
  const SdpSolution s = m.solve();
  MeasureResult res;
  finish(res, s);
  res.value = std::clamp(2.0 * m.objective_value(), 0.0, 2.0);
  res.optimizer = extract(m, f, 1.0);
  res.bound = bound_for(free, sh.din, sh.douts);
  return res;
}

MeasureResult extended_measure(const InstrumentSet& set, const FreeSetSpec& free, std::size_t max_dim_b) {
  if (max_dim_b < 1) throw Error("extended_measure: max_dim_b must be at least 1");
  MeasureResult best;
  std::string trail;
  for (std::size_t db = 1; db <= max_dim_b; ++db) {
    InstrumentSet enlarged;
    for (const auto& i : set) enlarged.push_back(enlarge_instrument(i, db));
    MeasureResult r = distance_measure(enlarged, free);
    trail += (db > 1 ? ", " : "") + std::string("dim_b=") + std::to_string(db) + ": " + fmt(r.value);
    if (db == 1 || r.value < best.value) best = r;
  }
  const BoundDirection inner = best.bound;
  best.bound = BoundDirection::UpperBound;
  best.diagnostics = "infimum over dim_b truncated at " + std::to_string(max_dim_b) + " (" + trail + ")" +
                     (inner == BoundDirection::LowerBound ? "; free set relaxed" : "") + "; " + best.diagnostics;
  return best;
}

HierarchyReport hierarchy_report(const Instrument& inst, const WitnessFamily& family) {
  HierarchyReport h;
  const InstrumentSet set{inst};
  h.relaxed = inst.dim_in() * inst.dim_out() > 6;
  h.ip = distance_measure(set, free_set(FreeClass::TP)).value;
  h.ep = distance_measure(set, free_set(FreeClass::EB_PPT)).value;
  h.sep = distance_measure(set, free_set(FreeClass::WEB_PPT)).value;
  bool witness = !family.sets.empty();
  for (const auto& s : family.sets)
    for (const auto& m : s) witness = witness && m.dim() == inst.dim_out();
  if (witness) {
    h.mip = distance_measure(set, free_set(FreeClass::IB_Witness, family)).value;
    h.smip = distance_measure(set, free_set(FreeClass::WIB_Witness, family)).value;
  }
  h.worst_slack = std::numeric_limits<double>::infinity();
  auto check = [&](double big, double small, const char* what) {
    const double slack = big - small;
    h.worst_slack = std::min(h.worst_slack, slack);
    if (slack < -kChainSlack) h.violations.push_back(std::string(what) + " violated by " + fmt(-slack));
  };
  check(h.ip, h.ep, "R_IP >= R_EP");
  check(h.ep, h.sep, "R_EP >= R_SEP");
  if (witness) {
    check(h.sep, h.smip, "R_SEP >= R_SMIP");
    check(h.ep, h.mip, "R_EP >= R_MIP");
    check(h.mip, h.smip, "R_MIP >= R_SMIP");
  }
  return h;
}

}  // namespace qirt
