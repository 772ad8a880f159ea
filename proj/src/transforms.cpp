#include "qirt/transforms.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "qirt/distances.hpp"

namespace qirt {

namespace {

constexpr double kTableTol = 1e-10;

CpMap zero_map(std::size_t din, std::size_t dout) {
  return CpMap(din, dout, ComplexMatrix::Zero(din * dout, din * dout), unchecked);
}

CpMap map_from(const std::function<ComplexMatrix(const ComplexMatrix&)>& f, std::size_t din, std::size_t dout) {
  return CpMap(din, dout, choi_of_linear_map(f, din, dout), unchecked);
}

bool is_zero_map(const CpMap& m) { return max_abs(m.choi()) < 1e-15; }

// Digit j of a tuple index, first entry most significant.
std::size_t tuple_digit(std::size_t t, const std::vector<std::size_t>& radices, std::size_t j) {
  for (std::size_t k = radices.size(); k-- > j + 1;) t /= radices[k];
  return t % radices[j];
}

std::size_t tuple_count(const std::vector<std::size_t>& radices) {
  std::size_t n = 1;
  for (auto r : radices) n *= r;
  return n;
}

struct SetShape {
  std::size_t din = 0;
  std::size_t dout = 0;
};

SetShape common_shape(const InstrumentSet& set, const char* what) {
  if (set.empty()) throw Error(std::string(what) + ": empty instrument set");
  SetShape s{set[0].dim_in(), set[0].dim_out()};
  for (const auto& i : set)
    if (i.dim_in() != s.din || i.dim_out() != s.dout)
      throw Error(std::string(what) + ": set members must share input and output dimensions");
  return s;
}

constexpr std::size_t kKeep = static_cast<std::size_t>(-1);

// Compression of x onto basis state fixed_value[k] of factor k; factors marked kKeep remain.
ComplexMatrix compress(const ComplexMatrix& x, const Dims& dims, const std::vector<std::size_t>& fixed_value) {
  Dims rest;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (fixed_value[k] == kKeep) rest.push_back(dims[k]);
  const std::size_t n = product(rest);
  std::vector<std::size_t> index(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t rem = r, full = 0, stride = 1;
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t k = dims.size(), rk = rest.size(); k-- > 0;) {
      if (fixed_value[k] == kKeep) {
        --rk;
        digits[k] = rem % rest[rk];
        rem /= rest[rk];
      } else {
        digits[k] = fixed_value[k];
      }
    }
    for (std::size_t k = dims.size(); k-- > 0;) {
      full += digits[k] * stride;
      stride *= dims[k];
    }
    index[r] = full;
  }
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) = x(index[r], index[c]);
  return out;
}

Instrument sum_instrument(const Instrument& inst) { return Instrument({inst.channel()}, {"0"}, unchecked); }

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double s = 0.0;
  for (double v : p) {
    if (v < -kTableTol) throw Error("table normalization failure: negative entry in " + what);
    s += v;
  }
  if (std::abs(s - 1.0) > kTableTol) throw Error("table normalization failure: " + what + " sums to " + std::to_string(s));
}

}  // namespace

const char* to_string(Theory t) {
  switch (t) {
    case Theory::IP: return "ip";
    case Theory::EP: return "ep";
    case Theory::SEP: return "sep";
    case Theory::MIP: return "mip";
    case Theory::SMIP: return "smip";
    case Theory::TI: return "ti";
    case Theory::PI: return "pi";
  }
  return "?";
}

Theory parse_theory(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI})
    if (l == to_string(t)) return t;
  throw Error("unknown theory '" + s + "' (expected ip, ep, sep, mip, smip, ti or pi)");
}

FreeSetSpec theory_free_set(Theory t, const WitnessFamily& family) {
  switch (t) {
    case Theory::IP: return free_set(FreeClass::TP);
    case Theory::EP: return free_set(FreeClass::EB_PPT);
    case Theory::SEP: return free_set(FreeClass::WEB_PPT);
    case Theory::MIP: return free_set(FreeClass::IB_Witness, family);
    case Theory::SMIP: return free_set(FreeClass::WIB_Witness, family);
    case Theory::TI: return free_set(FreeClass::TC);
    case Theory::PI: return free_set(FreeClass::PC);
  }
  throw Error("theory_free_set: unknown theory");
}

std::vector<std::size_t> outcome_offsets(const InstrumentSet& set) {
  std::vector<std::size_t> off{0};
  for (const auto& i : set) off.push_back(off.back() + i.outcomes());
  return off;
}

InstrumentSet apply_wiring(const Wiring& w, const InstrumentSet& set) {
  const SetShape sh = common_shape(set, "apply_wiring");
  const auto off = outcome_offsets(set);
  const std::size_t q = w.ancilla;
  if (q == 0) throw Error("apply_wiring: ancilla dimension must be positive");
  if (w.post.size() != w.pre.size()) throw Error("apply_wiring: one post family per pre instrument required");
  const CpMap idq = identity_channel(q);
  std::vector<std::vector<CpMap>> lifted(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    for (const auto& b : set[i].branches()) lifted[i].push_back(tensor_maps(b, idq));

  InstrumentSet out;
  for (std::size_t j = 0; j < w.pre.size(); ++j) {
    const Instrument& pre = w.pre[j];
    const auto& post = w.post[j];
    if (pre.outcomes() != set.size()) throw Error("apply_wiring: pre instrument needs one branch per set member");
    if (pre.dim_out() != sh.din * q) throw Error("apply_wiring: pre instrument output must be H_in ⊗ Q");
    if (post.size() != off.back()) throw Error("apply_wiring: one post instrument per input outcome required");
    const std::size_t m = post[0].outcomes(), dp = post[0].dim_out();
    for (const auto& p : post)
      if (p.dim_in() != sh.dout * q || p.dim_out() != dp || p.outcomes() != m)
        throw Error("apply_wiring: post instruments must map K_out ⊗ Q to a common space with a common outcome count");
    const std::size_t dprime = pre.dim_in();
    std::vector<ComplexMatrix> acc(m, ComplexMatrix::Zero(dprime * dp, dprime * dp));
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (is_zero_map(pre.branch(i))) continue;
      for (std::size_t a = 0; a < set[i].outcomes(); ++a) {
        const CpMap mid = compose(lifted[i][a], pre.branch(i));
        const Instrument& p = post[off[i] + a];
        for (std::size_t c = 0; c < m; ++c) acc[c] += compose(p.branch(c), mid).choi();
      }
    }
    std::vector<CpMap> branches;
    for (auto& c : acc) branches.emplace_back(dprime, dp, std::move(c), unchecked);
    out.emplace_back(std::move(branches), post[0].labels(), unchecked);
  }
  return out;
}

InstrumentSet controlled_supermap(const SupermapSpec& spec, const InstrumentSet& set) {
  if (!spec.has_first() && !spec.has_second()) throw Error("controlled_supermap: empty spec");
  if (!spec.has_second()) return apply_wiring(spec.first, set);
  if (!spec.has_first()) return apply_wiring(spec.second, set);
  if (spec.q < 0.0 || spec.q > 1.0) throw Error("controlled_supermap: q must lie in [0, 1]");
  return mix(spec.q, apply_wiring(spec.first, set), apply_wiring(spec.second, set));
}

namespace {

InstrumentSet wiring_via_flags(const Wiring& w, const InstrumentSet& set) {
  const SetShape sh = common_shape(set, "controlled_supermap_via_flags");
  const auto off = outcome_offsets(set);
  const std::size_t n = set.size(), q = w.ancilla;
  std::size_t big_n = 0;
  for (const auto& i : set) big_n = std::max(big_n, i.outcomes());
  // Σ_C: H_in ⊗ I -> K ⊗ Ω ⊗ I.
  const CpMap sigma = map_from(
      [&](const ComplexMatrix& x) {
        ComplexMatrix y = ComplexMatrix::Zero(sh.dout * big_n * n, sh.dout * big_n * n);
        for (std::size_t i = 0; i < n; ++i) {
          const ComplexMatrix xi = compress(x, {sh.din, n}, {kKeep, i});
          ComplexMatrix flagged = ComplexMatrix::Zero(sh.dout * big_n, sh.dout * big_n);
          for (std::size_t a = 0; a < set[i].outcomes(); ++a)
            flagged += tensor(qirt::apply(set[i].branch(a), xi), projector(big_n, a));
          y += tensor(flagged, projector(n, i));
        }
        return y;
      },
      sh.din * n, sh.dout * big_n * n);
  const CpMap lifted = tensor_maps(sigma, identity_channel(q));
  const CpMap swap = permutation_channel({sh.din, q, n}, {0, 2, 1});
  InstrumentSet out;
  for (std::size_t j = 0; j < w.pre.size(); ++j) {
    const auto& post = w.post[j];
    const std::size_t m = post.at(0).outcomes(), dp = post[0].dim_out();
    std::vector<CpMap> post_flags;
    for (const auto& p : post) post_flags.push_back(flag_channel(p));
    const CpMap theta_post = map_from(
        [&](const ComplexMatrix& y) {
          ComplexMatrix z = ComplexMatrix::Zero(dp * m, dp * m);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < set[i].outcomes(); ++a) {
              const ComplexMatrix block = compress(y, {sh.dout, big_n, n, q}, {kKeep, a, i, kKeep});
              z += qirt::apply(post_flags[off[i] + a], block);
            }
          return z;
        },
        sh.dout * big_n * n * q, dp * m);
    const CpMap theta_pre = flag_channel(w.pre[j]);
    const CpMap total = compose(theta_post, compose(lifted, compose(swap, theta_pre)));
    Instrument inst = instrument_from_flag(total, dp, m);
    out.emplace_back(inst.branches(), post[0].labels(), unchecked);
  }
  return out;
}

}  // namespace

InstrumentSet controlled_supermap_via_flags(const SupermapSpec& spec, const InstrumentSet& set) {
  if (!spec.has_first() && !spec.has_second()) throw Error("controlled_supermap_via_flags: empty spec");
  if (!spec.has_second()) return wiring_via_flags(spec.first, set);
  if (!spec.has_first()) return wiring_via_flags(spec.second, set);
  return mix(spec.q, wiring_via_flags(spec.first, set), wiring_via_flags(spec.second, set));
}

SupermapSpec identity_spec(const InstrumentSet& set) {
  const SetShape sh = common_shape(set, "identity_spec");
  SupermapSpec spec;
  spec.first.ancilla = 1;
  for (std::size_t j = 0; j < set.size(); ++j) {
    std::vector<CpMap> pre;
    for (std::size_t i = 0; i < set.size(); ++i)
      pre.push_back(i == j ? identity_channel(sh.din) : zero_map(sh.din, sh.din));
    spec.first.pre.emplace_back(std::move(pre));
    std::vector<Instrument> post;
    const std::size_t m = set[j].outcomes();
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t a = 0; a < set[i].outcomes(); ++a) {
        const std::size_t target = i == j ? a : 0;
        std::vector<CpMap> br;
        for (std::size_t c = 0; c < m; ++c) br.push_back(c == target ? identity_channel(sh.dout) : zero_map(sh.dout, sh.dout));
        post.emplace_back(std::move(br), set[j].labels());
      }
    spec.first.post.push_back(std::move(post));
  }
  return spec;
}

namespace {

void require_slot(std::vector<SlotCheck>& out, const std::string& slot, Verdict v) {
  if (v.non_member()) throw Error("slot-class violation in " + slot + ": " + v.certificate);
  out.push_back({slot, std::move(v)});
}

// IB on the family when the output matches the family; otherwise EB, a subset of IB.
Verdict ib_slot(const Instrument& inst, const WitnessFamily& family) {
  if (!family.sets.empty() && !family.sets[0].empty() && family.sets[0][0].dim() == inst.dim_out())
    return breaks_incompatibility(inst, family);
  return is_entanglement_breaking(inst);
}

// Joint Choi dimension above which the parallel-compatibility SDP is not attempted.
constexpr std::size_t kMaxPcJointDim = 32;

Verdict pc_slot(const InstrumentSet& pre) {
  std::size_t d = pre.at(0).dim_in();
  for (const auto& i : pre) d *= i.dim_out();
  if (d <= kMaxPcJointDim) return is_parallel_compatible(pre);
  Verdict v;
  v.certificate = "joint Choi dimension " + std::to_string(d) + " exceeds " + std::to_string(kMaxPcJointDim) +
                  "; parallel compatibility not checked";
  return v;
}

std::string slot_name(const char* term, const char* kind, std::size_t j, std::size_t k = kKeep) {
  std::string s = std::string(term) + "." + kind + "[" + std::to_string(j) + "]";
  if (k != kKeep) s += "[" + std::to_string(k) + "]";
  return s;
}

}  // namespace

std::vector<SlotCheck> check_slots(Theory t, const SupermapSpec& spec, const WitnessFamily& family) {
  std::vector<SlotCheck> out;
  const Wiring& f = spec.first;
  const Wiring& s = spec.second;
  if (spec.q < 0.0 || spec.q > 1.0) throw Error("check_slots: q must lie in [0, 1]");
  auto each_pre = [&](const Wiring& w, const char* term, auto&& test) {
    for (std::size_t j = 0; j < w.pre.size(); ++j) require_slot(out, slot_name(term, "pre", j), test(w.pre[j]));
  };
  auto each_post = [&](const Wiring& w, const char* term, auto&& test) {
    for (std::size_t j = 0; j < w.post.size(); ++j)
      for (std::size_t k = 0; k < w.post[j].size(); ++k)
        require_slot(out, slot_name(term, "post", j, k), test(w.post[j][k]));
  };
  switch (t) {
    case Theory::IP:
      each_pre(f, "first", [](const Instrument& i) { return is_trash_and_prepare(i); });
      each_post(s, "second", [](const Instrument& i) { return is_trash_and_prepare(i); });
      for (std::size_t j = 0; j < s.post.size(); ++j)
        for (std::size_t k = 1; k < s.post[j].size(); ++k)
          for (std::size_t c = 0; c < s.post[j][k].outcomes(); ++c)
            if (c >= s.post[j][0].outcomes() ||
                max_abs(s.post[j][k].branch(c).choi() - s.post[j][0].branch(c).choi()) > kTableTol)
              throw Error("slot-class violation in " + slot_name("second", "post", j, k) +
                          ": trash-and-prepare post instruments must not depend on the input outcome");
      break;
    case Theory::EP:
      each_pre(f, "first", [](const Instrument& i) { return is_entanglement_breaking(i); });
      each_post(s, "second", [](const Instrument& i) { return is_entanglement_breaking(i); });
      break;
    case Theory::SEP:
      for (const Wiring* w : {&f, &s})
        each_post(*w, w == &f ? "first" : "second", [](const Instrument& i) { return is_weak_entanglement_breaking(i); });
      break;
    case Theory::MIP:
      each_pre(f, "first", [](const Instrument& i) { return is_entanglement_breaking(i); });
      each_post(s, "second", [&](const Instrument& i) { return ib_slot(i, family); });
      break;
    case Theory::SMIP:
      for (const Wiring* w : {&f, &s})
        each_post(*w, w == &f ? "first" : "second", [&](const Instrument& i) { return ib_slot(sum_instrument(i), family); });
      break;
    case Theory::PI:
      for (const Wiring* w : {&f, &s})
        if (!w->pre.empty()) require_slot(out, std::string(w == &f ? "first" : "second") + ".pre", pc_slot(w->pre));
      break;
    case Theory::TI:
      throw Error("check_slots: the ti theory uses pid_supermap");
  }
  return out;
}

InstrumentSet free_transform(Theory t, const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family) {
  check_slots(t, spec, family);
  return controlled_supermap(spec, set);
}

InstrumentSet tp_free_transform(const SupermapSpec& spec, const InstrumentSet& set) {
  return free_transform(Theory::IP, spec, set, {});
}
InstrumentSet eb_free_transform(const SupermapSpec& spec, const InstrumentSet& set) {
  return free_transform(Theory::EP, spec, set, {});
}
InstrumentSet web_free_transform(const SupermapSpec& spec, const InstrumentSet& set) {
  return free_transform(Theory::SEP, spec, set, {});
}
InstrumentSet ib_free_transform(const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family) {
  return free_transform(Theory::MIP, spec, set, family);
}
InstrumentSet wib_free_transform(const SupermapSpec& spec, const InstrumentSet& set, const WitnessFamily& family) {
  return free_transform(Theory::SMIP, spec, set, family);
}
InstrumentSet pc_free_transform(const SupermapSpec& spec, const InstrumentSet& set) {
  return free_transform(Theory::PI, spec, set, {});
}

void validate_pid_spec(const PidSpec& spec, const InstrumentSet& pid) {
  const SetShape sh = common_shape(pid, "pid_supermap");
  const std::size_t q = spec.ancilla;
  if (spec.f.dim_in() != sh.din || spec.f.dim_out() != sh.din * q)
    throw Error("pid_supermap: F must map H_in to H_in ⊗ Q");
  if (!spec.f.is_trace_preserving()) throw Error("pid_supermap: F must be trace preserving");
  if (spec.k.dim_in() != sh.dout * q) throw Error("pid_supermap: K must act on K_out ⊗ Q");
  const std::size_t jn = spec.out_outcomes.size(), ln = spec.k.outcomes(), n = pid.size();
  if (spec.q_table.size() != jn || spec.p_table.size() != jn) throw Error("pid_supermap: one table per output instrument required");
  for (std::size_t j = 0; j < jn; ++j) {
    if (spec.q_table[j].size() != ln || spec.p_table[j].size() != ln)
      throw Error("pid_supermap: tables must have one row per branch of K");
    for (std::size_t l = 0; l < ln; ++l) {
      const std::string at = "[j=" + std::to_string(j) + ", λ=" + std::to_string(l);
      if (spec.q_table[j][l].size() != n) throw Error("pid_supermap: q(i|j,λ) needs one entry per set member");
      check_distribution(spec.q_table[j][l], "q(·|j,λ) " + at + "]");
      if (spec.p_table[j][l].size() != n) throw Error("pid_supermap: p table needs one entry per set member");
      for (std::size_t i = 0; i < n; ++i) {
        if (spec.p_table[j][l][i].size() != pid[i].outcomes())
          throw Error("pid_supermap: p table needs one row per input outcome");
        for (std::size_t a = 0; a < pid[i].outcomes(); ++a) {
          if (spec.p_table[j][l][i][a].size() != spec.out_outcomes[j])
            throw Error("pid_supermap: p table row length must equal the output outcome count");
          check_distribution(spec.p_table[j][l][i][a],
                             "p(·|i,j,λ,a) " + at + ", i=" + std::to_string(i) + ", a=" + std::to_string(a) + "]");
        }
      }
    }
  }
}

InstrumentSet pid_supermap(const PidSpec& spec, const InstrumentSet& pid) {
  validate_pid_spec(spec, pid);
  const Verdict wc = is_weakly_compatible(pid);
  if (wc.non_member()) throw Error("pid_supermap: input is not weakly compatible: " + wc.certificate);
  const std::size_t q = spec.ancilla, ln = spec.k.outcomes(), din = pid[0].dim_in(), dp = spec.k.dim_out();
  const CpMap idq = identity_channel(q);
  // terms[l][i][a] = K_λ ∘ (Φ^i_a ⊗ Id_Q) ∘ F.
  std::vector<std::vector<std::vector<ComplexMatrix>>> terms(ln);
  for (std::size_t l = 0; l < ln; ++l)
    for (std::size_t i = 0; i < pid.size(); ++i) {
      terms[l].emplace_back();
      for (const auto& b : pid[i].branches())
        terms[l][i].push_back(compose(spec.k.branch(l), compose(tensor_maps(b, idq), spec.f)).choi());
    }
  InstrumentSet out;
  for (std::size_t j = 0; j < spec.out_outcomes.size(); ++j) {
    std::vector<ComplexMatrix> acc(spec.out_outcomes[j], ComplexMatrix::Zero(din * dp, din * dp));
    for (std::size_t l = 0; l < ln; ++l)
      for (std::size_t i = 0; i < pid.size(); ++i) {
        const double qi = spec.q_table[j][l][i];
        if (qi == 0.0) continue;
        for (std::size_t a = 0; a < pid[i].outcomes(); ++a)
          for (std::size_t b = 0; b < acc.size(); ++b) {
            const double w = qi * spec.p_table[j][l][i][a][b];
            if (w != 0.0) acc[b] += w * terms[l][i][a];
          }
      }
    std::vector<CpMap> br;
    for (auto& c : acc) br.emplace_back(din, dp, std::move(c), unchecked);
    out.emplace_back(std::move(br), std::vector<std::string>{}, unchecked);
  }
  return out;
}

InstrumentSet instrument_post_process(const InstrumentSet& set, const std::vector<std::vector<Instrument>>& processors) {
  if (processors.size() != set.size()) throw Error("instrument_post_process: one processor family per set member required");
  InstrumentSet out;
  for (std::size_t i = 0; i < set.size(); ++i) out.push_back(post_process(set[i], processors[i]));
  return out;
}

Instrument random_trash_prepare_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes, Rng& rng) {
  const auto p = dirichlet_uniform(outcomes, rng);
  std::vector<ComplexMatrix> chois;
  for (std::size_t a = 0; a < outcomes; ++a) chois.push_back(p[a] * tensor(identity(dim_in), random_density(dim_out, rng)));
  return Instrument::from_chois(dim_in, dim_out, chois);
}

Instrument random_measure_prepare_instrument(std::size_t dim_in, std::size_t dim_out, std::size_t outcomes, Rng& rng,
                                             std::size_t inner) {
  const Povm e = random_povm(dim_in, outcomes * inner, rng);
  std::vector<ComplexMatrix> chois;
  for (std::size_t a = 0; a < outcomes; ++a) {
    ComplexMatrix j = ComplexMatrix::Zero(dim_in * dim_out, dim_in * dim_out);
    for (std::size_t x = 0; x < inner; ++x)
      j += tensor(ComplexMatrix(e.element(a * inner + x).transpose()), random_density(dim_out, rng));
    chois.push_back(j);
  }
  return Instrument::from_chois(dim_in, dim_out, chois);
}

Instrument depolarize_output(const Instrument& inst, double t) {
  const CpMap dep = depolarizing(inst.dim_out(), t);
  std::vector<CpMap> br;
  for (const auto& b : inst.branches()) br.push_back(compose(dep, b));
  return Instrument(std::move(br), inst.labels(), unchecked);
}

JointSet random_tc_set(std::size_t dim_in, std::size_t dim_out, const std::vector<std::size_t>& outcomes, Rng& rng,
                       std::size_t kraus_rank) {
  JointSet js;
  const std::size_t tn = tuple_count(outcomes);
  js.joint = random_instrument(dim_in, dim_out, tn, rng, kraus_rank);
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    std::vector<ComplexMatrix> acc(outcomes[j], ComplexMatrix::Zero(dim_in * dim_out, dim_in * dim_out));
    for (std::size_t t = 0; t < tn; ++t) acc[tuple_digit(t, outcomes, j)] += js.joint.branch(t).choi();
    std::vector<CpMap> br;
    for (auto& c : acc) br.emplace_back(dim_in, dim_out, std::move(c), unchecked);
    js.marginals.emplace_back(std::move(br), std::vector<std::string>{}, unchecked);
  }
  return js;
}

JointSet random_pc_set(std::size_t dim_in, const Dims& dims_out, const std::vector<std::size_t>& outcomes, Rng& rng,
                       std::size_t kraus_rank) {
  if (dims_out.size() != outcomes.size()) throw Error("random_pc_set: shape mismatch");
  JointSet js;
  const std::size_t tn = tuple_count(outcomes);
  js.joint = random_instrument(dim_in, product(dims_out), tn, rng, kraus_rank);
  Dims dims{dim_in};
  dims.insert(dims.end(), dims_out.begin(), dims_out.end());
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    const std::size_t d = dim_in * dims_out[j];
    std::vector<ComplexMatrix> acc(outcomes[j], ComplexMatrix::Zero(d, d));
    for (std::size_t t = 0; t < tn; ++t)
      acc[tuple_digit(t, outcomes, j)] += partial_trace(js.joint.branch(t).choi(), dims, {0, 1 + j});
    std::vector<CpMap> br;
    for (auto& c : acc) br.emplace_back(dim_in, dims_out[j], std::move(c), unchecked);
    js.marginals.emplace_back(std::move(br), std::vector<std::string>{}, unchecked);
  }
  return js;
}

InstrumentSet random_weakly_compatible_set(std::size_t dim_in, std::size_t dim_out,
                                           const std::vector<std::size_t>& outcomes, Rng& rng, std::size_t env) {
  const ComplexMatrix v = haar_isometry(dim_out * env, dim_in, rng);
  InstrumentSet out;
  for (std::size_t n : outcomes) {
    // Sharp environment measurements keep the set away from traditional compatibility.
    Povm e;
    if (n <= env) {
      const Povm basis = pvm_from_basis(haar_unitary(env, rng));
      std::vector<std::vector<double>> table(env, std::vector<double>(n, 0.0));
      for (std::size_t x = 0; x < env; ++x) table[x][x % n] = 1.0;
      e = classical_post_process(basis, table);
    } else {
      e = random_povm(env, n, rng);
    }
    std::vector<CpMap> br;
    for (std::size_t a = 0; a < n; ++a) {
      const ComplexMatrix lift = tensor(identity(dim_out), e.element(a));
      br.push_back(map_from(
          [&](const ComplexMatrix& x) {
            return partial_trace(ComplexMatrix(lift * v * x * v.adjoint()), {dim_out, env}, {0});
          },
          dim_in, dim_out));
    }
    out.emplace_back(std::move(br));
  }
  return out;
}

InstrumentSet random_free_set(Theory t, std::size_t members, std::size_t dim, std::size_t outcomes, Rng& rng) {
  InstrumentSet out;
  switch (t) {
    case Theory::IP:
      for (std::size_t i = 0; i < members; ++i) out.push_back(random_trash_prepare_instrument(dim, dim, outcomes, rng));
      return out;
    case Theory::EP:
    case Theory::SEP:
      for (std::size_t i = 0; i < members; ++i) out.push_back(random_measure_prepare_instrument(dim, dim, outcomes, rng));
      return out;
    case Theory::MIP:
    case Theory::SMIP: {
      const double t_ib = depolarizing_thresholds(dim, 2).ibc;
      for (std::size_t i = 0; i < members; ++i)
        out.push_back(depolarize_output(random_instrument(dim, dim, outcomes, rng, 2), 0.96 * t_ib));
      return out;
    }
    case Theory::TI:
      return random_tc_set(dim, dim, std::vector<std::size_t>(members, outcomes), rng).marginals;
    case Theory::PI:
      return random_pc_set(dim, Dims(members, dim), std::vector<std::size_t>(members, outcomes), rng).marginals;
  }
  throw Error("random_free_set: unknown theory");
}

namespace {

template <class PreFn, class PostFn>
Wiring make_wiring(const SpecShape& s, PreFn&& pre, PostFn&& post) {
  Wiring w;
  w.ancilla = s.ancilla;
  for (std::size_t j = 0; j < s.out_members; ++j) {
    w.pre.push_back(pre());
    std::vector<Instrument> p;
    for (std::size_t k = 0; k < s.in_members * s.in_outcomes; ++k) p.push_back(post());
    w.post.push_back(std::move(p));
  }
  return w;
}

}  // namespace

SupermapSpec random_spec(Theory t, const SpecShape& s, double q, Rng& rng) {
  const std::size_t d = s.dim, mid = s.dim * s.ancilla;
  const double t_ib = 0.96 * depolarizing_thresholds(d, 2).ibc;
  auto any_pre = [&] { return random_instrument(d, mid, s.in_members, rng, 2); };
  auto any_post = [&] { return random_instrument(mid, d, s.out_outcomes, rng, 2); };
  auto tp_pre = [&] { return random_trash_prepare_instrument(d, mid, s.in_members, rng); };
  auto mp_pre = [&] { return random_measure_prepare_instrument(d, mid, s.in_members, rng); };
  auto mp_post = [&] { return random_measure_prepare_instrument(mid, d, s.out_outcomes, rng); };
  auto noisy_post = [&] { return depolarize_output(random_instrument(mid, d, s.out_outcomes, rng, 2), t_ib); };
  SupermapSpec spec;
  spec.q = q;
  switch (t) {
    case Theory::IP: {
      spec.first = make_wiring(s, tp_pre, any_post);
      spec.second = make_wiring(s, any_pre, any_post);
      for (auto& row : spec.second.post) {
        const Instrument shared = random_trash_prepare_instrument(mid, d, s.out_outcomes, rng);
        std::fill(row.begin(), row.end(), shared);
      }
      break;
    }
    case Theory::EP:
      spec.first = make_wiring(s, mp_pre, any_post);
      spec.second = make_wiring(s, any_pre, mp_post);
      break;
    case Theory::SEP:
      spec.first = make_wiring(s, any_pre, mp_post);
      spec.q = 1.0;
      break;
    case Theory::MIP:
      spec.first = make_wiring(s, mp_pre, any_post);
      spec.second = make_wiring(s, any_pre, noisy_post);
      break;
    case Theory::SMIP:
      spec.first = make_wiring(s, any_pre, noisy_post);
      spec.q = 1.0;
      break;
    case Theory::PI: {
      const JointSet pc = random_pc_set(d, Dims(s.out_members, mid), std::vector<std::size_t>(s.out_members, s.in_members), rng);
      std::size_t j = 0;
      spec.first = make_wiring(s, [&] { return pc.marginals[j++]; }, any_post);
      spec.q = 1.0;
      break;
    }
    case Theory::TI:
      throw Error("random_spec: the ti theory uses random_pid_spec");
  }
  return spec;
}

PidSpec sharp_pid_spec(const SpecShape& s, Rng& rng) {
  PidSpec p;
  const std::size_t d = s.dim, q = s.ancilla;
  p.ancilla = q;
  p.f = compose(append_state(d, projector(q, 0), false), unitary_channel(haar_unitary(d, rng)));
  const Povm e = pvm_from_basis(haar_unitary(q, rng));
  const ComplexMatrix v = haar_unitary(d, rng);
  std::vector<CpMap> kb;
  for (std::size_t l = 0; l < q; ++l) {
    const ComplexMatrix lift = tensor(identity(d), e.element(l));
    kb.push_back(map_from(
        [&](const ComplexMatrix& y) {
          return ComplexMatrix(v * partial_trace(ComplexMatrix(lift * y), {d, q}, {0}) * v.adjoint());
        },
        d * q, d));
  }
  p.k = Instrument(kb);
  p.out_outcomes.assign(s.out_members, s.out_outcomes);
  p.q_table.assign(s.out_members, {});
  p.p_table.assign(s.out_members, {});
  for (std::size_t j = 0; j < s.out_members; ++j)
    for (std::size_t l = 0; l < q; ++l) {
      std::vector<double> qi(s.in_members, 0.0);
      qi[j % s.in_members] = 1.0;
      p.q_table[j].push_back(qi);
      std::vector<std::vector<std::vector<double>>> rows(s.in_members);
      for (auto& r : rows)
        for (std::size_t a = 0; a < s.in_outcomes; ++a) {
          std::vector<double> pb(s.out_outcomes, 0.0);
          pb[a % s.out_outcomes] = 1.0;
          r.push_back(pb);
        }
      p.p_table[j].push_back(std::move(rows));
    }
  return p;
}

PidSpec random_pid_spec(const SpecShape& s, Rng& rng, std::size_t branches) {
  PidSpec p;
  p.ancilla = s.ancilla;
  p.f = random_channel(s.dim, s.dim * s.ancilla, rng, 2);
  p.k = random_instrument(s.dim * s.ancilla, s.dim, branches, rng, 2);
  p.out_outcomes.assign(s.out_members, s.out_outcomes);
  p.q_table.assign(s.out_members, {});
  p.p_table.assign(s.out_members, {});
  for (std::size_t j = 0; j < s.out_members; ++j)
    for (std::size_t l = 0; l < branches; ++l) {
      p.q_table[j].push_back(dirichlet_uniform(s.in_members, rng));
      std::vector<std::vector<std::vector<double>>> rows(s.in_members);
      for (auto& r : rows)
        for (std::size_t a = 0; a < s.in_outcomes; ++a) r.push_back(dirichlet_uniform(s.out_outcomes, rng));
      p.p_table[j].push_back(std::move(rows));
    }
  return p;
}

SupermapSpec canonical_spec(Theory t, const InstrumentSet& source, const InstrumentSet& target) {
  const SetShape src = common_shape(source, "canonical_spec");
  const SetShape tgt = common_shape(target, "canonical_spec");
  const std::size_t kn = outcome_offsets(source).back();
  const ComplexMatrix zero_state = projector(src.din, 0);
  SupermapSpec spec;
  Wiring w;
  auto pre_with = [&](const CpMap& branch0) {
    std::vector<CpMap> br{branch0};
    for (std::size_t i = 1; i < source.size(); ++i) br.push_back(zero_map(branch0.dim_in(), branch0.dim_out()));
    return Instrument(std::move(br));
  };
  switch (t) {
    case Theory::IP:
    case Theory::EP:
    case Theory::PI: {
      std::size_t big_m = 0;
      for (const auto& i : target) big_m = std::max(big_m, i.outcomes());
      w.ancilla = tgt.dout * big_m;
      for (const auto& tj : target) {
        w.pre.push_back(pre_with(map_from(
            [&](const ComplexMatrix& x) {
              ComplexMatrix flagged = ComplexMatrix::Zero(tgt.dout * big_m, tgt.dout * big_m);
              for (std::size_t c = 0; c < tj.outcomes(); ++c) flagged += tensor(qirt::apply(tj.branch(c), x), projector(big_m, c));
              return tensor(zero_state, flagged);
            },
            tgt.din, src.din * w.ancilla)));
        std::vector<CpMap> read;
        for (std::size_t c = 0; c < tj.outcomes(); ++c) {
          std::vector<ComplexMatrix> kraus;
          for (std::size_t r = 0; r < src.dout; ++r)
            kraus.push_back(tensor(ket(src.dout, r).adjoint(), tensor(identity(tgt.dout), ket(big_m, c).adjoint())));
          read.push_back(CpMap::from_kraus(kraus));
        }
        w.post.emplace_back(kn, Instrument(read, tj.labels()));
      }
      spec.first = std::move(w);
      spec.q = 1.0;
      return spec;
    }
    case Theory::SEP:
    case Theory::MIP:
    case Theory::SMIP: {
      w.ancilla = tgt.din;
      const CpMap drop = partial_trace_channel({src.dout, tgt.din}, {1});
      for (const auto& tj : target) {
        w.pre.push_back(pre_with(append_state(tgt.din, zero_state, true)));
        std::vector<CpMap> br;
        for (const auto& b : tj.branches()) br.push_back(compose(b, drop));
        w.post.emplace_back(kn, Instrument(br, tj.labels(), unchecked));
      }
      if (t == Theory::MIP) {
        spec.second = std::move(w);
        spec.q = 0.0;
      } else {
        spec.first = std::move(w);
        spec.q = 1.0;
      }
      return spec;
    }
    case Theory::TI:
      throw Error("canonical_spec: the ti theory uses canonical_pid_spec");
  }
  throw Error("canonical_spec: unknown theory");
}

PidSpec canonical_pid_spec(const InstrumentSet& source, const JointSet& target) {
  const SetShape src = common_shape(source, "canonical_pid_spec");
  if (target.joint.dim_in() != src.din) throw Error("canonical_pid_spec: target must act on the source input space");
  std::vector<std::size_t> radices;
  for (const auto& m : target.marginals) radices.push_back(m.outcomes());
  if (tuple_count(radices) != target.joint.outcomes()) throw Error("canonical_pid_spec: joint outcome count mismatch");
  PidSpec p;
  p.ancilla = src.din;
  p.f = append_state(src.din, projector(src.din, 0), true);
  const CpMap drop = partial_trace_channel({src.dout, src.din}, {1});
  std::vector<CpMap> kb;
  for (const auto& b : target.joint.branches()) kb.push_back(compose(b, drop));
  p.k = Instrument(kb, {}, unchecked);
  p.out_outcomes = radices;
  const std::size_t ln = target.joint.outcomes();
  for (std::size_t j = 0; j < radices.size(); ++j) {
    p.q_table.emplace_back();
    p.p_table.emplace_back();
    for (std::size_t l = 0; l < ln; ++l) {
      std::vector<double> qi(source.size(), 0.0);
      qi[0] = 1.0;
      p.q_table[j].push_back(qi);
      std::vector<std::vector<std::vector<double>>> rows(source.size());
      for (std::size_t i = 0; i < source.size(); ++i)
        for (std::size_t a = 0; a < source[i].outcomes(); ++a) {
          std::vector<double> pb(radices[j], 0.0);
          pb[tuple_digit(l, radices, j)] = 1.0;
          rows[i].push_back(pb);
        }
      p.p_table[j].push_back(std::move(rows));
    }
  }
  return p;
}

namespace {

bool two_term(Theory t) { return t == Theory::IP || t == Theory::EP || t == Theory::MIP; }

double sweep_q(std::size_t k, Rng& rng) {
  switch (k % 4) {
    case 0: return 0.0;
    case 1: return 0.5;
    case 2: return 1.0;
    default: return uniform01(rng);
  }
}

TrialRecord run_trial(Theory t, std::uint64_t trial_seed, std::size_t k, const WitnessFamily& family,
                      const FreeSetSpec& free) {
  TrialRecord r;
  r.seed = trial_seed;
  Rng rng(trial_seed);
  const SpecShape shape;
  r.q = two_term(t) ? sweep_q(k, rng) : 1.0;
  const std::vector<std::size_t> outs(shape.in_members, shape.in_outcomes);
  InstrumentSet s1, s2, t1, t2;
  if (t == Theory::TI) {
    s1 = random_weakly_compatible_set(shape.dim, shape.dim, outs, rng);
    s2 = random_weakly_compatible_set(shape.dim, shape.dim, outs, rng);
    const PidSpec spec = k % 2 ? sharp_pid_spec(shape, rng) : random_pid_spec(shape, rng);
    t1 = pid_supermap(spec, s1);
    t2 = pid_supermap(spec, s2);
  } else {
    for (std::size_t i = 0; i < shape.in_members; ++i) {
      s1.push_back(random_instrument(shape.dim, shape.dim, shape.in_outcomes, rng, 2));
      s2.push_back(random_instrument(shape.dim, shape.dim, shape.in_outcomes, rng, 2));
    }
    const SupermapSpec spec = random_spec(t, shape, r.q, rng);
    check_slots(t, spec, family);
    t1 = controlled_supermap(spec, s1);
    t2 = controlled_supermap(spec, s2);
  }
  r.distance_before = set_distance(s1, s2).value;
  r.distance_after = set_distance(t1, t2).value;
  r.measure_before = distance_measure(s1, free).value;
  r.measure_after = distance_measure(t1, free).value;
  return r;
}

}  // namespace

HarnessReport monotonicity_harness(Theory t, std::size_t trials, std::uint64_t seed, unsigned threads) {
  const WitnessFamily family = default_witness_family();
  const FreeSetSpec free = theory_free_set(t, family);
  HarnessReport rep;
  rep.theory = t;
  rep.trials = trials;
  rep.seed = seed;
  rep.free_set_note = std::string(to_string(free.tag)) + (free.note.empty() ? "" : ": " + free.note);
  rep.records.resize(trials);
  std::vector<std::exception_ptr> errors(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < trials; k = next++) {
      try {
        rep.records[k] = run_trial(t, derive_seed(seed, k), k, family, free);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(trials, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  rep.max_distance_violation = trials ? -std::numeric_limits<double>::infinity() : 0.0;
  rep.max_measure_violation = rep.max_distance_violation;
  for (const auto& r : rep.records) {
    const double dv = r.distance_after - r.distance_before, mv = r.measure_after - r.measure_before;
    rep.max_distance_violation = std::max(rep.max_distance_violation, dv);
    rep.max_measure_violation = std::max(rep.max_measure_violation, mv);
    if (dv > kMonotonicityTol || mv > kMonotonicityTol) ++rep.violations;
  }
  return rep;
}

}  // namespace qirt
