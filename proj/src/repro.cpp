#include "qirt/repro.hpp"

#include <chrono>
#include <cmath>

#include "qirt/classify.hpp"
#include "qirt/distances.hpp"
#include "qirt/measures.hpp"
#include "qirt/transforms.hpp"

namespace qirt {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Published: return "published";
    case Provenance::Elementary: return "elementary";
    case Provenance::Computed: return "computed";
  }
  return "?";
}

bool ReproResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

io::json to_json(const ReproCheck& c) {
  return {{"name", c.name},           {"expected", c.expected}, {"observed", c.observed},
          {"tolerance", c.tolerance}, {"pass", c.pass},         {"provenance", to_string(c.provenance)}};
}

io::json to_json(const ReproResult& r, bool timings) {
  io::json checks = io::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  io::json j{{"id", r.id}, {"description", r.description}, {"pass", r.pass()}, {"checks", checks}};
  j["seconds"] = timings ? io::json(r.seconds) : io::json(nullptr);
  return j;
}

Instrument example1_instrument() {
  return Instrument({scale(identity_channel(2), 0.5), scale(unitary_channel(pauli_x()), 1.0 / 6.0),
                     scale(unitary_channel(pauli_y()), 1.0 / 6.0), scale(unitary_channel(pauli_z()), 1.0 / 6.0)},
                    {"1", "2", "3", "4"});
}

PovmSet example2_pair() {
  const Povm a({projector(2, 0), projector(2, 1)}, {"1", "2"});
  const Povm b({0.5 * (identity(2) + pauli_x()), 0.5 * (identity(2) - pauli_x())}, {"1", "2"});
  return {a, b};
}

std::vector<std::vector<double>> example2_nu_table() {
  // Outcome z = 1 collects (x, y) in {(1,1), (4,1), (2,2), (3,2)}; z = 2 the rest.
  std::vector<std::vector<double>> t(8, std::vector<double>(2, 0.0));
  auto idx = [](int x, int y) { return static_cast<std::size_t>((x - 1) * 2 + (y - 1)); };
  for (auto [x, y] : {std::pair{1, 1}, {4, 1}, {2, 2}, {3, 2}}) t[idx(x, y)][0] = 1.0;
  for (auto [x, y] : {std::pair{2, 1}, {3, 1}, {1, 2}, {4, 2}}) t[idx(x, y)][1] = 1.0;
  return t;
}

namespace {

using io::json;

ReproCheck equal_status(const std::string& name, const std::string& expected, const Verdict& v, Provenance p) {
  ReproCheck c;
  c.name = name;
  c.expected = expected;
  c.observed = {{"status", to_string(v.status)}, {"margin", v.margin}, {"relaxation", to_string(v.relaxation)}};
  c.pass = expected == to_string(v.status);
  c.provenance = p;
  return c;
}

ReproCheck near(const std::string& name, double expected, double observed, double tol, Provenance p) {
  ReproCheck c;
  c.name = name;
  c.expected = expected;
  c.observed = observed;
  c.tolerance = tol;
  c.pass = std::abs(expected - observed) <= tol;
  c.provenance = p;
  return c;
}

ReproCheck holds(const std::string& name, bool ok, json observed, Provenance p) {
  ReproCheck c;
  c.name = name;
  c.expected = true;
  c.observed = std::move(observed);
  c.pass = ok;
  c.provenance = p;
  return c;
}

ReproResult example1(std::uint64_t) {
  ReproResult r;
  const Instrument inst = example1_instrument();
  const Verdict eb = is_entanglement_breaking(inst);
  r.checks.push_back(equal_status("EB", "NonMember", eb, Provenance::Published));
  r.checks.push_back(holds("EB margin >= 1e-6", eb.margin >= kNonMemberMargin, eb.margin, Provenance::Computed));
  r.checks.push_back(equal_status("WEB", "Member", is_weak_entanglement_breaking(inst), Provenance::Published));
  r.checks.push_back(
      near("induced channel = depolarizing(2, 1/3)", 0.0, max_abs(inst.channel().choi() - depolarizing(2, 1.0 / 3.0).choi()),
           1e-12, Provenance::Published));
  r.checks.push_back(equal_status("TP", "NonMember", is_trash_and_prepare(inst), Provenance::Elementary));
  return r;
}

ReproResult example2(std::uint64_t) {
  ReproResult r;
  const Instrument inst = example1_instrument();
  const PovmSet ab = example2_pair();
  const Povm ia = heisenberg_measurement(inst, ab[0]);
  const Povm ib = heisenberg_measurement(inst, ab[1]);
  const ComplexMatrix k0 = projector(2, 0), k1 = projector(2, 1);
  const ComplexMatrix kp = 0.5 * (identity(2) + pauli_x()), km = 0.5 * (identity(2) - pauli_x());
  // Rows (x, y) in heisenberg_measurement order; columns I†[A](x,y), I†[B](x,y).
  const double h = 0.5, s = 1.0 / 6.0;
  const std::vector<std::pair<ComplexMatrix, ComplexMatrix>> table{
      {h * k0, h * kp}, {h * k1, h * km}, {s * k1, s * kp}, {s * k0, s * km},
      {s * k1, s * km}, {s * k0, s * kp}, {s * k0, s * km}, {s * k1, s * kp}};
  double dev = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    dev = std::max(dev, max_abs(ia.element(k) - table[k].first));
    dev = std::max(dev, max_abs(ib.element(k) - table[k].second));
  }
  r.checks.push_back(near("16 Heisenberg POVM elements", 0.0, dev, 1e-10, Provenance::Published));
  const Povm m = classical_post_process(ia, example2_nu_table());
  const Povm n = classical_post_process(ib, example2_nu_table());
  bool pvm = true;
  for (const auto& e : m.elements()) pvm = pvm && max_abs(e * e - e) <= 1e-10;
  r.checks.push_back(holds("M is PVM", pvm, pvm, Provenance::Published));
  r.checks.push_back(near("N(1) = (2/3)|+><+| + (1/3)|-><-|", 0.0,
                          max_abs(n.element(0) - ((2.0 / 3.0) * kp + (1.0 / 3.0) * km)), 1e-10, Provenance::Published));
  const Verdict mn = joint_measurement({m, n});
  r.checks.push_back(equal_status("pair (M,N) incompatible", "NonMember", mn, Provenance::Published));
  r.checks.push_back(holds("(M,N) certificate margin >= 1e-6", mn.margin >= kNonMemberMargin, mn.margin,
                           Provenance::Computed));
  const WitnessFamily fam = make_witness_family({ab}, "pair (A, B)");
  r.checks.push_back(equal_status("IB with witness (A,B)", "NonMember", breaks_incompatibility(inst, fam),
                                  Provenance::Published));
  r.checks.push_back(equal_status("WIB with witness (A,B)", "Member", is_weak_incompatibility_breaking(inst, fam),
                                  Provenance::Published));
  return r;
}

ReproResult thresholds(std::uint64_t) {
  ReproResult r;
  const DepolarizingThresholds t = depolarizing_thresholds(2, 2);
  r.checks.push_back(near("eb = 1/(1+d)", 1.0 / 3.0, t.eb, 1e-15, Provenance::Published));
  r.checks.push_back(near("ibc_2 = (n+d)/(n(1+d))", 2.0 / 3.0, t.ibc_n, 1e-15, Provenance::Published));
  r.checks.push_back(near("ibc = (3d-1)(d-1)^(d-1)/(d^d(d+1))", 5.0 / 12.0, t.ibc, 1e-15, Provenance::Published));
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (is_entanglement_breaking(one_outcome(depolarizing(2, mid))).non_member())
      hi = mid;
    else
      lo = mid;
  }
  r.checks.push_back(near("EB boundary of depolarizing(2, t)", 1.0 / 3.0, 0.5 * (lo + hi), 1e-4, Provenance::Published));
  const Povm z = computational_pvm(2);
  const Povm x({0.5 * (identity(2) + pauli_x()), 0.5 * (identity(2) - pauli_x())});
  auto pair_at = [&](double eta) {
    const CpMap dep = depolarizing(2, eta);
    std::vector<ComplexMatrix> ez, ex;
    for (const auto& e : z.elements()) ez.push_back(dual_apply(dep, e));
    for (const auto& e : x.elements()) ex.push_back(dual_apply(dep, e));
    return PovmSet{Povm(ez), Povm(ex)};
  };
  const Verdict at23 = joint_measurement(pair_at(2.0 / 3.0));
  r.checks.push_back(equal_status("σz/σx through depolarizing(2, 2/3) jointly measurable", "Member", at23,
                                  Provenance::Published));
  r.checks.push_back(equal_status("σz/σx through depolarizing(2, 0.72) not jointly measurable", "NonMember",
                                  joint_measurement(pair_at(0.72)), Provenance::Computed));
  return r;
}

ReproResult diamond(std::uint64_t seed) {
  ReproResult r;
  r.checks.push_back(near("D(Id, depolarizing(2, 0))", 1.5, diamond_distance(identity_channel(2), depolarizing(2, 0.0)).value,
                          1e-6, Provenance::Computed));
  Rng rng(seed);
  double worst = -1.0;
  for (int k = 0; k < 5; ++k) {
    const CpMap a = random_channel(2, 2, rng), b = random_channel(2, 2, rng);
    const double sdp = diamond_distance(a, b).value;
    const double lb = diamond_lower_bound(a, b, 64, derive_seed(seed, k)).value;
    worst = std::max(worst, lb - sdp);
  }
  r.checks.push_back(holds("sampled lower bound <= SDP value + 1e-7", worst <= 1e-7, worst, Provenance::Elementary));
  return r;
}

ReproResult hierarchy(std::uint64_t seed) {
  ReproResult r;
  const WitnessFamily fam = default_witness_family();
  std::vector<std::pair<std::string, Instrument>> cases{{"example-1", example1_instrument()},
                                                        {"identity", one_outcome(identity_channel(2))}};
  Rng rng(seed);
  for (int k = 0; k < 3; ++k) cases.emplace_back("random " + std::to_string(k), random_instrument(2, 2, 2, rng, 2));
  for (const auto& [name, inst] : cases) {
    const HierarchyReport h = hierarchy_report(inst, fam);
    json obs{{"ip", h.ip}, {"ep", h.ep}, {"sep", h.sep}, {"mip", h.mip}, {"smip", h.smip}, {"worst_slack", h.worst_slack}};
    r.checks.push_back(holds("chains hold for " + name, h.ok(), obs, Provenance::Published));
  }
  return r;
}

ReproResult no_cloning(std::uint64_t) {
  ReproResult r;
  const Instrument id = one_outcome(identity_channel(2));
  r.checks.push_back(equal_status("PC(Id, Id)", "NonMember", is_parallel_compatible({id, id}), Provenance::Computed));
  const Instrument lz = lueders_instrument(computational_pvm(2));
  const Instrument lx = lueders_instrument(pvm_from_basis(hermitian_eigs(pauli_x()).vectors));
  r.checks.push_back(equal_status("weak compatibility of Lüders σz, σx", "NonMember", is_weakly_compatible({lz, lx}),
                                  Provenance::Elementary));
  r.checks.push_back(equal_status("TC of Lüders σz, σx", "NonMember", is_traditionally_compatible({lz, lx}),
                                  Provenance::Published));
  Rng rng(kDefaultSeed);
  const JointSet target = random_tc_set(2, 2, {2, 2}, rng);
  std::string reason;
  try {
    pid_supermap(canonical_pid_spec({lz, lx}, target), {lz, lx});
  } catch (const Error& e) {
    reason = e.what();
  }
  r.checks.push_back(holds("instrument-compatibility transformation rejects Lüders σz, σx", !reason.empty(), reason,
                           Provenance::Elementary));
  return r;
}

ReproResult reachability(std::uint64_t seed) {
  ReproResult r;
  Rng rng(seed);
  const WitnessFamily fam = default_witness_family();
  auto err = [](const InstrumentSet& a, const InstrumentSet& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a[i].outcomes(); ++k) m = std::max(m, max_abs(a[i].branch(k).choi() - b[i].branch(k).choi()));
    return m;
  };
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::PI}) {
    const InstrumentSet src = random_free_set(t, 2, 2, 2, rng);
    const InstrumentSet tgt = random_free_set(t, 2, 2, 2, rng);
    const InstrumentSet out = free_transform(t, canonical_spec(t, src, tgt), src, fam);
    r.checks.push_back(near(std::string("canonical ") + to_string(t) + " construction reaches target", 0.0, err(out, tgt),
                            1e-9, Provenance::Published));
  }
  const InstrumentSet src = random_weakly_compatible_set(2, 2, {2, 2}, rng);
  const JointSet tgt = random_tc_set(2, 2, {2, 2}, rng);
  r.checks.push_back(near("canonical ti construction reaches target", 0.0,
                          err(pid_supermap(canonical_pid_spec(src, tgt), src), tgt.marginals), 1e-9, Provenance::Published));
  return r;
}

ReproResult harness(std::uint64_t seed) {
  ReproResult r;
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI}) {
    const HarnessReport h = monotonicity_harness(t, 2, seed);
    json obs{{"max_distance_violation", h.max_distance_violation}, {"max_measure_violation", h.max_measure_violation},
             {"violations", h.violations}};
    ReproCheck c = holds(std::string("monotonicity under ") + to_string(t) + " free transformations", h.ok(), obs,
                         Provenance::Published);
    c.tolerance = kMonotonicityTol;
    r.checks.push_back(c);
  }
  return r;
}

}  // namespace

const std::vector<ReproCase>& repro_cases() {
  static const std::vector<ReproCase> cases{
      {"example-1", "four-outcome qubit instrument: weak but not strong entanglement breaking", example1},
      {"example-2", "Heisenberg images of (A, B), ν post-processing and incompatibility", example2},
      {"thresholds", "depolarizing thresholds and the joint-measurability boundary", thresholds},
      {"diamond", "diamond distance closed form and sampled lower bounds", diamond},
      {"hierarchy", "measure hierarchy chains on worked and random instruments", hierarchy},
      {"no-cloning", "parallel and traditional compatibility sanity checks", no_cloning},
      {"reachability", "canonical free transformations reach prescribed free targets", reachability},
      {"harness", "two-trial monotonicity harness for every theory", harness},
  };
  return cases;
}

std::vector<ReproResult> repro_all(std::uint64_t seed, const std::string& only) {
  std::vector<ReproResult> out;
  bool found = only.empty();
  for (const auto& c : repro_cases()) {
    if (!only.empty() && c.id != only) continue;
    found = true;
    const auto t0 = std::chrono::steady_clock::now();
    ReproResult r = c.run(seed);
    r.id = c.id;
    r.description = c.description;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  if (!found) throw Error("unknown repro case '" + only + "'");
  return out;
}

}  // namespace qirt
