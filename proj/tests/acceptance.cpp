#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "qirt/classify.hpp"
#include "qirt/distances.hpp"
#include "qirt/measures.hpp"
#include "qirt/repro.hpp"
#include "qirt/transforms.hpp"

using namespace qirt;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

Instrument channel(const CpMap& c) { return one_outcome(c); }

ComplexMatrix ket_bra(double a0, double a1) {
  ComplexMatrix v(2, 1);
  v << a0, a1;
  return v * v.adjoint();
}

PovmSet noisy_pair(double t) {
  const CpMap dep = depolarizing(2, t);
  const ComplexMatrix k0 = ket_bra(1, 0), k1 = ket_bra(0, 1);
  const double r = 1.0 / std::sqrt(2.0);
  const ComplexMatrix kp = ket_bra(r, r), km = ket_bra(r, -r);
  return {Povm({dual_apply(dep, k0), dual_apply(dep, k1)}), Povm({dual_apply(dep, kp), dual_apply(dep, km)})};
}

void criterion1(Outcome& o) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (is_entanglement_breaking(channel(depolarizing(2, mid))).non_member() ? hi : lo) = mid;
  }
  const double b = 0.5 * (lo + hi);
  o.detail << "boundary " << b;
  o.require(std::abs(b - 1.0 / 3.0) <= 1e-4, "boundary within 1e-4 of 1/3");
}

void criterion2(Outcome& o) {
  const Instrument inst = example1_instrument();
  const Verdict eb = is_entanglement_breaking(inst);
  const Verdict web = is_weak_entanglement_breaking(inst);
  o.detail << "EB " << to_string(eb.status) << " margin " << eb.margin << ", WEB " << to_string(web.status) << " margin "
           << web.margin;
  o.require(eb.non_member() && eb.margin >= 1e-6, "EB NonMember with margin >= 1e-6");
  o.require(web.member() && web.margin >= 1e-6, "WEB Member with margin >= 1e-6");
}

void criterion3(Outcome& o) {
  const Instrument inst = example1_instrument();
  const PovmSet ab = example2_pair();
  const Povm ia = heisenberg_measurement(inst, ab[0]), ib = heisenberg_measurement(inst, ab[1]);
  const double r = 1.0 / std::sqrt(2.0), h = 0.5, s = 1.0 / 6.0;
  const ComplexMatrix k0 = ket_bra(1, 0), k1 = ket_bra(0, 1), kp = ket_bra(r, r), km = ket_bra(r, -r);
  // Published table keyed by (x, y): instrument outcome x, measurement outcome y.
  const std::map<std::pair<int, int>, std::pair<ComplexMatrix, ComplexMatrix>> table{
      {{1, 1}, {h * k0, h * kp}}, {{2, 1}, {s * k1, s * kp}}, {{3, 1}, {s * k1, s * km}}, {{4, 1}, {s * k0, s * km}},
      {{1, 2}, {h * k1, h * km}}, {{2, 2}, {s * k0, s * km}}, {{3, 2}, {s * k0, s * kp}}, {{4, 2}, {s * k1, s * kp}}};
  double dev = 0.0;
  for (const auto& [xy, ops] : table) {
    const std::string label = "(" + std::to_string(xy.first) + "," + std::to_string(xy.second) + ")";
    std::size_t k = ia.outcomes();
    for (std::size_t j = 0; j < ia.outcomes(); ++j)
      if (ia.labels()[j] == label) k = j;
    o.require(k < ia.outcomes() && ib.labels()[k] == label, "outcome " + label + " present");
    if (k >= ia.outcomes()) continue;
    dev = std::max({dev, max_abs(ia.element(k) - ops.first), max_abs(ib.element(k) - ops.second)});
  }
  o.detail << "table deviation " << dev;
  o.require(dev <= 1e-10, "16 elements within 1e-10");

  std::vector<std::vector<double>> nu(8, std::vector<double>(2, 0.0));
  auto idx = [&](int x, int y) {
    for (std::size_t j = 0; j < ia.outcomes(); ++j)
      if (ia.labels()[j] == "(" + std::to_string(x) + "," + std::to_string(y) + ")") return j;
    return std::size_t{0};
  };
  for (auto [x, y] : {std::pair{1, 1}, {4, 1}, {2, 2}, {3, 2}}) nu[idx(x, y)][0] = 1.0;
  for (auto [x, y] : {std::pair{2, 1}, {3, 1}, {1, 2}, {4, 2}}) nu[idx(x, y)][1] = 1.0;
  const Povm m = classical_post_process(ia, nu), n = classical_post_process(ib, nu);
  o.require(max_abs(n.element(0) - ((2.0 / 3.0) * kp + (1.0 / 3.0) * km)) <= 1e-10, "N(1)");
  const Verdict mn = joint_measurement({m, n});
  o.detail << ", (M,N) " << to_string(mn.status) << " margin " << mn.margin;
  o.require(mn.non_member() && mn.margin >= 1e-6, "(M,N) incompatible with margin >= 1e-6");
  const Verdict ib_v = breaks_incompatibility(inst, make_witness_family({ab}, "pair (A, B)"));
  o.detail << ", IB " << to_string(ib_v.status);
  o.require(ib_v.non_member(), "IB NonMember");
}

void criterion4(Outcome& o) {
  const Verdict in = joint_measurement(noisy_pair(2.0 / 3.0));
  const Verdict out = joint_measurement(noisy_pair(0.72));
  o.detail << "t=2/3 " << to_string(in.status) << " margin " << in.margin << ", t=0.72 " << to_string(out.status);
  o.require(in.member() && in.margin >= 1e-7, "t = 2/3 jointly measurable with margin >= 1e-7");
  o.require(out.non_member(), "t = 0.72 incompatible");
}

void criterion5(Outcome& o) {
  const double d = diamond_distance(identity_channel(2), depolarizing(2, 0.0)).value;
  o.detail << "D(Id, dep0) " << d;
  o.require(std::abs(d - 1.5) <= 1e-6, "closed form 1.5");
  Rng rng(5005);
  double worst_excess = -1.0, worst_ratio = 1e9;
  for (int k = 0; k < 20; ++k) {
    const CpMap a = random_channel(2, 2, rng), b = random_channel(2, 2, rng);
    const double sdp = diamond_distance(a, b).value;
    const double lb = diamond_lower_bound(a, b, 200, 5005 + k).value;
    worst_excess = std::max(worst_excess, lb - sdp);
    worst_ratio = std::min(worst_ratio, lb / sdp);
  }
  o.detail << ", worst lb - sdp " << worst_excess << ", worst lb/sdp " << worst_ratio;
  o.require(worst_excess <= 1e-7, "lower bound <= SDP + 1e-7");
  o.require(worst_ratio >= 0.9, "lower bound >= 0.9 SDP");
}

InstrumentSet random_set(Rng& rng) { return {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)}; }

void criterion6(Outcome& o) {
  Rng rng(6006);
  double worst = -1.0;
  for (int k = 0; k < 100; ++k) {
    const InstrumentSet a = random_set(rng), b = random_set(rng);
    std::vector<std::vector<Instrument>> procs(2);
    for (auto& row : procs)
      for (int x = 0; x < 2; ++x) row.push_back(random_instrument(2, 2, 2, rng, 2));
    const double before = set_distance(a, b).value;
    const double after = set_distance(instrument_post_process(a, procs), instrument_post_process(b, procs)).value;
    worst = std::max(worst, after - before);
  }
  double worst_convex = -1.0;
  for (int k = 0; k < 50; ++k) {
    const InstrumentSet a1 = random_set(rng), a2 = random_set(rng), b1 = random_set(rng), b2 = random_set(rng);
    const double p = uniform01(rng);
    const double lhs = set_distance(mix(p, a1, a2), mix(p, b1, b2)).value;
    const double rhs = p * set_distance(a1, b1).value + (1 - p) * set_distance(a2, b2).value;
    worst_convex = std::max(worst_convex, lhs - rhs);
  }
  o.detail << "max post-processing increase " << worst << ", max convexity excess " << worst_convex;
  o.require(worst <= 1e-7, "post-processing contraction");
  o.require(worst_convex <= 1e-7, "joint convexity");
}

void criterion7(Outcome& o) {
  Rng rng(7007);
  const FreeSetSpec tc = free_set(FreeClass::TC);
  double worst = 1e9;
  for (int k = 0; k < 20; ++k) {
    const InstrumentSet set = random_set(rng);
    const double ext = extended_measure(set, tc).value;
    const double dm = distance_measure(set, tc).value;
    const double r = robustness(set, tc).value;
    const double w = weight(set, tc).value;
    const double cap = std::min(2.0 * r / (1.0 + r), std::isinf(w) ? 2.0 : 2.0 * w / (1.0 + w));
    worst = std::min({worst, dm - ext, cap - dm});
  }
  o.detail << "worst slack " << worst;
  o.require(worst >= -1e-6, "slack >= -1e-6");
}

void criterion8(Outcome& o) {
  Rng rng(8008);
  const WitnessFamily fam = default_witness_family();
  double worst = 1e9;
  bool relaxed = false;
  for (int k = 0; k < 20; ++k) {
    const HierarchyReport h = hierarchy_report(random_instrument(2, 2, 2 + k % 3, rng, 2), fam);
    relaxed = relaxed || h.relaxed;
    worst = std::min({worst, h.ip - h.ep, h.ep - h.sep, h.sep - h.smip});
  }
  o.detail << "worst slack " << worst;
  o.require(!relaxed, "exact PPT regime");
  o.require(worst >= -1e-6, "slack >= -1e-6");
}

void criterion9(Outcome& o) {
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI}) {
    const HarnessReport h = monotonicity_harness(t, 25, kDefaultSeed);
    o.detail << to_string(t) << " " << h.max_measure_violation << "; ";
    o.require(h.trials == 25 && h.max_measure_violation <= 1e-7 && h.ok(), std::string("theory ") + to_string(t));
  }
}

void criterion10(Outcome& o) {
  const Verdict clone = is_parallel_compatible({channel(identity_channel(2)), channel(identity_channel(2))});
  o.detail << "PC(Id, Id) " << to_string(clone.status) << " margin " << clone.margin;
  o.require(clone.non_member() && clone.margin >= 1e-6 && !clone.certificate_data.empty(),
            "PC(Id, Id) NonMember with certificate");
  const PovmSet ab = example2_pair();
  std::vector<InstrumentSet> sets = {{lueders_instrument(ab[0]), lueders_instrument(ab[1])}};
  Rng rng(1010);
  for (int k = 0; k < 5; ++k) sets.push_back(random_set(rng));
  int rejected = 0;
  for (const auto& s : sets) {
    if (!is_weakly_compatible(s).non_member()) continue;
    o.require(is_traditionally_compatible(s).non_member(), "TC rejects a non-weakly-compatible set");
    ++rejected;
  }
  o.detail << ", rejected " << rejected << "/" << sets.size();
  o.require(rejected == static_cast<int>(sets.size()), "every probe set violates weak compatibility");
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, const char*, double, std::function<void(Outcome&)>>> criteria = {
      {1, "EB threshold", 5, criterion1},
      {2, "Example 1 EB/WEB", 5, criterion2},
      {3, "Example 2 table and incompatibility", 10, criterion3},
      {4, "threshold consistency", 10, criterion4},
      {5, "diamond cross-validation", 60, criterion5},
      {6, "contractivity", 300, criterion6},
      {7, "bound chain", 300, criterion7},
      {8, "hierarchy chains", 600, criterion8},
      {9, "monotonicity harness", 600, criterion9},
      {10, "no-cloning", 5, criterion10},
  };
  int failures = 0;
  for (const auto& [id, name, limit, fn] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit) {
      o.pass = false;
      o.detail << " [over time limit " << limit << " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s): %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
