#include <doctest.h>

#include "oracles.hpp"
#include "qirt/classify.hpp"
#include "qirt/repro.hpp"
#include "qirt/transforms.hpp"

using namespace qirt;

namespace {

const Povm& pvm_z() {
  static const Povm z = computational_pvm(2);
  return z;
}

Povm unsharp_x(double eta) {
  return Povm({0.5 * (identity(2) + eta * pauli_x()), 0.5 * (identity(2) - eta * pauli_x())});
}

Instrument channel(const CpMap& c) { return one_outcome(c); }

WitnessFamily mub_family() { return make_witness_family({PovmSet{pvm_z(), unsharp_x(1.0)}}, "MUB pair"); }

WitnessFamily ab_family() { return make_witness_family({example2_pair()}, "pair (A, B)"); }

PovmSet noisy_pair(double eta) {
  const CpMap dep = depolarizing(2, eta);
  std::vector<ComplexMatrix> z, x;
  for (const auto& e : pvm_z().elements()) z.push_back(dual_apply(dep, e));
  const Povm sharp_x = unsharp_x(1.0);
  for (const auto& e : sharp_x.elements()) x.push_back(dual_apply(dep, e));
  return {Povm(z), Povm(x)};
}

}  // namespace

TEST_CASE("trash-and-prepare") {
  CHECK(is_trash_and_prepare(channel(trash_and_prepare(2, projector(2, 0)))).member());
  CHECK(is_trash_and_prepare(channel(identity_channel(2))).non_member());
  CHECK(is_trash_and_prepare(example1_instrument()).non_member());
}

TEST_CASE("entanglement breaking") {
  CHECK(is_entanglement_breaking(channel(depolarizing(2, 0.3))).member());
  const Verdict v = is_entanglement_breaking(channel(depolarizing(2, 0.34)));
  CHECK(v.non_member());
  CHECK(v.margin >= kNonMemberMargin);
  CHECK(is_entanglement_breaking(example1_instrument()).non_member());
  // Beyond 2⊗3 a passing PPT test is reported as inconclusive.
  const Verdict big = is_entanglement_breaking(channel(depolarizing(3, 0.2)));
  CHECK(big.status == VerdictStatus::Inconclusive);
  CHECK(big.relaxation == Relaxation::PptRelaxation);
  CHECK(is_entanglement_breaking(channel(depolarizing(3, 0.3))).non_member());
  // Within 1e-6 of the boundary the verdict is withheld.
  CHECK(is_entanglement_breaking(channel(depolarizing(2, 1.0 / 3.0 + 1e-8))).status == VerdictStatus::Inconclusive);
}

TEST_CASE("entanglement-breaking boundary by bisection") {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (is_entanglement_breaking(channel(depolarizing(2, mid))).non_member() ? hi : lo) = mid;
  }
  CHECK(std::abs(0.5 * (lo + hi) - 1.0 / 3.0) <= 1e-4);
}

TEST_CASE("verdicts agree with a direct PPT check") {
  Rng rng(41);
  int members = 0, non_members = 0;
  for (int k = 0; k < 40; ++k) {
    const CpMap c = compose(depolarizing(2, uniform01(rng)), random_channel(2, 2, rng));
    const double m = oracle::min_eig(oracle::transpose_second(c.choi(), 2, 2));
    const Verdict v = is_entanglement_breaking(channel(c));
    if (m > 1e-5) {
      CHECK(v.member());
      ++members;
    } else if (m < -1e-5) {
      CHECK(v.non_member());
      ++non_members;
    }
  }
  CHECK(members > 0);
  CHECK(non_members > 0);
}

TEST_CASE("weak entanglement breaking") {
  const Verdict ex1 = is_weak_entanglement_breaking(example1_instrument());
  CHECK(ex1.member());
  CHECK(is_weak_entanglement_breaking(channel(identity_channel(2))).non_member());
  Rng rng(42);
  for (int k = 0; k < 5; ++k) {
    const Instrument mp = random_measure_prepare_instrument(2, 2, 3, rng);
    REQUIRE(is_entanglement_breaking(mp).member());
    CHECK(is_weak_entanglement_breaking(mp).member());
  }
}

TEST_CASE("joint measurability") {
  const Verdict commuting = joint_measurement({pvm_z(), pvm_z()});
  CHECK(commuting.member());
  const Verdict mub = joint_measurement({pvm_z(), unsharp_x(1.0)});
  CHECK(mub.non_member());
  CHECK(mub.margin >= kNonMemberMargin);
  CHECK(joint_measurement({pvm_z(), unsharp_x(1.0 / 3.0)}).non_member());
  CHECK(joint_measurement({unsharp_x(0.5), unsharp_x(0.5)}).member());
  const Verdict at = joint_measurement(noisy_pair(2.0 / 3.0));
  CHECK(at.member());
  CHECK(at.margin >= 1e-7);
  CHECK(joint_measurement(noisy_pair(0.72)).non_member());
}

TEST_CASE("joint-measurability boundary of the noisy MUB pair") {
  double lo = 0.5, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (joint_measurement(noisy_pair(mid)).non_member() ? hi : lo) = mid;
  }
  CHECK(std::abs(0.5 * (lo + hi) - 1.0 / std::sqrt(2.0)) <= 1e-4);
}

TEST_CASE("incompatibility breaking with witness families") {
  CHECK_THROWS_AS(make_witness_family({PovmSet{pvm_z(), pvm_z()}}, "compatible"), Error);
  const Verdict ex1 = breaks_incompatibility(example1_instrument(), ab_family());
  CHECK(ex1.non_member());
  CHECK(ex1.relaxation == Relaxation::Exact);
  const Verdict dep = breaks_incompatibility(channel(depolarizing(2, 5.0 / 12.0)), mub_family());
  CHECK(dep.member());
  CHECK(dep.relaxation == Relaxation::WitnessFamily);
  Rng rng(43);
  const Instrument mp = random_measure_prepare_instrument(2, 2, 2, rng);
  CHECK(breaks_incompatibility(mp, default_witness_family()).member());
  CHECK(breaks_incompatibility(mp, ab_family()).member());
}

TEST_CASE("weak incompatibility breaking") {
  const Verdict ex1 = is_weak_incompatibility_breaking(example1_instrument(), ab_family());
  CHECK(ex1.member());
  CHECK(ex1.relaxation == Relaxation::WitnessFamily);
  CHECK(is_weak_incompatibility_breaking(example1_instrument(), default_witness_family()).member());
  CHECK(is_weak_incompatibility_breaking(channel(identity_channel(2)), mub_family()).non_member());
  CHECK(is_weak_incompatibility_breaking(channel(depolarizing(2, 0.72)), mub_family()).non_member());
}

TEST_CASE("traditional compatibility") {
  Rng rng(44);
  const Instrument a = random_instrument(2, 2, 2, rng, 2);
  CHECK(is_traditionally_compatible({a, a}).member());
  const Instrument b = random_instrument(2, 2, 2, rng, 2);
  CHECK(is_traditionally_compatible({a, b}).non_member());
  const Instrument lz = lueders_instrument(pvm_z()), lx = lueders_instrument(unsharp_x(1.0));
  CHECK(is_traditionally_compatible({lz, lx}).non_member());
  const JointSet tc = random_tc_set(2, 2, {2, 3}, rng);
  CHECK(is_traditionally_compatible(tc.marginals).member());
}

TEST_CASE("weak compatibility") {
  Rng rng(45);
  const Instrument a = random_instrument(2, 2, 2, rng, 2);
  CHECK(is_weakly_compatible({a, a}).member());
  CHECK(is_weakly_compatible({a, random_instrument(2, 2, 2, rng, 2)}).non_member());
  // Post-processings with channel-valued processors share the induced channel only when the
  // processors sum to the same channel; identity processors merely relabel.
  const Instrument relabeled = post_process(a, {Instrument({scale(identity_channel(2), 1.0)}, {"x"}),
                                                Instrument({scale(identity_channel(2), 1.0)}, {"x"})});
  CHECK(is_weakly_compatible({a, relabeled}).member());
  CHECK(is_weakly_compatible(random_weakly_compatible_set(2, 2, {2, 3}, rng)).member());
}

TEST_CASE("parallel compatibility") {
  Rng rng(46);
  const Instrument tp1 = channel(trash_and_prepare(2, random_density(2, rng)));
  const Instrument tp2 = channel(trash_and_prepare(2, random_density(3, rng)));
  CHECK(is_parallel_compatible({tp1, tp2}).member());
  const Verdict clone = is_parallel_compatible({channel(identity_channel(2)), channel(identity_channel(2))});
  CHECK(clone.non_member());
  CHECK(clone.margin >= kNonMemberMargin);
  const Instrument mp = channel(measure_prepare_channel(pvm_z()));
  CHECK(is_parallel_compatible({mp, mp}).member());
  for (int k = 0; k < 5; ++k) {
    const JointSet pc = random_pc_set(2, {2, 2}, {2, 2}, rng);
    REQUIRE(is_parallel_compatible(pc.marginals).member());
    std::vector<std::vector<Instrument>> procs(2);
    for (auto& row : procs)
      for (int a = 0; a < 2; ++a) row.push_back(random_instrument(2, 2, 2, rng, 2));
    CHECK(is_parallel_compatible(instrument_post_process(pc.marginals, procs)).member());
  }
}

TEST_CASE("classical post-processing keeps compatible sets compatible") {
  const Instrument noisy = depolarize_output(example1_instrument(), 0.5);
  const PovmSet ab = example2_pair();
  const Povm a = heisenberg_measurement(noisy, ab[0]), b = heisenberg_measurement(noisy, ab[1]);
  REQUIRE(joint_measurement({a, b}).member());
  const auto nu = example2_nu_table();
  CHECK(joint_measurement({classical_post_process(a, nu), classical_post_process(b, nu)}).member());
}

TEST_CASE("class inclusions on random qubit instruments") {
  Rng rng(47);
  const WitnessFamily fam = default_witness_family();
  int tp = 0, eb = 0, ib = 0;
  for (int k = 0; k < 100; ++k) {
    Instrument inst;
    switch (k % 4) {
      case 0: inst = random_instrument(2, 2, 2, rng, 2); break;
      case 1: inst = depolarize_output(random_instrument(2, 2, 2, rng, 2), 0.5 * uniform01(rng)); break;
      case 2: inst = random_measure_prepare_instrument(2, 2, 2, rng); break;
      default: inst = random_trash_prepare_instrument(2, 2, 2, rng); break;
    }
    const Verdict vtp = is_trash_and_prepare(inst), veb = is_entanglement_breaking(inst),
                  vweb = is_weak_entanglement_breaking(inst), vib = breaks_incompatibility(inst, fam),
                  vwib = is_weak_incompatibility_breaking(inst, fam);
    if (vtp.member()) {
      ++tp;
      CHECK(veb.member());
    }
    if (veb.member()) {
      ++eb;
      CHECK(vweb.member());
      CHECK(vib.member());
    }
    if (vib.member()) {
      ++ib;
      CHECK(vwib.member());
    }
    CHECK_FALSE((veb.non_member() && vtp.member()));
  }
  CHECK(tp >= 20);
  CHECK(eb > tp);
  CHECK(ib >= eb);
}

TEST_CASE("depolarizing thresholds") {
  const auto t = depolarizing_thresholds(2, 2);
  CHECK(t.eb == doctest::Approx(1.0 / 3.0));
  CHECK(t.ibc_n == doctest::Approx(2.0 / 3.0));
  CHECK(t.ibc == doctest::Approx(5.0 / 12.0));
  CHECK(depolarizing_thresholds(3, 2).eb == doctest::Approx(0.25));
  CHECK(depolarizing_thresholds(2, 3).ibc_n == doctest::Approx(5.0 / 9.0));
  for (std::size_t d = 2; d <= 5; ++d) {
    const auto th = depolarizing_thresholds(d, 2);
    CHECK(th.eb <= th.ibc);
    CHECK(th.ibc <= th.ibc_n);
  }
}

TEST_CASE("no-cloning witness separates the identity pair from compatible pairs") {
  const InstrumentSet ids = {channel(identity_channel(2)), channel(identity_channel(2))};
  const Verdict v = is_parallel_compatible(ids);
  REQUIRE(v.non_member());
  REQUIRE(v.certificate_data.size() == 2);
  auto score = [&](const InstrumentSet& s) {
    double total = 0.0;
    for (std::size_t i = 0; i < 2; ++i) total += (v.certificate_data[i] * s[i].branch(0).choi()).trace().real();
    return total;
  };
  const double at_ids = score(ids);
  CHECK(std::abs(at_ids) >= kNonMemberMargin);
  Rng rng(48);
  for (int k = 0; k < 10; ++k) {
    const JointSet pc = random_pc_set(2, {2, 2}, {1, 1}, rng);
    CHECK(score(pc.marginals) * at_ids <= 1e-7 * std::abs(at_ids));
  }
}
