#include <doctest.h>

#include "oracles.hpp"
#include "qirt/distances.hpp"
#include "qirt/repro.hpp"
#include "qirt/transforms.hpp"

using namespace qirt;

namespace {

double set_gap(const InstrumentSet& a, const InstrumentSet& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].outcomes() == b[i].outcomes());
    for (std::size_t k = 0; k < a[i].outcomes(); ++k)
      worst = std::max(worst, oracle::max_diff(a[i].branch(k).choi(), b[i].branch(k).choi()));
  }
  return worst;
}

const std::vector<Theory> kSupermapTheories = {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::PI};

InstrumentSet lueders_zx() {
  const PovmSet ab = example2_pair();
  return {lueders_instrument(ab[0]), lueders_instrument(ab[1])};
}

}  // namespace

TEST_CASE("theory names") {
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI})
    CHECK(parse_theory(to_string(t)) == t);
  CHECK_THROWS_AS(parse_theory("xx"), Error);
}

TEST_CASE("identity wiring reproduces the input") {
  Rng rng(61);
  const InstrumentSet set = {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 3, rng, 2)};
  const SupermapSpec id = identity_spec(set);
  CHECK(set_gap(controlled_supermap(id, set), set) <= 1e-10);
  CHECK(set_gap(controlled_supermap_via_flags(id, set), set) <= 1e-10);
  const auto off = outcome_offsets(set);
  CHECK(off == std::vector<std::size_t>{0, 2, 5});
}

TEST_CASE("flag-channel realization matches the controlled wiring") {
  Rng rng(62);
  const SpecShape shape;
  for (Theory t : kSupermapTheories) {
    CAPTURE(to_string(t));
    const InstrumentSet set = {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)};
    const SupermapSpec spec = random_spec(t, shape, 0.4, rng);
    CHECK(set_gap(controlled_supermap(spec, set), controlled_supermap_via_flags(spec, set)) <= 1e-9);
  }
}

TEST_CASE("swap wiring exchanges tensor factors") {
  const ComplexMatrix a = projector(2, 0), b = 0.5 * (identity(3) + 0.2 * (projector(3, 1) - projector(3, 2)));
  const CpMap swap = permutation_channel({2, 3}, {1, 0});
  CHECK(swap.dim_in() == 6);
  CHECK(oracle::max_diff(qirt::apply(swap, tensor(a, b)), tensor(b, a)) <= 1e-12);
  CHECK(swap.is_trace_preserving());
}

TEST_CASE("controlled wiring is trace preserving on every output") {
  Rng rng(63);
  const SpecShape shape{2, 2, 2, 2, 3, 3};
  for (Theory t : kSupermapTheories) {
    const InstrumentSet set = {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)};
    const InstrumentSet out = controlled_supermap(random_spec(t, shape, 0.7, rng), set);
    REQUIRE(out.size() == 3);
    for (const auto& inst : out) {
      CHECK(inst.outcomes() == 3);
      CHECK(inst.channel().is_trace_preserving(1e-8));
    }
  }
}

TEST_CASE("random specs pass their slot checks") {
  Rng rng(64);
  const WitnessFamily fam = default_witness_family();
  for (Theory t : kSupermapTheories) {
    CAPTURE(to_string(t));
    for (const auto& s : check_slots(t, random_spec(t, SpecShape{}, 0.5, rng), fam)) {
      CAPTURE(s.slot);
      CHECK_FALSE(s.verdict.non_member());
    }
  }
}

TEST_CASE("slot violations throw") {
  Rng rng(65);
  SupermapSpec spec = random_spec(Theory::IP, SpecShape{}, 1.0, rng);
  const CpMap pass = scale(append_state(2, projector(2, 0), false), 0.5);
  for (auto& pre : spec.first.pre) pre = Instrument({pass, pass});
  CHECK_THROWS_AS(check_slots(Theory::IP, spec, default_witness_family()), Error);
  CHECK_THROWS_AS(tp_free_transform(spec, lueders_zx()), Error);
  CHECK_THROWS_AS(free_transform(Theory::TI, spec, lueders_zx(), default_witness_family()), Error);
}

TEST_CASE("free transforms keep free sets free") {
  Rng rng(66);
  const WitnessFamily fam = default_witness_family();
  for (Theory t : kSupermapTheories) {
    CAPTURE(to_string(t));
    const InstrumentSet set = random_free_set(t, 2, 2, 2, rng);
    const FreeSetSpec free = theory_free_set(t, fam);
    REQUIRE(std::abs(distance_measure(set, free).value) <= 1e-6);
    const InstrumentSet out = free_transform(t, random_spec(t, SpecShape{}, 0.6, rng), set, fam);
    CHECK(std::abs(distance_measure(out, free).value) <= 1e-6);
  }
  const InstrumentSet wc = random_free_set(Theory::TI, 2, 2, 2, rng);
  REQUIRE(is_weakly_compatible(wc).member());
  const InstrumentSet out = pid_supermap(random_pid_spec(SpecShape{}, rng), wc);
  CHECK(is_traditionally_compatible(out).member());
}

TEST_CASE("canonical constructions reach every free target") {
  Rng rng(67);
  const InstrumentSet source = lueders_zx();
  for (Theory t : kSupermapTheories) {
    CAPTURE(to_string(t));
    const InstrumentSet target = random_free_set(t, 2, 2, 2, rng);
    const SupermapSpec spec = canonical_spec(t, source, target);
    for (const auto& s : check_slots(t, spec, default_witness_family())) CHECK_FALSE(s.verdict.non_member());
    CHECK(set_gap(controlled_supermap(spec, source), target) <= 1e-9);
  }
  const InstrumentSet wc = random_weakly_compatible_set(2, 2, {2, 2}, rng);
  const JointSet target = random_tc_set(2, 2, {2, 2}, rng);
  CHECK(set_gap(pid_supermap(canonical_pid_spec(wc, target), wc), target.marginals) <= 1e-9);
}

TEST_CASE("programmable-instrument supermap rejects sets with different induced channels") {
  Rng rng(68);
  CHECK_THROWS_AS(pid_supermap(random_pid_spec(SpecShape{}, rng), lueders_zx()), Error);
}

TEST_CASE("supermaps contract the set distance") {
  Rng rng(69);
  SpecShape shape;
  shape.ancilla = 1;
  for (int k = 0; k < 4; ++k) {
    const InstrumentSet a = {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)};
    const InstrumentSet b = {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)};
    SupermapSpec spec = identity_spec(a);
    spec.q = uniform01(rng);
    spec.second = random_spec(Theory::IP, shape, 1.0, rng).first;
    const double before = set_distance(a, b).value;
    const double after = set_distance(controlled_supermap(spec, a), controlled_supermap(spec, b)).value;
    CHECK(after <= before + 1e-6);
  }
}

TEST_CASE("post-processing maps free sets to free sets") {
  Rng rng(70);
  const JointSet pc = random_pc_set(2, {2, 2}, {2, 2}, rng);
  std::vector<std::vector<Instrument>> procs(2);
  for (auto& row : procs)
    for (int a = 0; a < 2; ++a) row.push_back(random_instrument(2, 2, 2, rng, 1));
  const InstrumentSet out = instrument_post_process(pc.marginals, procs);
  CHECK(out[0].outcomes() == 2);
  CHECK(out[0].channel().is_trace_preserving(1e-9));
  CHECK(is_parallel_compatible(out).member());
}

TEST_CASE("short monotonicity harness") {
  for (Theory t : {Theory::IP, Theory::EP, Theory::SEP, Theory::MIP, Theory::SMIP, Theory::TI, Theory::PI}) {
    CAPTURE(to_string(t));
    const HarnessReport h = monotonicity_harness(t, 2, 7, 2);
    CHECK(h.trials == 2);
    CHECK(h.records.size() == 2);
    CHECK(h.ok());
    CHECK(h.max_distance_violation <= kMonotonicityTol);
    CHECK(h.max_measure_violation <= kMonotonicityTol);
  }
}
