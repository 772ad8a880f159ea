#include <doctest.h>

#include "oracles.hpp"
#include "qirt/distances.hpp"
#include "qirt/repro.hpp"
#include "qirt/transforms.hpp"

using namespace qirt;

namespace {

ComplexMatrix phase(double theta) {
  ComplexMatrix u = identity(2);
  u(1, 1) = std::polar(1.0, theta);
  return u;
}

InstrumentSet random_set(Rng& rng) { return {random_instrument(2, 2, 2, rng, 2), random_instrument(2, 2, 2, rng, 2)}; }

std::vector<std::vector<Instrument>> random_processors(Rng& rng) {
  std::vector<std::vector<Instrument>> p(2);
  for (auto& row : p)
    for (int a = 0; a < 2; ++a) row.push_back(random_instrument(2, 2, 2, rng, 2));
  return p;
}

}  // namespace

TEST_CASE("diamond distance closed forms") {
  Rng rng(31);
  const CpMap c = random_channel(2, 2, rng);
  CHECK(diamond_distance(c, c).value == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  CHECK(diamond_distance(identity_channel(2), depolarizing(2, 0)).value == doctest::Approx(1.5).epsilon(1e-6));
  for (double t : {0.2, 0.5, 0.8})
    CHECK(diamond_distance(identity_channel(2), depolarizing(2, t)).value == doctest::Approx(1.5 * (1 - t)).epsilon(1e-6));
  // Unitary pair: 2 sqrt(1 - cos^2(θ/2)) = 2 sin(θ/2).
  for (double theta : {0.3, 1.2, 2.5})
    CHECK(diamond_distance(identity_channel(2), unitary_channel(phase(theta))).value ==
          doctest::Approx(2 * std::sin(theta / 2)).epsilon(1e-6));
  const DistanceResult d = diamond_distance(identity_channel(2), depolarizing(2, 0));
  CHECK(d.status == SdpStatus::Optimal);
  CHECK(d.achiever.trace().real() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("sampled lower bound") {
  CHECK(diamond_lower_bound(identity_channel(2), identity_channel(2), 20).value == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(diamond_lower_bound(identity_channel(2), depolarizing(2, 0), 1).value == doctest::Approx(1.5).epsilon(1e-9));
  Rng rng(32);
  for (int k = 0; k < 20; ++k) {
    const CpMap a = random_channel(2, 2, rng), b = random_channel(2, 2, rng);
    const double sdp = diamond_distance(a, b).value;
    const double lb = diamond_lower_bound(a, b, 100, derive_seed(32, k)).value;
    CHECK(lb <= sdp + 1e-7);
    CHECK(lb >= 0.9 * sdp);
  }
}

TEST_CASE("measurement distance") {
  const Povm z = computational_pvm(2);
  const Povm x({0.5 * (identity(2) + pauli_x()), 0.5 * (identity(2) - pauli_x())});
  CHECK(measurement_distance(z, z).value == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  const double zx = measurement_distance(z, x).value;
  CHECK(zx > 0.0);
  CHECK(zx <= 2.0);
  CHECK(zx == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(zx == doctest::Approx(diamond_distance(measure_prepare_channel(z), measure_prepare_channel(x)).value).epsilon(1e-7));
  const Povm coin({identity(2) / 2.0, identity(2) / 2.0});
  CHECK(measurement_distance(z, coin).value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(measurement_distance(z, trivial_povm(2)), Error);
}

TEST_CASE("instrument distance") {
  Rng rng(33);
  const Instrument ex1 = example1_instrument();
  CHECK(instrument_distance(ex1, ex1).value == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  std::vector<CpMap> constant;
  for (double p : {0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6}) constant.push_back(scale(trash_and_prepare(2, identity(2) / 2.0), p));
  const double v = instrument_distance(ex1, Instrument(constant)).value;
  CHECK(v > 0.0);
  CHECK(v <= 2.0 + 1e-9);
  for (int k = 0; k < 50; ++k) {
    const Instrument a = random_instrument(2, 2, 2, rng, 2), b = random_instrument(2, 2, 2, rng, 2);
    const double d = instrument_distance(a, b).value;
    CHECK(d == doctest::Approx(diamond_distance(flag_channel(a), flag_channel(b)).value).epsilon(1e-6));
    CHECK(measurement_distance(induced_povm(a), induced_povm(b)).value <= d + 1e-7);
    CHECK(diamond_distance(a.channel(), b.channel()).value <= d + 1e-7);
    CHECK(d <= 2.0 + 1e-9);
  }
}

TEST_CASE("metric properties") {
  Rng rng(34);
  for (int k = 0; k < 10; ++k) {
    const Instrument a = random_instrument(2, 2, 2, rng, 2), b = random_instrument(2, 2, 2, rng, 2),
                     c = random_instrument(2, 2, 2, rng, 2);
    const double ab = instrument_distance(a, b).value, ba = instrument_distance(b, a).value;
    const double bc = instrument_distance(b, c).value, ac = instrument_distance(a, c).value;
    CHECK(std::abs(ab - ba) <= 1e-7);
    CHECK(ac <= ab + bc + 1e-7);
    const CpMap f = random_channel(2, 2, rng), g = random_channel(2, 2, rng), h = random_channel(2, 2, rng);
    CHECK(diamond_distance(f, h).value <= diamond_distance(f, g).value + diamond_distance(g, h).value + 1e-7);
    const Povm m = random_povm(2, 3, rng), n = random_povm(2, 3, rng);
    CHECK(std::abs(measurement_distance(m, n).value - measurement_distance(n, m).value) <= 1e-7);
  }
}

TEST_CASE("set distance") {
  Rng rng(35);
  const InstrumentSet a = random_set(rng), b = random_set(rng);
  CHECK(set_distance(a, a).value == doctest::Approx(0.0).scale(1).epsilon(1e-7));
  CHECK(set_distance(InstrumentSet{a[0]}, InstrumentSet{b[0]}).value ==
        doctest::Approx(instrument_distance(a[0], b[0]).value).epsilon(1e-12));
  const double s = set_distance(a, b).value;
  const double d0 = instrument_distance(a[0], b[0]).value, d1 = instrument_distance(a[1], b[1]).value;
  CHECK(s == doctest::Approx(std::max(d0, d1)).epsilon(1e-9));
  CHECK_THROWS_AS(set_distance(a, InstrumentSet{b[0]}), Error);
}

TEST_CASE("joint convexity") {
  Rng rng(36);
  for (int k = 0; k < 20; ++k) {
    const double p = uniform01(rng);
    const CpMap l1 = random_channel(2, 2, rng), l2 = random_channel(2, 2, rng);
    const CpMap p1 = random_channel(2, 2, rng), p2 = random_channel(2, 2, rng);
    const double lhs = diamond_distance(mix(p, l1, p1), mix(p, l2, p2)).value;
    const double rhs = p * diamond_distance(l1, l2).value + (1 - p) * diamond_distance(p1, p2).value;
    CHECK(lhs <= rhs + 1e-7);
    const InstrumentSet a = random_set(rng), b = random_set(rng), c = random_set(rng), d = random_set(rng);
    CHECK(set_distance(mix(p, a, c), mix(p, b, d)).value <=
          p * set_distance(a, b).value + (1 - p) * set_distance(c, d).value + 1e-7);
  }
}

TEST_CASE("pre- and post-composition contract the diamond distance") {
  Rng rng(37);
  for (int k = 0; k < 20; ++k) {
    const CpMap a = random_channel(2, 2, rng), b = random_channel(2, 2, rng);
    const CpMap pre = random_channel(3, 2, rng), post = random_channel(2, 3, rng);
    const double before = diamond_distance(a, b).value;
    CHECK(diamond_distance(compose(post, compose(a, pre)), compose(post, compose(b, pre))).value <= before + 1e-7);
    const CpMap id = identity_channel(2);
    CHECK(diamond_distance(tensor_maps(a, id), tensor_maps(b, id)).value == doctest::Approx(before).epsilon(1e-6));
  }
}

TEST_CASE("post-processing contracts the set distance") {
  Rng rng(38);
  for (int k = 0; k < 20; ++k) {
    const InstrumentSet a = random_set(rng), b = random_set(rng);
    const auto procs = random_processors(rng);
    const double before = set_distance(a, b).value;
    const double after = set_distance(instrument_post_process(a, procs), instrument_post_process(b, procs)).value;
    CHECK(after <= before + 1e-7);
    PovmSet ma, mb;
    ChannelSet ca, cb;
    for (int i = 0; i < 2; ++i) {
      ma.push_back(induced_povm(a[i]));
      mb.push_back(induced_povm(b[i]));
      ca.push_back(a[i].channel());
      cb.push_back(b[i].channel());
    }
    CHECK(set_distance(ma, mb).value <= before + 1e-7);
    CHECK(set_distance(ca, cb).value <= before + 1e-7);
  }
}
