#include <doctest.h>

#include <cmath>

#include "qcomp/channel_io.hpp"
#include "qcomp/channels.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/information.hpp"
#include "oracles.hpp"

using namespace qcomp;

namespace {

CVector plus_ket() {
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

CVector minus_ket() {
  CVector v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace

TEST_SUITE("channels") {
  TEST_CASE("apply on simple channels") {
    const DensityOperator rho = DensityOperator::from_pure(haar_state(2, 3));
    CHECK((qcomp::apply(KrausChannel::identity(2), rho) - rho.matrix()).norm() < 1e-14);
    CHECK((qcomp::apply(KrausChannel::useless(2, 2), rho) - 0.5 * identity(2)).norm() < 1e-14);
    const CMatrix out = qcomp::apply(KrausChannel::phase_flip(0.1), DensityOperator::from_pure(plus_ket()));
    const CMatrix expect = 0.9 * plus_ket() * plus_ket().adjoint() + 0.1 * minus_ket() * minus_ket().adjoint();
    CHECK((out - expect).norm() < 1e-14);
  }

  TEST_CASE("tensor powers") {
    const KrausChannel id3 = tensor_power(KrausChannel::identity(2), 3);
    CHECK(id3.size() == 1);
    CHECK((id3[0] - identity(8)).norm() < 1e-14);

    const double p = 0.2;
    const KrausChannel pf2 = tensor_power(KrausChannel::phase_flip(p), 2);
    REQUIRE(pf2.size() == 4);
    std::vector<double> weights;
    for (const auto& a : pf2.kraus()) weights.push_back(std::real((a.adjoint() * a).trace()) / 4.0);
    std::sort(weights.begin(), weights.end());
    CHECK(weights[0] == doctest::Approx(p * p));
    CHECK(weights[1] == doctest::Approx(p * (1 - p)));
    CHECK(weights[2] == doctest::Approx(p * (1 - p)));
    CHECK(weights[3] == doctest::Approx((1 - p) * (1 - p)));

    const KrausChannel ch = random_channel(2, 2, 3, 11);
    const CMatrix a = DensityOperator::from_pure(haar_state(2, 1)).matrix();
    const CMatrix b = DensityOperator::from_pure(haar_state(2, 2)).matrix();
    const CMatrix lhs = qcomp::apply(tensor_power(ch, 2), kron(a, b));
    CHECK((lhs - kron(qcomp::apply(ch, a), qcomp::apply(ch, b))).norm() < 1e-12);
    CHECK((apply_tensor_power(ch, 2, kron(a, b)) - lhs).norm() < 1e-12);
  }

  TEST_CASE("complementary channel") {
    const DensityOperator rho = DensityOperator::from_pure(haar_state(2, 5));
    const CMatrix env = qcomp::apply(complementary(KrausChannel::identity(2)), rho);
    CHECK(env.rows() == 1);
    CHECK(std::real(env(0, 0)) == doctest::Approx(1.0));

    const double p = 0.1;
    const CMatrix e = qcomp::apply(complementary(KrausChannel::phase_flip(p)), DensityOperator::maximally_mixed(2));
    CHECK(std::real(e(0, 0)) == doctest::Approx(1 - p));
    CHECK(std::real(e(1, 1)) == doctest::Approx(p));
    CHECK(std::abs(e(0, 1)) < 1e-14);
    CHECK(entropy_psd(e) == doctest::Approx(oracle::h2(0.1)));
    CHECK(entropy_psd(e) == doctest::Approx(0.4690).epsilon(1e-4));
  }

  TEST_CASE("canonical Kraus form") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    const CanonicalKraus ck = canonical_kraus(KrausChannel::phase_flip(0.1), pi);
    REQUIRE(ck.weights.size() == 2);
    CHECK(ck.weights[0] == doctest::Approx(0.9));
    CHECK(ck.weights[1] == doctest::Approx(0.1));

    const KrausChannel pf = KrausChannel::phase_flip(0.3);
    const KrausChannel rotated(std::vector<CMatrix>{CMatrix((pf[0] + pf[1]) / std::sqrt(2.0)), CMatrix((pf[0] - pf[1]) / std::sqrt(2.0))},
                               KrausChannel::Kind::TracePreserving);
    const CanonicalKraus cr = canonical_kraus(rotated, pi);
    CHECK(cr.weights[0] == doctest::Approx(0.7));
    CHECK(cr.weights[1] == doctest::Approx(0.3));
    const auto& k = cr.channel.kraus();
    CHECK(std::abs((k[0].adjoint() * k[1]).trace()) < 1e-12);
    CHECK((choi(cr.channel) - choi(rotated)).norm() < 1e-9);
  }

  TEST_CASE("diamond distance estimates") {
    const KrausChannel pf = KrausChannel::phase_flip(0.2);
    CHECK(diamond_distance(pf, pf).value == doctest::Approx(0.0).epsilon(1e-12));
    const KrausChannel id = KrausChannel::identity(2);
    const KrausChannel u = KrausChannel::useless(2, 2);
    CHECK(diamond_distance(id, u).value >= 1.5 - 1e-6);
    const double tau = 0.1;
    const double full = diamond_distance(pf, u).value;
    const double mixed = diamond_distance(pf, mix(pf, u, tau / 2)).value;
    CHECK(mixed >= 0.0);
    CHECK(mixed <= tau / 2 * full + 1e-8);
    const DiamondEstimate est = diamond_distance(id, KrausChannel::phase_flip(0.5));
    for (std::size_t i = 1; i < est.running_max.size(); ++i) CHECK(est.running_max[i] >= est.running_max[i - 1]);
  }

  TEST_CASE("averaged channel application") {
    const KrausChannel pf = KrausChannel::phase_flip(0.1);
    const CMatrix rho = DensityOperator::from_pure(haar_state(4, 2)).matrix();
    AveragedChannel single{{pf}, {1.0}, 2};
    CHECK((averaged_apply(single, rho) - apply_tensor_power(pf, 2, rho)).norm() < 1e-12);
    AveragedChannel twin{{pf, pf}, {0.5, 0.5}, 2};
    CHECK((averaged_apply(twin, rho) - apply_tensor_power(pf, 2, rho)).norm() < 1e-12);

    const KrausChannel a = random_channel(2, 2, 2, 4), b = random_channel(2, 2, 3, 5);
    const KrausChannel rec = random_channel(2, 2, 2, 6);
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    const double lhs = entanglement_fidelity(pi, compose(rec, convex_combination({a, b}, {0.3, 0.7})));
    const double rhs = 0.3 * entanglement_fidelity(pi, compose(rec, a)) + 0.7 * entanglement_fidelity(pi, compose(rec, b));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  TEST_CASE("validation rejects malformed channels") {
    CHECK_THROWS_AS(KrausChannel::phase_flip(1.5), InvalidInput);
    CHECK_THROWS(KrausChannel(std::vector<CMatrix>{CMatrix(2.0 * identity(2))}, KrausChannel::Kind::TraceDecreasing));
    CHECK_THROWS(KrausChannel(std::vector<CMatrix>{CMatrix(0.5 * identity(2))}, KrausChannel::Kind::TracePreserving));
    CHECK_NOTHROW(KrausChannel(std::vector<CMatrix>{CMatrix(0.5 * identity(2))}, KrausChannel::Kind::TraceDecreasing));
  }

  TEST_CASE("channel parsing") {
    CHECK(parse_channel("phase_flip(0.1)").size() == 2);
    CHECK(parse_channel("useless").out_dim() == 2);
    CHECK(parse_channel("identity(3)").in_dim() == 3);
    const KrausChannel ch = parse_channel(R"({"in_dim": 2, "out_dim": 2, "kraus": [[[1, 0], [0, 1]]]})");
    CHECK(ch.trace_preserving());
    CHECK_THROWS_AS(parse_channel("warp_drive(3)"), InvalidInput);
    const KrausChannel back = parse_channel(channel_to_json(KrausChannel::amplitude_damping(0.3)));
    CHECK((choi(back) - choi(KrausChannel::amplitude_damping(0.3))).norm() < 1e-14);
  }
}
