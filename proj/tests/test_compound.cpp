#include <doctest.h>

#include <cmath>

#include "qcomp/compound.hpp"
#include "qcomp/errors.hpp"
#include "oracles.hpp"

using namespace qcomp;

namespace {

ChannelFamily family_of(std::vector<KrausChannel> members) {
  ChannelFamily f;
  for (std::size_t i = 0; i < members.size(); ++i) f.labels.push_back("m" + std::to_string(i));
  f.members = std::move(members);
  return f;
}

CVector plus_ket() { return CVector::Constant(2, 1.0 / std::sqrt(2.0)); }

}  // namespace

TEST_SUITE("compound") {
  TEST_CASE("adapted net over a phase-flip interval") {
    const ParametricFamily pf = ParametricFamily::parse("phase_flip", 0.0, 0.2);
    const double tau = 0.1;
    const ChannelNet net = build_adapted_net(pf, tau);
    CHECK(net.step == doctest::Approx(tau / 8.0));
    CHECK(net.covering_radius < tau / 2.0);
    // Every family point lies within step/2 of a kept grid point.
    for (double p = 0.0; p <= 0.2 + 1e-12; p += 0.003) {
      double best = 1.0;
      for (double g : net.parameters) best = std::min(best, std::abs(g - p));
      CHECK(best <= net.step / 2.0 + 1e-12);
    }
    for (std::size_t i = 0; i < net.parameters.size(); ++i) {
      const double g = net.parameters[i];
      const double nearest = std::clamp(g, 0.0, 0.2);
      CHECK(net.distance_lower[i] <= 2.0 * std::abs(g - nearest) + 1e-8);
    }
    CHECK(std::log2(static_cast<double>(net.members.size())) <= 2.0 * 16.0 * std::log2(6.0 / tau));
    CHECK(adapted_mixing_margin(net, 16, 3) >= -1e-12);
  }

  TEST_CASE("singleton family gives a one-point net") {
    const ChannelNet net = build_adapted_net(ParametricFamily::parse("depolarizing", 0.3, 0.3), 0.05);
    CHECK(net.members.size() == 1);
  }

  TEST_CASE("net cardinality plug-ins") {
    CHECK(net_cardinality_bound(1.0, 2, 2) == doctest::Approx(32.0 * std::log2(3.0)));
    CHECK(net_cardinality_bound(1.0, 2, 2) == doctest::Approx(50.72).epsilon(1e-4));
    CHECK(std::exp2(net_cardinality_bound(1.0, 1, 1)) == doctest::Approx(9.0));
    CHECK(net_cardinality_bound(0.5, 2, 2) == doctest::Approx(32.0 * std::log2(6.0)));
  }

  TEST_CASE("approximation check") {
    const KrausChannel n = KrausChannel::phase_flip(0.1);
    const DensityOperator pi16 = DensityOperator::maximally_mixed(16);
    const KrausChannel rec = KrausChannel::identity(16);
    const ApproximationReport same = approximation_check(n, n, 0.0, pi16, 4, rec, 0.05);
    CHECK(same.diamond_lower == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(same.fidelity_gap == doctest::Approx(0.0).epsilon(1e-12));
    const ApproximationReport near =
        approximation_check(n, KrausChannel::phase_flip(0.11), 0.02, pi16, 4, rec, 0.05);
    CHECK(near.fidelity_gap < 0.2);
    CHECK(near.diamond_consistent);
    // Direct oracle: F_e of Z-noise on π is (1-p)^l.
    CHECK(near.fidelity_gap == doctest::Approx(std::pow(0.9, 4) - std::pow(0.89, 4)));
  }

  TEST_CASE("coherent information shift of a mixed singleton") {
    const ParametricFamily pf = ParametricFamily::parse("phase_flip", 0.1, 0.1);
    const double tau = 0.05;
    const ChannelNet net = build_adapted_net(pf, tau);
    const IcShiftReport r = ic_shift_check(DensityOperator::maximally_mixed(2), pf.sample(1), net);
    CHECK(r.holds);
    CHECK(r.bound == doctest::Approx(tau + 2 * tau * std::log2(2.0 / tau)));
  }

  TEST_CASE("minimum coherent information") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    const KrausChannel pf = KrausChannel::phase_flip(0.1);
    CHECK(min_coherent_information(pi, family_of({pf})) == doctest::Approx(coherent_information(pi, pf)));
    CHECK(min_coherent_information(pi, family_of({KrausChannel::identity(2), KrausChannel::useless(2, 2)})) ==
          doctest::Approx(-1.0));
    CHECK(min_coherent_information(pi, family_of({KrausChannel::phase_flip(0.05), pf})) ==
          doctest::Approx(1 - oracle::h2(0.1)));
  }

  TEST_CASE("capacity lower bound on simple families") {
    CapacityOptions opts;
    opts.random_starts = 2;
    const CapacityResult id = compound_capacity_lower(family_of({KrausChannel::identity(2)}), 1, opts);
    CHECK(id.value == doctest::Approx(1.0).epsilon(1e-6));
    const CapacityResult pf = compound_capacity_lower(family_of({KrausChannel::phase_flip(0.1)}), 1, opts);
    CHECK(std::abs(pf.value - (1 - oracle::h2(0.1))) < 1e-4);
    CHECK(trace_norm(pf.rho.matrix() - 0.5 * identity(2)) < 0.02);
  }

  TEST_CASE("capacity of phase flips in two bases matches a Bloch-ball scan") {
    const double p = 0.1;
    const ChannelFamily fam = family_of({KrausChannel::phase_flip(p), KrausChannel::bit_flip(p)});
    CapacityOptions opts;
    opts.random_starts = 4;
    const CapacityResult res = compound_capacity_lower(fam, 1, opts);
    const double scan = oracle::bloch_scan(
        [&](double x, double y, double z) {
          return std::min(oracle::phase_flip_ic_bloch(p, x, y, z), oracle::phase_flip_ic_bloch(p, z, -y, x));
        },
        0.05);
    CHECK(res.value >= scan - 1e-6);
    CHECK(res.value <= scan + 1e-2);
    CHECK(res.value <= coherent_information(DensityOperator::maximally_mixed(2), KrausChannel::phase_flip(p)) + 1e-9);
  }

  TEST_CASE("pretty good measurement against the Helstrom bound") {
    const ChannelFamily fam = family_of({KrausChannel::identity(2), KrausChannel::useless(2, 2)});
    const DiscriminationReport r = discriminate(fam, 1, CVector::Unit(2, 0));
    const CMatrix a = DensityOperator::from_pure(CVector::Unit(2, 0)).matrix();
    const double hel = oracle::helstrom(a, 0.5 * identity(2));
    CHECK(hel == doctest::Approx(0.75));
    CHECK(r.average_success <= hel + 1e-12);
    CHECK(r.average_success >= hel * hel - 1e-12);
    CHECK(r.average_success == doctest::Approx(2.0 / 3.0));
    double total = 0.0;
    for (const auto& e : r.povm) total += std::real(e.trace());
    CHECK(total == doctest::Approx(2.0));
  }

  TEST_CASE("identical members are flagged") {
    const ChannelFamily fam = family_of({KrausChannel::phase_flip(0.2), KrausChannel::phase_flip(0.2)});
    const DiscriminationReport r = discriminate(fam, 2);
    CHECK(r.indistinguishable);
    CHECK(r.average_success == doctest::Approx(0.5));
  }

  TEST_CASE("discrimination improves with more copies") {
    const ChannelFamily fam = family_of({KrausChannel::phase_flip(0.0), KrausChannel::phase_flip(0.3)});
    std::vector<DiscriminationReport> sweep;
    for (std::size_t m = 1; m <= 6; ++m) sweep.push_back(discriminate(fam, m, plus_ket()));
    const DecayFit fit = fit_decay(sweep);
    CHECK(fit.nondecreasing);
    CHECK(fit.f < 1.0);
    CHECK(sweep.back().average_success > sweep.front().average_success);
  }

  TEST_CASE("code conversion") {
    const SubspaceFrame frame = repetition_code_x(4);
    {
      const ChannelFamily single = family_of({KrausChannel::phase_flip(0.1)});
      const InformedCode code = informed_code(single.members[0], 4, frame);
      DiscriminationReport trivial;
      trivial.m = 1;
      trivial.probe = CVector::Unit(2, 0);
      trivial.povm = {identity(2)};
      trivial.success = {{1.0}};
      trivial.correct = {1.0};
      const ConversionResult r = convert_code(single, {code}, trivial);
      CHECK(r.members[0].combined == doctest::Approx(code.fidelity).epsilon(1e-9));
    }
    const ChannelFamily fam = family_of({KrausChannel::phase_flip(0.02), KrausChannel::phase_flip(0.25)});
    std::vector<InformedCode> codes;
    for (const auto& ch : fam.members) codes.push_back(informed_code(ch, 4, frame));
    const ConversionResult r = convert_code(fam, codes, discriminate(fam, 4));
    for (const auto& m : r.members) {
      CHECK(m.holds);
      CHECK(m.combined >= m.product_bound - 1e-12);
      CHECK(std::abs(m.combined - m.factorized) < 1e-9);
    }
  }

  TEST_CASE("averaged fidelity is linear in the channel") {
    const auto a = random_channel(2, 2, 2, 1), b = random_channel(2, 2, 2, 2);
    const AveragedFidelityReport r =
        averaged_fidelity_check(DensityOperator::maximally_mixed(2), {a, b}, {0.4, 0.6}, KrausChannel::identity(2));
    CHECK(r.linear_ok);
    CHECK(r.back_conversion_ok);
  }

  TEST_CASE("BSST envelope plug-ins") {
    const DensityOperator rho = DensityOperator::diagonal({0.9, 0.1});
    const BsstReport r = bsst_check(rho, family_of({KrausChannel::phase_flip(0.1)}), {2, 4}, {0.45});
    REQUIRE(r.rows.size() == 2);
    const BsstRow& row = r.rows[1];
    CHECK(row.tau == doctest::Approx(1.0 / (std::exp(1.0) * 16.0)));
    const double phi = -0.45 * std::log2(0.45 / 2.0);
    const double theta_out = -std::log2(row.mass) / 4.0 + 2 * phi - 2 * 0.45 * std::log2(row.tau / 4.0);
    CHECK(row.theta_out == doctest::Approx(theta_out));
    CHECK(row.target == doctest::Approx(coherent_information(rho, KrausChannel::phase_flip(0.1))));
    CHECK(row.within);
    CHECK_THROWS_AS(bsst_check(rho, family_of({KrausChannel::phase_flip(0.1)}), {2}, {0.45}, {0.5}), InvalidInput);
  }
}
