#include <doctest.h>

#include <cmath>

#include "qcomp/coding.hpp"
#include "qcomp/errors.hpp"
#include "oracles.hpp"

using namespace qcomp;

namespace {

OneShotTerm noiseless_term(std::size_t dim) {
  return {1.0, 1.0, 1.0 / std::sqrt(static_cast<double>(dim)), std::nan("")};
}

}  // namespace

TEST_SUITE("coding") {
  TEST_CASE("truncating the identity leaves the output-typical mass") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    const TruncatedChannel tc = truncate_channel(KrausChannel::identity(2), pi, 6, 0.4);
    const CMatrix out = tc.channel.apply(DensityOperator::maximally_mixed(64).matrix());
    // Types k with |k/6 - 1/2|·2 < 0.4 are k = 2, 3, 4.
    const double expect = (15.0 + 20.0 + 15.0) / 64.0;
    CHECK(std::real(out.trace()) == doctest::Approx(expect));
    CHECK(tc.output_certificate.mass == doctest::Approx(expect));
    CHECK(tc.n == 1);
  }

  TEST_CASE("truncated phase flip keeps the certified trace") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    const TruncatedChannel tc = truncate_channel(KrausChannel::phase_flip(0.1), pi, 10, 0.3);
    const double kraus_mass = oracle::binomial_mass(10, 0.1, {0, 1, 2});
    const double q_mass = (210.0 + 252.0 + 210.0) / 1024.0;
    const double tr = std::real(tc.channel.apply_product(pi.matrix()).trace());
    CHECK(tr >= 1.0 - (1.0 - kraus_mass) - (1.0 - q_mass) - 1e-12);
    CHECK(tc.n == 56);
  }

  TEST_CASE("one-shot bound plug-ins") {
    const OneShotBoundReport one = one_shot_bound({noiseless_term(64)}, 2);
    CHECK(one.bound == doctest::Approx(1.0 - 2.0 * std::sqrt(2.0) / 8.0));
    CHECK(one.bound == doctest::Approx(0.6464).epsilon(1e-4));
    const OneShotBoundReport two = one_shot_bound({noiseless_term(1024), noiseless_term(1024)}, 2);
    CHECK(std::abs(two.bound - 0.8232) < 1e-4);
    CHECK_FALSE(two.vacuous);
    const OneShotBoundReport big = one_shot_bound({noiseless_term(64)}, 64);
    CHECK(big.bound <= 0.0);
    CHECK(big.vacuous);
  }

  TEST_CASE("decoupling gap of the identity vanishes") {
    const DecouplingGap g = decoupling_gap(SubspaceFrame::first_k(4, 2), KrausChannel::identity(4));
    CHECK(g.w == doctest::Approx(1.0));
    CHECK(g.gap == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("decoupling gap of a damped useless channel") {
    const KrausChannel u = KrausChannel::useless(2, 2);
    std::vector<CMatrix> ks;
    for (const auto& a : u.kraus()) ks.push_back(std::sqrt(0.8) * a);
    const KrausChannel damped(ks, KrausChannel::Kind::TraceDecreasing);
    const DecouplingGap g = decoupling_gap(SubspaceFrame::first_k(2, 2), damped);
    CHECK(g.w == doctest::Approx(0.8));
    const double f = optimize_recovery(DensityOperator::maximally_mixed(2), damped).fidelity;
    CHECK(f >= g.lower_bound() - 1e-9);
    CHECK(g.lower_bound() <= 0.8 * 0.25 + 1e-12);
  }

  TEST_CASE("D-matrices") {
    const SubspaceFrame full = SubspaceFrame::first_k(2, 2);
    const auto d1 = d_matrices(full, {KrausChannel::identity(2)});
    CHECK(d1[0][0].closed == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d1[0][0].direct == doctest::Approx(0.0).epsilon(1e-14));
    const auto d2 = d_matrices(full, {KrausChannel::identity(2), KrausChannel::identity(2)});
    for (const auto& row : d2)
      for (const auto& e : row) CHECK(std::abs(e.closed) < 1e-14);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const SubspaceFrame f{haar_isometry(3, 2, derive_seed(1, s))};
      const auto d = d_matrices(f, {random_channel(3, 2, 2, derive_seed(2, s), 0.7), random_channel(3, 3, 3, derive_seed(3, s))});
      for (const auto& row : d)
        for (const auto& e : row) CHECK(std::abs(e.closed - e.direct) < 1e-9);
    }
  }

  TEST_CASE("matrix lemma") {
    Eigen::MatrixXd l1(1, 1), d1(1, 1);
    l1 << 3.0;
    d1 << 5.0;
    const MatrixLemmaResult r1 = matrix_lemma_check(l1, d1);
    CHECK(r1.lhs == doctest::Approx(std::sqrt(15.0)));
    CHECK(r1.rhs == doctest::Approx(2 * std::sqrt(15.0)));
    Eigen::MatrixXd l(2, 2), d(2, 2);
    l << 4, 1, 1, 1;
    d << 1, 1, 1, 2;
    const MatrixLemmaResult r = matrix_lemma_check(l, d);
    CHECK(r.lhs == doctest::Approx(0.5 * (2 + 1 + 1 + std::sqrt(2.0))));
    CHECK(r.rhs == doctest::Approx(2 * (2 + std::sqrt(2.0))));
    CHECK(r.holds);
  }

  TEST_CASE("Monte Carlo on noiseless channels reaches fidelity one") {
    MonteCarloOptions opts;
    opts.trials = 8;
    opts.seed = 12;
    const std::vector<WordChannel> chans = {tensor_word_channel(KrausChannel::identity(2), 6)};
    const MonteCarloResult res = monte_carlo_fidelity(chans, identity(2), 2, opts);
    for (const auto& t : res.trials) CHECK(t.fidelity >= 1.0 - 1e-9);
    CHECK(res.decoupling_violations == 0);
    CHECK(res.mean >= one_shot_bound({noiseless_term(64)}, 2).bound);
  }

  TEST_CASE("Monte Carlo is reproducible across thread counts") {
    MonteCarloOptions a;
    a.trials = 6;
    a.seed = 99;
    MonteCarloOptions b = a;
    b.threads = 3;
    const std::vector<WordChannel> chans = {tensor_word_channel(KrausChannel::phase_flip(0.05), 3)};
    const MonteCarloResult ra = monte_carlo_fidelity(chans, identity(2), 2, a);
    const MonteCarloResult rb = monte_carlo_fidelity(chans, identity(2), 2, b);
    for (std::size_t i = 0; i < ra.trials.size(); ++i) CHECK(ra.trials[i].fidelity == rb.trials[i].fidelity);
  }

  TEST_CASE("too high a rate gives a vacuous bound and imperfect codes") {
    MonteCarloOptions opts;
    opts.trials = 4;
    const std::vector<WordChannel> chans = {tensor_word_channel(KrausChannel::phase_flip(0.2), 2)};
    const MonteCarloResult res = monte_carlo_fidelity(chans, identity(2), 4, opts);
    CHECK(res.mean < 1.0);
    const CMatrix out = chans[0].apply_product(DensityOperator::maximally_mixed(2).matrix());
    const OneShotBoundReport rep =
        one_shot_bound({OneShotTerm{4.0, std::real(out.trace()), out.norm(), std::nan("")}}, 4);
    CHECK(rep.vacuous);
  }

  TEST_CASE("subcode extraction") {
    const KrausChannel eff = random_channel(5, 5, 2, 17);
    const SubcodeResult same = extract_subcode(SubspaceFrame::first_k(5, 5), eff, 5);
    CHECK(same.subcode.k() == 5);
    CHECK(same.penalty == doctest::Approx(1.0));
    const SubcodeResult r = extract_subcode(SubspaceFrame::first_k(5, 5), eff, 2);
    CHECK(r.penalty == doctest::Approx(1.25));
    CHECK(r.subcode.k() == 2);
    const SubcodeResult r8 = extract_subcode(SubspaceFrame{haar_isometry(8, 8, 3)}, random_channel(8, 8, 2, 4), 2);
    CHECK(r8.holds);
    CHECK(r8.fidelity >= r8.guarantee - 1e-12);
  }

  TEST_CASE("floor ratio examples") {
    const FloorRatioResult a = floor_ratio_check(4, {2, 1}, {1, 1});
    CHECK(a.value == doctest::Approx(1.0));
    CHECK(a.bound == doctest::Approx(1.0 + 3.0 / 16.0));
    CHECK(a.holds);
    const FloorRatioResult b = floor_ratio_check(1, {2, 1}, {1, 1});
    CHECK(b.value == doctest::Approx(1.0));
    CHECK(b.bound == doctest::Approx(2.5));
    CHECK(b.holds);
    CHECK_FALSE(b.stated_holds);
    CHECK_THROWS_AS(floor_ratio_check(3, {1, 1}, {2, 1}), InvalidInput);
  }

  TEST_CASE("Haar moments on a qubit instance") {
    const HaarMomentReport rep = haar_moment_check({KrausChannel::phase_flip(0.1)}, 1, 400, 5);
    CHECK(rep.samples == 400);
    CHECK(std::abs(rep.trace_mean - rep.trace_value) <= 3 * rep.trace_std / std::sqrt(400.0) + 1e-12);
  }
}
