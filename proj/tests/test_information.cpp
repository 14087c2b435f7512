#include <doctest.h>

#include <cmath>

#include "qcomp/channels.hpp"
#include "qcomp/coding.hpp"
#include "qcomp/information.hpp"
#include "oracles.hpp"

using namespace qcomp;

TEST_SUITE("information") {
  TEST_CASE("von Neumann entropy") {
    CHECK(entropy(DensityOperator::from_pure(haar_state(3, 1))) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(entropy(DensityOperator::maximally_mixed(2)) == doctest::Approx(1.0));
    CHECK(entropy(DensityOperator::diagonal({0.9, 0.1})) == doctest::Approx(oracle::h2(0.1)));
    CHECK(binary_entropy(0.1) == doctest::Approx(0.4690).epsilon(1e-4));
  }

  TEST_CASE("entanglement fidelity closed forms") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    CHECK(entanglement_fidelity(pi, KrausChannel::identity(2)) == doctest::Approx(1.0));
    for (double p : {0.0, 0.1, 0.5}) {
      CHECK(std::abs(entanglement_fidelity(pi, KrausChannel::phase_flip(p)) - (1 - p)) < 1e-10);
    }
    CHECK(entanglement_fidelity(pi, KrausChannel::useless(2, 2)) == doctest::Approx(0.25));
  }

  TEST_CASE("fidelity routes agree on random instances") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const CMatrix g = ginibre(3, 3, derive_seed(5, s));
      const DensityOperator rho = DensityOperator::normalized(g * g.adjoint());
      const FidelityRoutes fr = entanglement_fidelity_routes(rho, random_channel(3, 3, 2, derive_seed(6, s), 0.8));
      CHECK(std::abs(fr.purification - fr.kraus) < 1e-10);
    }
  }

  TEST_CASE("coherent information closed forms") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    CHECK(coherent_information(pi, KrausChannel::identity(2)) == doctest::Approx(1.0));
    CHECK(coherent_information(pi, KrausChannel::useless(2, 2)) == doctest::Approx(-1.0));
    CHECK(coherent_information(pi, KrausChannel::phase_flip(0.1)) == doctest::Approx(1 - oracle::h2(0.1)));
    CHECK(coherent_information_tensor(DensityOperator::maximally_mixed(4), KrausChannel::phase_flip(0.1), 2) ==
          doctest::Approx(2 * (1 - oracle::h2(0.1))));
  }

  TEST_CASE("coherent information routes on rectangular channels") {
    for (std::uint64_t s = 0; s < 40; ++s) {
      const std::size_t d = 2 + s % 3, dp = 1 + (s / 3) % 4;
      const CMatrix g = ginibre(d, d, derive_seed(9, s));
      const DensityOperator rho = DensityOperator::normalized(g * g.adjoint());
      const CoherentInfoRoutes r = coherent_information_routes(rho, random_channel(d, dp, d, derive_seed(10, s)));
      CHECK(std::abs(r.purification - r.complementary) < 1e-8);
    }
  }

  TEST_CASE("entropy exchange") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    CHECK(entropy_exchange(pi, KrausChannel::identity(2)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(entropy_exchange(pi, KrausChannel::phase_flip(0.3)) == doctest::Approx(oracle::h2(0.3)));
    CHECK(entropy_exchange(pi, KrausChannel::depolarizing(0.3)) ==
          doctest::Approx(oracle::shannon({0.775, 0.075, 0.075, 0.075})));
  }

  TEST_CASE("Fannes-type continuity bound") {
    CHECK(fannes_bound(1.0 / std::exp(1.0), 1) == doctest::Approx(std::log2(std::exp(1.0)) / std::exp(1.0)));
    CHECK(fannes_bound(1.0 / std::exp(1.0), 1) == doctest::Approx(0.5307).epsilon(1e-4));
    CHECK(fannes_bound(0.1, 2) == doctest::Approx(0.1 + 0.1 * std::log2(10.0)));
    std::size_t violations = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const double tau = 0.05 + 0.3 * static_cast<double>(s % 7) / 7.0;
      const CMatrix g = ginibre(2, 2, derive_seed(21, s));
      const CMatrix a = DensityOperator::normalized(g * g.adjoint()).matrix();
      const CMatrix h = ginibre(2, 2, derive_seed(22, s));
      const CMatrix b0 = DensityOperator::normalized(h * h.adjoint()).matrix();
      const double dist = trace_norm(a - b0);
      const double t = dist > tau ? tau / dist : 1.0;
      const CMatrix b = (1 - t) * a + t * b0;
      if (std::abs(entropy_psd(a) - entropy_psd(b)) > fannes_bound(tau, 2) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("recovery optimization") {
    const DensityOperator pi = DensityOperator::maximally_mixed(2);
    CHECK(optimize_recovery(pi, KrausChannel::identity(2)).fidelity == doctest::Approx(1.0));
    CHECK(optimize_recovery(pi, KrausChannel::phase_flip(0.1)).fidelity >= 0.9 - 1e-12);
    const RecoveryResult r = optimize_recovery(pi, random_channel(2, 3, 2, 4, 0.9));
    CHECK(r.recovery.in_dim() == 3);
    CHECK(r.recovery.out_dim() == 2);
    CHECK(r.fidelity == doctest::Approx(entanglement_fidelity(pi, compose(r.recovery, random_channel(2, 3, 2, 4, 0.9)))));
  }

  TEST_CASE("recovery beats the decoupling bound") {
    std::size_t violations = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
      const KrausChannel ch = random_channel(2, 2, 2, derive_seed(31, s), 0.6 + 0.4 * (s % 5) / 5.0);
      const SubspaceFrame frame = SubspaceFrame::first_k(2, 2);
      const DecouplingGap gap = decoupling_gap(frame, ch);
      const double f = optimize_recovery(DensityOperator::maximally_mixed(2), ch).fidelity;
      if (f < gap.lower_bound() - 1e-9) ++violations;
    }
    CHECK(violations == 0);
  }
}
