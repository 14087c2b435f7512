// Acceptance suite: one PASS/FAIL line per criterion. With arguments, runs
// only the listed criteria; exits nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "qcomp/coding.hpp"
#include "qcomp/compound.hpp"
#include "qcomp/information.hpp"
#include "qcomp/typicality.hpp"

using namespace qcomp;

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

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ChannelFamily family_of(std::vector<KrausChannel> members) {
  ChannelFamily f;
  for (std::size_t i = 0; i < members.size(); ++i) f.labels.push_back("member" + std::to_string(i));
  f.members = std::move(members);
  return f;
}

DensityOperator random_state(std::size_t d, std::uint64_t seed) {
  const CMatrix g = ginibre(d, d, seed);
  return DensityOperator::normalized(g * g.adjoint());
}

// 1. Coherent information by two routes.
void criterion1(Outcome& o) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const std::size_t d = 1 + s % 4;
    const std::size_t dp = 1 + (s / 4) % 4;
    const std::size_t n = (d + dp - 1) / dp + (s / 16) % 3;
    const KrausChannel ch = random_channel(d, dp, n, derive_seed(101, s));
    const CoherentInfoRoutes r = coherent_information_routes(random_state(d, derive_seed(102, s)), ch);
    worst = std::max(worst, std::abs(r.purification - r.complementary));
  }
  const double secs = seconds_since(t0);
  o.detail << "max route difference " << worst << ", " << secs << " s";
  o.require(worst <= 1e-8, "routes agree within 1e-8");
  o.require(secs < 30.0, "runtime below 30 s");
}

// 2. Entanglement fidelity closed forms and linearity.
void criterion2(Outcome& o) {
  const DensityOperator pi = DensityOperator::maximally_mixed(2);
  double worst_closed = 0.0;
  for (double p : {0.0, 0.1, 0.5})
    worst_closed = std::max(worst_closed, std::abs(entanglement_fidelity(pi, KrausChannel::phase_flip(p)) - (1 - p)));
  double worst_linear = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const KrausChannel a = random_channel(2, 2, 2, derive_seed(201, s));
    const KrausChannel b = random_channel(2, 2, 3, derive_seed(202, s), 0.7);
    const double lambda = 0.1 + 0.8 * static_cast<double>(s) / 50.0;
    const DensityOperator rho = random_state(2, derive_seed(203, s));
    const double mixed = entanglement_fidelity(rho, convex_combination({a, b}, {lambda, 1 - lambda}));
    const double linear = lambda * entanglement_fidelity(rho, a) + (1 - lambda) * entanglement_fidelity(rho, b);
    worst_linear = std::max(worst_linear, std::abs(mixed - linear));
  }
  o.detail << "closed-form error " << worst_closed << ", linearity error " << worst_linear;
  o.require(worst_closed <= 1e-10, "F_e = 1 - p");
  o.require(worst_linear <= 1e-10, "linearity in mixtures");
}

// 3. Typical projection certificates.
void criterion3(Outcome& o) {
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, DensityOperator>> states = {
      {"I/2", DensityOperator::maximally_mixed(2)},
      {"diag(.9,.1)", DensityOperator::diagonal({0.9, 0.1})},
      {"diag(.7,.2,.1)", DensityOperator::diagonal({0.7, 0.2, 0.1})}};
  std::size_t item_failures = 0, mass_failures = 0, monotone_failures = 0;
  for (const auto& [name, rho] : states) {
    for (double delta : {0.2, 0.3, 0.45}) {
      double previous = -1.0;
      for (std::size_t l : {4, 8, 12}) {
        const TypicalProjection tp = typical_projector(rho, l, delta);
        const auto& c = tp.certificate;
        if (!c.item2 || !c.item3) ++item_failures;
        if (!(c.mass >= c.mass_bound)) ++mass_failures;
        if (!(c.mass > previous)) {
          ++monotone_failures;
          o.detail << " mass not increasing for " << name << " delta=" << delta << " at l=" << l << " (" << previous
                   << " -> " << c.mass << ");";
        }
        previous = c.mass;
      }
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " item failures " << item_failures << ", mass-bound failures " << mass_failures << ", " << secs << " s";
  o.require(item_failures == 0, "items 2-3");
  o.require(mass_failures == 0, "item 1 mass bound");
  o.require(monotone_failures == 0, "mass increasing in l");
  o.require(secs < 60.0, "runtime below 1 min");
}

// 4. Typical Kraus words of the phase flip.
void criterion4(Outcome& o) {
  const TypicalKrausSet tk = typical_kraus(KrausChannel::phase_flip(0.1), DensityOperator::maximally_mixed(2), 10, 0.3);
  const double oracle_mass = oracle::binomial_mass(10, 0.1, {0, 1, 2});
  o.detail << "n = " << tk.certificate.count << ", mass = " << tk.certificate.mass << " (oracle " << oracle_mass << ")";
  o.require(tk.certificate.count == 56.0, "n = 56");
  o.require(std::abs(tk.certificate.mass - oracle_mass) <= 1e-10, "mass matches binomial oracle");
  o.require(std::abs(oracle_mass - 0.9298) < 5e-5, "mass approximately 0.9298");
  o.require(tk.certificate.item2, "count bound");
}

// 5. One-shot Monte Carlo: noiseless control and a noisy run.
void criterion5(Outcome& o) {
  const auto t0 = Clock::now();
  const DensityOperator pi = DensityOperator::maximally_mixed(2);
  {
    std::vector<WordChannel> chans;
    std::vector<OneShotTerm> terms;
    for (int i = 0; i < 2; ++i) {
      chans.push_back(tensor_word_channel(KrausChannel::identity(2), 10));
      const CMatrix out = chans.back().apply_product(pi.matrix());
      terms.push_back({1.0, std::real(out.trace()), out.norm(), std::nan("")});
    }
    const OneShotBoundReport bound = one_shot_bound(terms, 2);
    MonteCarloOptions mc;
    mc.trials = 20;
    mc.seed = 505;
    const MonteCarloResult res = monte_carlo_fidelity(chans, identity(2), 2, mc);
    double min_f = 1.0;
    for (const auto& t : res.trials) min_f = std::min(min_f, t.fidelity);
    o.detail << "control bound " << bound.bound << ", min F_e " << min_f << ";";
    o.require(std::abs(bound.bound - 0.8232) <= 1e-4, "control bound 0.8232");
    o.require(min_f >= 1.0 - 1e-9 && min_f >= bound.bound, "control trials reach F_e = 1");
  }
  {
    std::vector<TruncatedChannel> tcs;
    for (int i = 0; i < 2; ++i) tcs.push_back(truncate_channel(KrausChannel::phase_flip(0.01), pi, 8, 0.4));
    const OneShotBoundReport bound = one_shot_bound(tcs, 2, pi);
    std::vector<WordChannel> chans;
    for (auto& tc : tcs) chans.push_back(tc.channel);
    MonteCarloOptions mc;
    mc.trials = 500;
    mc.seed = 506;
    const MonteCarloResult res = monte_carlo_fidelity(chans, identity(2), 2, mc);
    o.detail << " noisy bound " << bound.bound << (bound.vacuous ? " (vacuous)" : "") << ", mean F_e " << res.mean
             << " +- " << res.stderr_mean;
    o.require(bound.bound > 0.3, "noisy bound above 0.3");
    o.require(res.mean >= bound.bound - 3 * res.stderr_mean, "mean F_e above bound - 3 stderr");
  }
  const double secs = seconds_since(t0);
  o.detail << ", " << secs << " s";
  o.require(secs < 600.0, "runtime below 10 min");
}

// 6. Decoupling inequality on random trace-decreasing maps.
void criterion6(Outcome& o) {
  std::size_t violations = 0;
  double min_margin = 1e300;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const SubspaceFrame frame{haar_isometry(4, 2, derive_seed(601, s))};
    const KrausChannel ch = random_channel(4, 4, 1 + s % 3, derive_seed(602, s), 0.5 + 0.5 * (s % 7) / 7.0);
    const DecouplingGap gap = decoupling_gap(frame, ch);
    const KrausChannel encode = KrausChannel(std::vector<CMatrix>{frame.isometry}, KrausChannel::Kind::TracePreserving);
    const double f = optimize_recovery(DensityOperator::maximally_mixed(2), compose(ch, encode)).fidelity;
    min_margin = std::min(min_margin, f - gap.lower_bound());
    if (f < gap.lower_bound() - 1e-9) ++violations;
  }
  o.detail << "violations " << violations << ", smallest margin " << min_margin;
  o.require(violations == 0, "F_e >= w - gap on every instance");
}

// 7. Haar moments.
void criterion7(Outcome& o) {
  const KrausChannel ad = tensor_power(KrausChannel::amplitude_damping(0.3), 2);
  std::vector<CMatrix> kept(ad.kraus().begin(), ad.kraus().end() - 1);
  const KrausChannel truncated(kept, KrausChannel::Kind::TraceDecreasing);
  const KrausChannel pf = tensor_power(KrausChannel::phase_flip(0.1), 2);
  const std::size_t samples = 2000;
  const HaarMomentReport rep = haar_moment_check({truncated, pf}, 2, samples, 707);
  const double root = std::sqrt(static_cast<double>(samples));
  double worst = -1e300;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t l = 0; l < 2; ++l)
      worst = std::max(worst, rep.d_mean[j][l] - rep.d_bound[j][l] - 3 * rep.d_std[j][l] / root);
  const double trace_dev = std::abs(rep.trace_mean - rep.trace_value);
  const double trace_tol = 3 * rep.trace_std / root + 1e-12;
  o.detail << "max (mean D - bound - 3 se) " << worst << ", trace deviation " << trace_dev << " (3 se " << trace_tol
           << ")";
  o.require(worst <= 0.0, "E||D_jl||^2 within 3 se of its bound");
  o.require(trace_dev <= trace_tol, "E tr N(U pi_F U*) within 3 se of tr N(pi_G)");
}

// 8. Matrix lemma and floor lemma.
void criterion8(Outcome& o) {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t matrix_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 6;
    Eigen::VectorXd ld(n), dd(n);
    for (int j = 0; j < n; ++j) {
      ld(j) = 1.0 + 9.0 * u(rng);
      dd(j) = 5.0 * u(rng);
    }
    Eigen::MatrixXd l(n, n), d(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        l(j, k) = j == k ? ld(j) : std::min(ld(j), ld(k));
        d(j, k) = j == k ? dd(j) : std::max(dd(j), dd(k)) * u(rng);
      }
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < j; ++k) d(j, k) = d(k, j);
    if (!matrix_lemma_check(l, d).holds) ++matrix_failures;
  }
  std::size_t floor_cases = 0, floor_failures = 0;
  std::string first_failure;
  for (std::int64_t n = 1; n <= 20; ++n)
    for (std::int64_t bn = 1; bn <= 20; ++bn)
      for (std::int64_t an = bn; an <= 20; ++an) {
        const Rational a{an, 10}, b{bn, 10};
        ++floor_cases;
        const FloorRatioResult r = floor_ratio_check(n, a, b);
        if (!r.holds) {
          if (floor_failures == 0) {
            std::ostringstream os;
            os << "n=" << n << " A=" << a.value() << " B=" << b.value() << " ratio " << r.value << " > " << r.bound;
            first_failure = os.str();
          }
          ++floor_failures;
        }
      }
  o.detail << "matrix lemma failures " << matrix_failures << "/1000, floor failures " << floor_failures << "/"
           << floor_cases;
  if (!first_failure.empty()) o.detail << " (first: " << first_failure << ")";
  o.require(matrix_failures == 0, "matrix lemma");
  o.require(floor_failures == 0, "floor bound 1 + 3*2^{-nB}");
}

// 9. Approximation suite over phase-flip nets.
void criterion9(Outcome& o) {
  std::size_t fidelity_violations = 0, shift_violations = 0, diamond_inconsistent = 0, checks = 0;
  const ParametricFamily fam = ParametricFamily::parse("phase_flip", 0.0, 0.2);
  const ChannelFamily samples = fam.sample(9);
  for (double tau : {0.05, 0.02}) {
    const ChannelNet net = build_adapted_net(fam, tau);
    const IcShiftReport shift = ic_shift_check(DensityOperator::maximally_mixed(2), samples, net);
    if (!shift.holds) ++shift_violations;
    for (std::size_t l = 1; l <= 4; ++l) {
      const std::size_t dim = std::size_t{1} << l;
      const DensityOperator pi = DensityOperator::maximally_mixed(dim);
      const KrausChannel rec = random_channel(dim, dim, 2, derive_seed(909, l));
      for (std::size_t s = 0; s < samples.size(); ++s) {
        const double p = 0.2 * static_cast<double>(s) / 8.0;
        std::size_t best = 0;
        for (std::size_t i = 1; i < net.parameters.size(); ++i)
          if (std::abs(net.parameters[i] - p) < std::abs(net.parameters[best] - p)) best = i;
        const double analytic = fam.lipschitz() * std::abs(p - net.parameters[best]) + tau;
        const ApproximationReport r =
            approximation_check(samples.members[s], net.members.members[best], analytic, pi, l, rec, tau);
        ++checks;
        if (!r.fidelity_ok || !r.diamond_ok) ++fidelity_violations;
        if (!r.diamond_consistent) ++diamond_inconsistent;
      }
    }
  }
  o.detail << checks << " pair checks: fidelity violations " << fidelity_violations << ", I_c shift violations "
           << shift_violations << ", inconsistent diamond estimates " << diamond_inconsistent;
  o.require(fidelity_violations == 0, "F_e gap below l*tau");
  o.require(shift_violations == 0, "I_c shift bound");
  o.require(diamond_inconsistent == 0, "diamond estimates consistent");
}

// 10. Discrimination and code conversion.
void criterion10(Outcome& o) {
  const auto t0 = Clock::now();
  const ChannelFamily fam = family_of({KrausChannel::phase_flip(0.02), KrausChannel::phase_flip(0.25)});
  const CVector probe = optimize_probe(fam);
  std::vector<DiscriminationReport> sweep;
  for (std::size_t m = 1; m <= 6; ++m) sweep.push_back(discriminate(fam, m, probe));
  const DecayFit fit = fit_decay(sweep);
  o.detail << "worst PGM success by m:";
  for (const auto& r : sweep) o.detail << " " << r.worst_success;
  o.require(fit.nondecreasing, "success nondecreasing in m");
  o.require(sweep.back().worst_success >= 0.99, "success >= 0.99 at m = 6");

  const SubspaceFrame frame = repetition_code_x(4);
  std::vector<InformedCode> codes;
  for (const auto& ch : fam.members) codes.push_back(informed_code(ch, 4, frame));
  const ConversionResult conv = convert_code(fam, codes, sweep.back());
  o.detail << "; combined F_e:";
  for (const auto& m : conv.members) {
    o.detail << " " << m.combined << " (product bound " << m.product_bound << ")";
    o.require(m.holds, "product lower bound");
    o.require(m.combined >= 0.8, "combined F_e >= 0.8");
  }
  const double secs = seconds_since(t0);
  o.detail << ", " << secs << " s";
  o.require(secs < 300.0, "runtime below 5 min");
}

// 11. Capacity estimation.
void criterion11(Outcome& o) {
  const CapacityResult pf = compound_capacity_lower(family_of({KrausChannel::phase_flip(0.1)}), 1);
  const double target = 1 - oracle::h2(0.1);
  const double dist = trace_norm(pf.rho.matrix() - 0.5 * identity(2));
  o.detail << "phase flip: " << pf.value << " (target " << target << "), distance to pi " << dist;
  o.require(std::abs(pf.value - target) <= 1e-4, "value 1 - H2(0.1)");
  o.require(dist <= 0.01, "maximizer near pi");

  const ChannelFamily iu = family_of({KrausChannel::identity(2), KrausChannel::useless(2, 2)});
  const double at_pi = min_coherent_information(DensityOperator::maximally_mixed(2), iu);
  const CapacityResult res = compound_capacity_lower(iu, 1);
  // I_c(ρ, id) = S(ρ) and I_c(ρ, U) = -S(ρ), with S depending on the Bloch radius only.
  const double scan = oracle::bloch_scan(
      [](double x, double y, double z) {
        const double s = oracle::h2((1.0 - std::min(1.0, std::sqrt(x * x + y * y + z * z))) / 2.0);
        return std::min(s, -s);
      },
      0.02);
  o.detail << "; {id, useless}: at pi " << at_pi << ", optimizer " << res.value << ", scan oracle " << scan;
  o.require(std::abs(at_pi + 1.0) <= 1e-10, "min route -1 at pi");
  o.require(std::abs(res.value - scan) <= 1e-3, "optimizer matches scan oracle");
}

// 12. BSST trend.
void criterion12(Outcome& o) {
  const BsstReport r = bsst_check(DensityOperator::diagonal({0.9, 0.1}), family_of({KrausChannel::phase_flip(0.1)}),
                                  {2, 4, 6, 8}, {0.45});
  o.detail << "deviation/envelope by l:";
  for (const auto& row : r.rows) o.detail << " l=" << row.l << ": " << row.deviation << "/" << row.envelope;
  o.require(r.monotone, "deviation decreasing in l");
  o.require(r.all_within, "deviation within envelope");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<void(Outcome&)>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},   {4, criterion4},   {5, criterion5},   {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, fn] : criteria) selected.push_back(id);
  int failures = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome o;
    try {
      it->second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail.str() << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
