#include "qcomp/experiment.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "qcomp/channel_io.hpp"
#include "qcomp/channels.hpp"
#include "qcomp/coding.hpp"
#include "qcomp/compound.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/information.hpp"
#include "qcomp/tolerances.hpp"
#include "qcomp/typicality.hpp"

#ifndef QCOMP_VERSION
#define QCOMP_VERSION "0.0.0"
#endif

namespace qcomp {

namespace {

using nlohmann::json;

const std::vector<std::string> kPipelines = {"info",         "typicality", "one-shot", "net",
                                             "discriminate", "convert",    "capacity", "bsst"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config: field '") + key + "' has the wrong type");
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidInput(std::string("config: missing field '") + key + "'");
  return get_or<T>(j, key, T{});
}

KrausChannel channel_from(const json& j) {
  if (j.is_string()) return parse_channel(j.get<std::string>());
  if (j.is_object() && j.contains("file")) return load_channel_file(j.at("file").get<std::string>());
  if (j.is_object()) return parse_channel(j.dump());
  throw InvalidInput("config: channel must be a name, a Kraus object or {\"file\": path}");
}

std::string label_of(const json& j, std::size_t i) {
  return j.is_string() ? j.get<std::string>() : "channel_" + std::to_string(i);
}

bool is_parametric(const json& c) { return c.contains("family") && c.at("family").is_object() && c.at("family").contains("parametric"); }

ParametricFamily parametric_from(const json& c) {
  const json& f = c.at("family");
  return ParametricFamily::parse(require<std::string>(f, "parametric"), require<double>(f, "lo"), require<double>(f, "hi"));
}

ChannelFamily family_from(const json& c) {
  ChannelFamily fam;
  if (c.contains("family")) {
    const json& f = c.at("family");
    if (f.is_array()) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        fam.members.push_back(channel_from(f[i]));
        fam.labels.push_back(label_of(f[i], i));
      }
    } else if (is_parametric(c)) {
      fam = parametric_from(c).sample(get_or<std::size_t>(f, "samples", 11));
    } else {
      throw InvalidInput("config: family must be a list of channels or a parametric family");
    }
  } else if (c.contains("channel")) {
    fam.members.push_back(channel_from(c.at("channel")));
    fam.labels.push_back(label_of(c.at("channel"), 0));
  } else {
    throw InvalidInput("config: need 'channel' or 'family'");
  }
  fam.validate();
  return fam;
}

DensityOperator state_from(const json& c, std::size_t dim) {
  if (!c.contains("state")) return DensityOperator::maximally_mixed(dim);
  const json& s = c.at("state");
  if (s.is_string() && s.get<std::string>() == "maximally_mixed") return DensityOperator::maximally_mixed(dim);
  if (s.is_object() && s.contains("diagonal")) {
    const auto probs = s.at("diagonal").get<std::vector<double>>();
    if (probs.size() != dim) throw InvalidInput("config: state dimension does not match the channels");
    double total = 0.0;
    for (double p : probs) {
      if (p < 0.0) throw InvalidInput("config: negative probability in state");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("config: state probabilities must sum to 1");
    return DensityOperator::diagonal(probs);
  }
  throw InvalidInput("config: state must be \"maximally_mixed\" or {\"diagonal\": [...]}");
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json projection_json(const ProjectionCertificate& c) {
  return {{"c", c.c},
          {"entropy", c.entropy},
          {"phi", c.phi},
          {"h", c.h},
          {"eta", c.eta},
          {"mass", c.mass},
          {"mass_classical", c.mass_classical},
          {"mass_bound", c.mass_bound},
          {"c_max", number(c.c_max)},
          {"min_eigen_log2", number(c.min_eigen_log2)},
          {"max_eigen_log2", number(c.max_eigen_log2)},
          {"sandwich_lo_log2", c.sandwich_lo_log2},
          {"sandwich_hi_log2", c.sandwich_hi_log2},
          {"dim", c.dim},
          {"dim_lo", c.dim_lo},
          {"dim_hi", c.dim_hi},
          {"hs_squared", c.hs_squared},
          {"hs_squared_bound", c.hs_squared_bound},
          {"item1", c.item1},
          {"item2", c.item2},
          {"item3", c.item3},
          {"hs_bound", c.hs_bound}};
}

json kraus_word_json(const KrausWordCertificate& c) {
  return {{"c_prime", c.c_prime},
          {"entropy_exchange", c.entropy_exchange},
          {"h_prime", c.h_prime},
          {"mass", c.mass},
          {"mass_channel", number(c.mass_channel)},
          {"mass_bound", c.mass_bound},
          {"c_max", number(c.c_max)},
          {"count", c.count},
          {"gamma", c.gamma},
          {"gamma_min", number(c.gamma_min)},
          {"count_bound_log2", c.count_bound_log2},
          {"item1", c.item1},
          {"item2", c.item2}};
}

void assert_that(ExperimentReport& rep, bool ok, const std::string& name) {
  if (!ok) rep.failed_assertions.push_back(name);
}

std::size_t block_dim(std::size_t d, std::size_t l, const Guards& g) {
  if (l > g.max_l) throw GuardExceeded("block length " + std::to_string(l) + " exceeds guard " + std::to_string(g.max_l));
  return checked_power(d, l, g.max_dim);
}

TypicalityConstants constants_from(const json& c) {
  TypicalityConstants k;
  k.c = get_or<double>(c, "c", k.c);
  k.c_prime = get_or<double>(c, "c_prime", k.c_prime);
  return k;
}

TypicalityGuard typicality_guard(const Guards& g) {
  TypicalityGuard t;
  t.max_l = g.max_l;
  t.max_projector_dim = std::min(t.max_projector_dim, g.max_dim);
  return t;
}

// ---------------------------------------------------------------- pipelines

ExperimentReport run_info(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  ExperimentReport rep;
  rep.table.columns = {"member", "ic_purification", "ic_complementary", "output_entropy",
                       "fe_purification", "fe_kraus", "entropy_exchange"};
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const KrausChannel& ch = fam.members[i];
    const DensityOperator rho = state_from(c, ch.in_dim());
    const CoherentInfoRoutes ic = coherent_information_routes(rho, ch);
    assert_that(rep, std::abs(ic.purification - ic.complementary) <= tol::kCoherentInfoRoutes,
                "coherent information routes agree for " + fam.labels[i]);
    double fe_p = std::numeric_limits<double>::quiet_NaN();
    double fe_k = fe_p;
    if (ch.in_dim() == ch.out_dim()) {
      const FidelityRoutes fr = entanglement_fidelity_routes(rho, ch);
      fe_p = fr.purification;
      fe_k = fr.kraus;
      assert_that(rep, std::abs(fe_p - fe_k) <= tol::kFidelityRoutes,
                  "entanglement fidelity routes agree for " + fam.labels[i]);
    }
    const double se = entropy_psd(apply(complementary(ch), rho));
    rep.table.rows.push_back({fam.labels[i], ic.purification, ic.complementary, ic.output_entropy, number(fe_p),
                              number(fe_k), se});
  }
  rep.summary["members"] = fam.size();
  return rep;
}

ExperimentReport run_typicality(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const std::size_t l = require<std::size_t>(c, "l");
  const double delta = require<double>(c, "delta");
  const TypicalityConstants k = constants_from(c);
  const TypicalityGuard guard = typicality_guard(cfg.guards);
  ExperimentReport rep;
  rep.table.columns = {"lemma", "quantity", "value"};
  auto emit = [&](const std::string& lemma, const json& cert) {
    for (const auto& [key, value] : cert.items()) rep.table.rows.push_back({lemma, key, value});
  };

  std::size_t dim = 0;
  std::optional<KrausChannel> ch;
  if (c.contains("channel") || c.contains("family")) {
    ch = family_from(c).members.front();
    dim = ch->in_dim();
  } else if (c.contains("state") && c.at("state").is_object() && c.at("state").contains("diagonal")) {
    dim = c.at("state").at("diagonal").size();
  } else {
    throw InvalidInput("config: typicality needs a diagonal state or a channel");
  }
  if (c.contains("state")) {
    const TypicalProjection tp = typical_projector(state_from(c, dim), l, delta, k, guard);
    const json cert = projection_json(tp.certificate);
    rep.summary["typical_projection"] = cert;
    rep.summary["typical_size"] = tp.spec.size;
    emit("typical_projection", cert);
    assert_that(rep, tp.certificate.item2, "typical projection: eigenvalue sandwich");
    assert_that(rep, tp.certificate.item3, "typical projection: dimension bounds");
    assert_that(rep, tp.certificate.hs_bound, "typical projection: Hilbert-Schmidt bound");
  }
  if (ch) {
    const TypicalKrausSet tk =
        typical_kraus(*ch, DensityOperator::maximally_mixed(ch->in_dim()), l, delta, k, guard);
    const json cert = kraus_word_json(tk.certificate);
    rep.summary["typical_kraus"] = cert;
    emit("typical_kraus", cert);
    assert_that(rep, tk.certificate.item2, "typical Kraus words: count bound");
    if (std::isfinite(tk.certificate.mass_channel)) {
      assert_that(rep, std::abs(tk.certificate.mass_channel - tk.certificate.mass) <= 1e-10,
                  "typical Kraus words: operator mass equals word mass");
    }
  }
  return rep;
}

ExperimentReport run_one_shot(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  const std::size_t l = require<std::size_t>(c, "l");
  const std::size_t k = require<std::size_t>(c, "k");
  const std::size_t trials = require<std::size_t>(c, "trials");
  if (trials > cfg.guards.max_trials) throw GuardExceeded("trial count exceeds guard");
  const bool truncate = get_or<bool>(c, "truncate", true);
  const std::size_t d = fam.members.front().in_dim();
  block_dim(d, l, cfg.guards);
  const DensityOperator pi = DensityOperator::maximally_mixed(d);

  std::vector<WordChannel> channels;
  OneShotBoundReport bound;
  json certificates = json::array();
  if (truncate) {
    const double delta = require<double>(c, "delta");
    std::vector<TruncatedChannel> tcs;
    for (const auto& ch : fam.members) {
      tcs.push_back(truncate_channel(ch, pi, l, delta, constants_from(c), typicality_guard(cfg.guards)));
      certificates.push_back({{"typical_kraus", kraus_word_json(tcs.back().kraus_certificate)},
                              {"output_projection", projection_json(tcs.back().output_certificate)},
                              {"kraus_words", tcs.back().n}});
    }
    bound = one_shot_bound(tcs, k, pi);
    for (auto& tc : tcs) channels.push_back(std::move(tc.channel));
  } else {
    std::vector<OneShotTerm> terms;
    for (const auto& ch : fam.members) {
      channels.push_back(tensor_word_channel(ch, l));
      const CMatrix out = channels.back().apply_product(pi.matrix());
      terms.push_back({static_cast<double>(channels.back().size()), std::real(out.trace()), out.norm(),
                       std::numeric_limits<double>::quiet_NaN()});
    }
    bound = one_shot_bound(terms, k);
  }

  MonteCarloOptions mc;
  mc.trials = trials;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  mc.recovery.iterations = get_or<std::size_t>(c, "recovery_iterations", mc.recovery.iterations);
  const MonteCarloResult res = monte_carlo_fidelity(channels, identity(d), k, mc);

  ExperimentReport rep;
  double min_f = 1.0;
  rep.table.columns = {"trial", "seed", "fidelity", "w", "gap"};
  Table trials_table;
  trials_table.columns = {"trial", "seed", "F_e", "w", "gap", "runtime_ms"};
  for (const auto& t : res.trials) {
    rep.table.rows.push_back({t.trial, std::to_string(t.seed), t.fidelity, t.w, t.gap});
    trials_table.rows.push_back({t.trial, std::to_string(t.seed), t.fidelity, t.w, t.gap, t.runtime_ms});
    min_f = std::min(min_f, t.fidelity);
  }
  rep.trials = trials_table;
  json terms = json::array();
  for (const auto& t : bound.terms)
    terms.push_back({{"n", t.n}, {"trace", t.trace}, {"hs_norm", t.hs_norm}, {"hs_squared_bound", number(t.hs_squared_bound)}});
  rep.summary = {{"bound", bound.bound},
                 {"trace", bound.trace},
                 {"penalty", bound.penalty},
                 {"vacuous", bound.vacuous},
                 {"terms", terms},
                 {"mean_fidelity", res.mean},
                 {"std_fidelity", res.stddev},
                 {"stderr_fidelity", res.stderr_mean},
                 {"min_fidelity", min_f},
                 {"decoupling_violations", res.decoupling_violations},
                 {"truncated", truncate},
                 {"certificates", certificates}};
  assert_that(rep, res.decoupling_violations == 0, "decoupling lower bound holds on every trial");
  return rep;
}

ExperimentReport run_net(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  if (!is_parametric(c)) throw InvalidInput("config: the net pipeline needs a parametric family");
  const ParametricFamily pf = parametric_from(c);
  const double tau = require<double>(c, "tau");
  const std::size_t l = get_or<std::size_t>(c, "l", 1);
  const std::size_t dim = block_dim(2, l, cfg.guards);
  DiamondOptions dopt;
  dopt.seed = cfg.seed;
  dopt.threads = cfg.threads;
  dopt.restarts = get_or<std::size_t>(c, "diamond_restarts", dopt.restarts);
  const ChannelNet net = build_adapted_net(pf, tau, dopt);
  const ChannelFamily samples = pf.sample(get_or<std::size_t>(c.at("family"), "samples", 11));
  const DensityOperator pi = DensityOperator::maximally_mixed(dim);
  const KrausChannel id_rec = KrausChannel::identity(dim);
  const KrausChannel rand_rec = random_channel(dim, dim, 2, derive_seed(cfg.seed, 7));
  const KrausChannel useless = KrausChannel::useless(2, 2);

  ExperimentReport rep;
  rep.table.columns = {"p", "g", "diamond_lower", "diamond_analytic", "diamond_lower_l", "fidelity_gap_identity",
                       "fidelity_gap_random", "l_tau"};
  const std::size_t n = samples.size();
  for (std::size_t s = 0; s < n; ++s) {
    const double p = n == 1 ? pf.lo : pf.lo + (pf.hi - pf.lo) * static_cast<double>(s) / static_cast<double>(n - 1);
    std::size_t best = 0;
    for (std::size_t i = 1; i < net.parameters.size(); ++i)
      if (std::abs(net.parameters[i] - p) < std::abs(net.parameters[best] - p)) best = i;
    const double g = net.parameters[best];
    const double analytic = pf.lipschitz() * std::abs(p - g) + (tau / 2.0) * 2.0;
    const ApproximationReport a = approximation_check(samples.members[s], net.members.members[best], analytic, pi, l,
                                                      id_rec, tau, dopt);
    const ApproximationReport b = approximation_check(samples.members[s], net.members.members[best], analytic, pi, l,
                                                      rand_rec, tau, dopt);
    assert_that(rep, a.diamond_consistent, "diamond estimate within the analytic pair bound");
    assert_that(rep, a.diamond_ok, "l-fold diamond estimate below l tau");
    assert_that(rep, a.fidelity_ok && b.fidelity_ok, "fidelity gap below l tau");
    rep.table.rows.push_back({p, g, a.diamond_lower, analytic, a.diamond_lower_l, a.fidelity_gap, b.fidelity_gap,
                              static_cast<double>(l) * tau});
  }
  const double margin = adapted_mixing_margin(net, 64, cfg.seed);
  const IcShiftReport shift = ic_shift_check(DensityOperator::maximally_mixed(2), samples, net);
  assert_that(rep, margin >= -1e-12, "adapted members dominate tau/(2d') times the identity");
  assert_that(rep, shift.holds, "coherent information shift within tau + 2 tau log(d/tau)");
  rep.summary = {{"net_size", net.members.size()},
                 {"parameters", net.parameters},
                 {"step", net.step},
                 {"covering_radius", net.covering_radius},
                 {"distance_lower", net.distance_lower},
                 {"log2_adapted_cardinality_bound", net.log2_cardinality_bound},
                 {"log2_net_cardinality_bound", net_cardinality_bound(tau, 2, 2)},
                 {"mixing_margin", margin},
                 {"ic_family", shift.family_value},
                 {"ic_net", shift.net_value},
                 {"ic_shift", shift.shift},
                 {"ic_shift_bound", shift.bound}};
  return rep;
}

DiscriminationOptions discrimination_options(const ExperimentConfig& cfg) {
  DiscriminationOptions o;
  o.seed = cfg.seed;
  o.probe_restarts = get_or<std::size_t>(cfg.source, "probe_restarts", o.probe_restarts);
  return o;
}

json vector_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ExperimentReport run_discriminate(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  if (fam.size() < 2) throw InvalidInput("config: discrimination needs at least two members");
  const std::size_t m_max = require<std::size_t>(c, "m");
  checked_power(fam.members.front().out_dim(), m_max, cfg.guards.max_povm_dim);
  const DiscriminationOptions opts = discrimination_options(cfg);
  const CVector probe = optimize_probe(fam, opts);
  std::vector<DiscriminationReport> sweep;
  ExperimentReport rep;
  rep.table.columns = {"m", "average_success", "worst_success"};
  for (std::size_t i = 0; i < fam.size(); ++i) rep.table.columns.push_back("success_" + std::to_string(i));
  for (std::size_t m = 1; m <= m_max; ++m) {
    sweep.push_back(discriminate(fam, m, probe, opts));
    std::vector<json> row = {m, sweep.back().average_success, sweep.back().worst_success};
    for (double s : sweep.back().correct) row.push_back(s);
    rep.table.rows.push_back(row);
  }
  const DecayFit fit = fit_decay(sweep);
  rep.summary = {{"probe", vector_json(probe)},
                 {"min_pairwise_distance", sweep.front().min_pairwise_distance},
                 {"indistinguishable", sweep.front().indistinguishable},
                 {"fitted_f", fit.f},
                 {"fitted_log_c", fit.log_c},
                 {"nondecreasing", fit.nondecreasing},
                 {"success_matrix", sweep.back().success}};
  return rep;
}

ExperimentReport run_convert(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  const std::size_t m = require<std::size_t>(c, "m");
  const std::size_t t = require<std::size_t>(c, "t");
  const std::string code_kind = get_or<std::string>(c, "code", "repetition_x");
  const std::size_t d = fam.members.front().in_dim();
  const std::size_t tdim = block_dim(d, t, cfg.guards);
  block_dim(d, m, cfg.guards);
  SubspaceFrame frame;
  if (code_kind == "repetition_x") {
    if (d != 2) throw InvalidInput("config: the repetition code needs qubit channels");
    frame = repetition_code_x(t);
  } else if (code_kind == "haar") {
    frame = SubspaceFrame{haar_isometry(tdim, require<std::size_t>(c, "k"), derive_seed(cfg.seed, 11))};
  } else {
    throw InvalidInput("config: code must be \"repetition_x\" or \"haar\"");
  }
  std::vector<InformedCode> codes;
  for (const auto& ch : fam.members) codes.push_back(informed_code(ch, t, frame));
  codes = equalize_codes(fam, codes, t);
  const DiscriminationOptions opts = discrimination_options(cfg);
  const DiscriminationReport disc = fam.size() >= 2 ? discriminate(fam, m, opts) : [&] {
    DiscriminationReport r;
    r.m = m;
    r.probe = basis_ket(d, 0);
    r.povm = {identity(checked_power(fam.members.front().out_dim(), m, cfg.guards.max_povm_dim))};
    r.success = {{1.0}};
    r.correct = {1.0};
    r.average_success = r.worst_success = 1.0;
    return r;
  }();
  const ConversionResult conv = convert_code(fam, codes, disc);
  ExperimentReport rep;
  rep.table.columns = {"member", "estimation", "informed", "product_bound", "combined", "factorized"};
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto& mem = conv.members[i];
    rep.table.rows.push_back({fam.labels[i], mem.estimation, mem.informed, mem.product_bound, mem.combined,
                              mem.factorized});
    assert_that(rep, mem.holds, "product bound for " + fam.labels[i]);
  }
  rep.summary = {{"m", m}, {"t", t}, {"code", code_kind}, {"probe", vector_json(disc.probe)},
                 {"success_matrix", disc.success}};
  return rep;
}

ExperimentReport run_capacity(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  const std::size_t l = get_or<std::size_t>(c, "l", 1);
  block_dim(fam.members.front().in_dim(), l, cfg.guards);
  CapacityOptions opts;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  opts.random_starts = get_or<std::size_t>(c, "random_starts", opts.random_starts);
  const CapacityResult res = compound_capacity_lower(fam, l, opts);
  const double at_pi = min_coherent_information(DensityOperator::maximally_mixed(fam.members.front().in_dim()), fam);
  ExperimentReport rep;
  rep.table.columns = {"start", "start_value", "value"};
  for (const auto& s : res.starts) rep.table.rows.push_back({s.label, s.start_value, s.value});
  if (l == 1) assert_that(rep, res.value >= at_pi - 1e-12, "optimum at least the value at the maximally mixed state");
  rep.summary = {{"value", res.value}, {"l", l}, {"rho", matrix_json(res.rho.matrix())}, {"value_at_maximally_mixed", at_pi}};
  return rep;
}

ExperimentReport run_bsst(const ExperimentConfig& cfg) {
  const json& c = cfg.source;
  const ChannelFamily fam = family_from(c);
  const std::size_t d = fam.members.front().in_dim();
  const auto ls = require<std::vector<std::size_t>>(c, "ls");
  for (std::size_t l : ls) block_dim(d, l, cfg.guards);
  std::vector<double> deltas = c.contains("deltas") ? require<std::vector<double>>(c, "deltas")
                                                    : std::vector<double>{require<double>(c, "delta")};
  const std::vector<double> taus = get_or<std::vector<double>>(c, "taus", {});
  const BsstReport res = bsst_check(state_from(c, d), fam, ls, deltas, taus);
  ExperimentReport rep;
  rep.table.columns = {"l", "delta", "tau", "value", "target", "deviation", "mass", "theta_out", "theta_env",
                       "big_delta", "envelope", "within"};
  for (const auto& r : res.rows) {
    rep.table.rows.push_back({r.l, r.delta, r.tau, r.value, r.target, r.deviation, r.mass, r.theta_out, r.theta_env,
                              r.big_delta, r.envelope, r.within});
    assert_that(rep, r.within, "deviation within the envelope at l=" + std::to_string(r.l));
  }
  rep.summary = {{"monotone", res.monotone}, {"all_within", res.all_within}};
  return rep;
}

std::string format_cell(const json& v) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(12) << v.get<double>();
    return os.str();
  }
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return s;
}

}  // namespace

std::string artifact_version() { return QCOMP_VERSION; }

ExperimentConfig ExperimentConfig::parse(json j, std::optional<std::uint64_t> seed_override,
                                         std::optional<std::size_t> threads_override) {
  if (!j.is_object()) throw InvalidInput("config: top level must be a JSON object");
  if (seed_override) j["seed"] = *seed_override;
  if (threads_override) j["threads"] = *threads_override;
  ExperimentConfig cfg;
  cfg.pipeline = require<std::string>(j, "pipeline");
  if (std::find(kPipelines.begin(), kPipelines.end(), cfg.pipeline) == kPipelines.end()) {
    throw InvalidInput("config: unknown pipeline '" + cfg.pipeline + "'");
  }
  if (!j.contains("seed")) throw InvalidInput("config: seed is mandatory");
  cfg.seed = require<std::uint64_t>(j, "seed");
  cfg.threads = std::max<std::size_t>(1, get_or<std::size_t>(j, "threads", 1));
  if (j.contains("guards")) {
    const json& g = j.at("guards");
    cfg.guards.max_l = get_or<std::size_t>(g, "max_l", cfg.guards.max_l);
    cfg.guards.max_dim = get_or<std::size_t>(g, "max_dim", cfg.guards.max_dim);
    cfg.guards.max_trials = get_or<std::size_t>(g, "max_trials", cfg.guards.max_trials);
    cfg.guards.max_povm_dim = get_or<std::size_t>(g, "max_povm_dim", cfg.guards.max_povm_dim);
  }
  cfg.source = std::move(j);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, std::optional<std::uint64_t> seed_override,
                                        std::optional<std::size_t> threads_override) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(std::move(j), seed_override, threads_override);
}

std::string ExperimentConfig::hash() const {
  const std::string text = source.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("config hash: SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

ValidationResult validate(const ExperimentConfig& cfg) {
  ValidationResult v;
  const json& c = cfg.source;
  auto reject = [&](const std::string& msg) {
    v.ok = false;
    v.guard_rejected = true;
    v.diagnostics.push_back(msg);
  };
  std::size_t d = 2;
  if (c.contains("channel") || (c.contains("family") && (c.at("family").is_array() || is_parametric(c)))) {
    d = family_from(c).members.front().in_dim();
  }
  std::vector<std::size_t> ls;
  for (const char* key : {"l", "t", "m"})
    if (c.contains(key)) ls.push_back(get_or<std::size_t>(c, key, 1));
  if (c.contains("ls")) for (std::size_t l : get_or<std::vector<std::size_t>>(c, "ls", {})) ls.push_back(l);
  double largest = static_cast<double>(d);
  for (std::size_t l : ls) {
    if (l > cfg.guards.max_l) {
      reject("block length " + std::to_string(l) + " exceeds max_l = " + std::to_string(cfg.guards.max_l));
      continue;
    }
    const double full = std::pow(static_cast<double>(d), static_cast<double>(l));
    largest = std::max(largest, full);
    if (cfg.pipeline != "typicality" && full > static_cast<double>(cfg.guards.max_dim)) {
      reject("dimension " + std::to_string(d) + "^" + std::to_string(l) + " exceeds max_dim = " +
             std::to_string(cfg.guards.max_dim));
    }
  }
  if (c.contains("trials") && get_or<std::size_t>(c, "trials", 0) > cfg.guards.max_trials) {
    reject("trial count exceeds max_trials");
  }
  // A few dense operators on the largest space dominate memory.
  v.estimated_bytes = 8.0 * 16.0 * largest * largest;
  if (v.ok) {
    std::ostringstream os;
    os << "ok: pipeline " << cfg.pipeline << ", largest dimension " << largest << ", estimated memory "
       << std::setprecision(3) << v.estimated_bytes / (1024.0 * 1024.0) << " MiB";
    v.diagnostics.push_back(os.str());
  }
  return v;
}

ExperimentReport run(const ExperimentConfig& cfg) {
  const ValidationResult v = validate(cfg);
  if (v.guard_rejected) throw GuardExceeded(v.diagnostics.front());
  if (cfg.pipeline == "info") return run_info(cfg);
  if (cfg.pipeline == "typicality") return run_typicality(cfg);
  if (cfg.pipeline == "one-shot") return run_one_shot(cfg);
  if (cfg.pipeline == "net") return run_net(cfg);
  if (cfg.pipeline == "discriminate") return run_discriminate(cfg);
  if (cfg.pipeline == "convert") return run_convert(cfg);
  if (cfg.pipeline == "capacity") return run_capacity(cfg);
  return run_bsst(cfg);
}

std::string to_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << "\n";
  }
  return os.str();
}

void write_reports(const ExperimentConfig& cfg, const ExperimentReport& rep, const std::string& out_dir,
                   double wall_clock_ms) {
  std::filesystem::create_directories(out_dir);
  json rows = json::array();
  for (const auto& row : rep.table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size() && i < rep.table.columns.size(); ++i) obj[rep.table.columns[i]] = row[i];
    rows.push_back(obj);
  }
  const json doc = {{"artifact", "qcomp"},
                    {"version", artifact_version()},
                    {"pipeline", cfg.pipeline},
                    {"seed", cfg.seed},
                    {"config_hash", cfg.hash()},
                    {"config", cfg.source},
                    {"summary", rep.summary},
                    {"rows", rows},
                    {"failed_assertions", rep.failed_assertions},
                    {"wall_clock_ms", wall_clock_ms}};
  std::ofstream(std::filesystem::path(out_dir) / "report.json") << doc.dump(2) << "\n";
  std::ofstream(std::filesystem::path(out_dir) / "report.csv") << to_csv(rep.table);
  if (rep.trials) std::ofstream(std::filesystem::path(out_dir) / "trials.csv") << to_csv(*rep.trials);
}

}  // namespace qcomp
