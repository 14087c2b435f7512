#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "qcomp/compound.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/parallel.hpp"
#include "qcomp/typicality.hpp"

namespace qcomp {

namespace {

// Minimizes `f` with the GSL simplex method and returns the best point.
struct SimplexOutcome {
  std::vector<double> x;
  double value = 0.0;
};

SimplexOutcome simplex_minimize(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                double step, std::size_t max_iterations, double tol) {
  gsl_set_error_handler_off();
  const std::size_t n = x0.size();
  struct Ctx {
    const std::function<double(const std::vector<double>&)>* f;
    std::size_t n;
  } ctx{&f, n};
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* params) -> double {
    auto* c = static_cast<Ctx*>(params);
    std::vector<double> x(c->n);
    for (std::size_t i = 0; i < c->n; ++i) x[i] = gsl_vector_get(v, i);
    try {
      const double val = (*c->f)(x);
      return std::isfinite(val) ? val : 1e10;
    } catch (const std::exception&) {
      return 1e10;
    }
  };
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> steps(gsl_vector_alloc(n), gsl_vector_free);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, x0[i]);
  gsl_vector_set_all(steps.get(), step);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), steps.get());
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tol) == GSL_SUCCESS) break;
  }
  SimplexOutcome out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(s->x, i);
  out.value = s->fval;
  return out;
}

CMatrix params_to_matrix(const std::vector<double>& p, std::size_t dim) {
  CMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim * dim; ++i) a(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)) = Complex(p[2 * i], p[2 * i + 1]);
  return a;
}

std::vector<double> matrix_to_params(const CMatrix& a) {
  std::vector<double> p;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      p.push_back(a(r, c).real());
      p.push_back(a(r, c).imag());
    }
  return p;
}

DensityOperator state_from(const CMatrix& a) {
  const CMatrix m = a * a.adjoint();
  const double tr = std::real(m.trace());
  if (!(tr > 1e-300)) throw InvalidInput("degenerate parameter point");
  return DensityOperator(CMatrix((m / tr + (m / tr).adjoint()) * 0.5));
}

double family_objective(const DensityOperator& rho, const ChannelFamily& family, std::size_t l) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ch : family.members) {
    const double v = l == 1 ? coherent_information(rho, ch) : coherent_information_tensor(rho, ch, l);
    best = std::min(best, v);
  }
  return best / static_cast<double>(l);
}

}  // namespace

CapacityResult compound_capacity_lower(const ChannelFamily& family, std::size_t l, const CapacityOptions& opts) {
  family.validate();
  if (l == 0) throw InvalidInput("compound_capacity_lower: l must be positive");
  const std::size_t dim = checked_power(family.members.front().in_dim(), l, 16);

  struct Start {
    std::string label;
    CMatrix a;
  };
  std::vector<Start> starts;
  for (std::size_t j = dim; j >= 1; --j) {
    CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < j; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    starts.push_back({"uniform_subspace_" + std::to_string(j), a});
  }
  for (std::size_t r = 0; r < opts.random_starts; ++r) {
    starts.push_back({"random_" + std::to_string(r), ginibre(dim, dim, derive_seed(opts.seed, r))});
  }

  std::vector<CapacityStart> records(starts.size());
  std::vector<CMatrix> best_a(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t s) {
    const Start& st = starts[s];
    records[s].label = st.label;
    records[s].start_value = family_objective(state_from(st.a), family, l);
    const auto f = [&](const std::vector<double>& p) {
      return -family_objective(state_from(params_to_matrix(p, dim)), family, l);
    };
    const double scale = std::max(1e-3, st.a.norm() / std::sqrt(static_cast<double>(dim)));
    const SimplexOutcome out = simplex_minimize(f, matrix_to_params(st.a), 0.1 * scale, opts.max_iterations,
                                                opts.simplex_tol);
    CMatrix a = params_to_matrix(out.x, dim);
    double value = -out.value;
    if (!(value >= records[s].start_value)) {
      a = st.a;
      value = records[s].start_value;
    }
    records[s].value = value;
    best_a[s] = a;
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < records.size(); ++s)
    if (records[s].value > records[best].value) best = s;
  const DensityOperator rho = state_from(best_a[best]);
  return {rho, family_objective(rho, family, l), l, std::move(records)};
}

AveragedFidelityReport averaged_fidelity_check(const DensityOperator& rho, const std::vector<KrausChannel>& members,
                                               const std::vector<double>& weights, const KrausChannel& recovery) {
  if (members.empty() || members.size() != weights.size()) throw InvalidInput("averaged_fidelity_check: weights");
  AveragedFidelityReport rep;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InvalidInput("averaged_fidelity_check: weights must be positive");
    rep.members.push_back(entanglement_fidelity(rho, compose(recovery, members[i])));
    rep.linear += weights[i] * rep.members.back();
  }
  rep.average = entanglement_fidelity(rho, compose(recovery, convex_combination(members, weights)));
  rep.linear_ok = std::abs(rep.average - rep.linear) <= 1e-10;
  const double eps = 1.0 - rep.average;
  rep.back_conversion_ok = true;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (rep.members[i] < 1.0 - eps / weights[i] - 1e-12) rep.back_conversion_ok = false;
  }
  return rep;
}

BsstReport bsst_check(const DensityOperator& rho, const ChannelFamily& family, const std::vector<std::size_t>& ls,
                      const std::vector<double>& deltas, std::vector<double> taus) {
  family.validate();
  if (ls.empty()) throw InvalidInput("bsst_check: empty l grid");
  if (deltas.size() != 1 && deltas.size() != ls.size()) throw InvalidInput("bsst_check: δ schedule length");
  if (taus.empty())
    for (std::size_t l : ls) taus.push_back(1.0 / (std::exp(1.0) * static_cast<double>(l * l)));
  if (taus.size() != ls.size()) throw InvalidInput("bsst_check: τ schedule length");

  const std::size_t d = rho.dim();
  const std::size_t d_out = family.members.front().out_dim();
  const double target = min_coherent_information(rho, family);
  const double dd = static_cast<double>(d);

  BsstReport rep;
  rep.all_within = true;
  for (std::size_t idx = 0; idx < ls.size(); ++idx) {
    const std::size_t l = ls[idx];
    const double delta = deltas.size() == 1 ? deltas[0] : deltas[idx];
    const double tau = taus[idx];
    const double lt = static_cast<double>(l) * tau;
    if (!(tau > 0.0 && lt <= 1.0 / std::exp(1.0))) throw InvalidInput("bsst_check: need 0 < lτ <= 1/e");
    TypicalityGuard guard;
    const TypicalProjection tp = typical_projector(rho, l, delta, {}, guard);
    if (!tp.spec.projector) throw GuardExceeded("bsst_check: typical projector too large");
    const CMatrix& q = *tp.spec.projector;
    const DensityOperator pi(CMatrix(q / std::real(q.trace())));

    BsstRow row;
    row.l = l;
    row.delta = delta;
    row.tau = tau;
    row.target = target;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& ch : family.members) best = std::min(best, coherent_information_tensor(pi, ch, l));
    row.value = best / static_cast<double>(l);
    row.deviation = std::abs(row.value - target);
    row.mass = tp.certificate.mass;

    std::size_t d_env = 1;
    const KrausChannel useless = KrausChannel::useless(d, d_out);
    for (const auto& ch : family.members) {
      const KrausChannel mixed = mix(ch, useless, tau / 2.0);
      d_env = std::max(d_env, canonical_kraus(mixed, DensityOperator::maximally_mixed(d)).channel.size());
    }
    const double phi = phi_delta(delta, d);
    const double ld = static_cast<double>(l);
    auto theta = [&](double big_d) {
      return -std::log2(row.mass) / ld + 2.0 * phi - dd * delta * std::log2(tau / (2.0 * big_d));
    };
    const double de = static_cast<double>(d_env);
    row.theta_out = theta(static_cast<double>(d_out));
    row.theta_env = theta(de);
    row.big_delta = row.theta_out + row.theta_env + tau * std::log2(de / tau) + lt * std::log2(de / lt);
    row.envelope = row.big_delta + tau + 2.0 * lt * std::log2(dd / lt) + tau + 2.0 * tau * std::log2(dd / tau);
    row.within = row.deviation <= row.envelope;
    rep.all_within = rep.all_within && row.within;
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].deviation > rep.rows[i - 1].deviation) rep.monotone = false;
  return rep;
}

}  // namespace qcomp
