#include "qcomp/coding.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "qcomp/errors.hpp"
#include "qcomp/parallel.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

void SubspaceFrame::validate() const {
  if (isometry.cols() == 0 || isometry.cols() > isometry.rows()) throw InvalidInput("subspace frame has invalid shape");
  const double dev = (isometry.adjoint() * isometry - identity(k())).cwiseAbs().maxCoeff();
  if (dev > tol::kUnitary) throw InvalidInput("subspace frame columns are not orthonormal");
}

SubspaceFrame SubspaceFrame::first_k(std::size_t ambient, std::size_t k) {
  if (k == 0 || k > ambient) throw InvalidInput("first_k: need 0 < k <= ambient");
  return {identity(ambient).leftCols(static_cast<Eigen::Index>(k))};
}

CMatrix SubspaceFrame::maximally_mixed() const {
  return isometry * isometry.adjoint() / static_cast<double>(k());
}

WordChannel tensor_word_channel(const KrausChannel& ch, std::size_t l, std::size_t cap) {
  const std::size_t total = checked_power(ch.size(), l, cap);
  std::vector<std::vector<std::size_t>> words;
  words.reserve(total);
  for (std::size_t w = 0; w < total; ++w) {
    std::vector<std::size_t> y(l);
    std::size_t rem = w;
    for (std::size_t s = l; s-- > 0;) {
      y[s] = rem % ch.size();
      rem /= ch.size();
    }
    words.push_back(std::move(y));
  }
  return WordChannel(ch.kraus(), std::move(words), l);
}

TruncatedChannel truncate_channel(const KrausChannel& ch, const DensityOperator& pi_g, std::size_t l, double delta,
                                  const TypicalityConstants& constants, const TypicalityGuard& guard) {
  TypicalKrausSet tk = typical_kraus(ch, pi_g, l, delta, constants, guard);
  const DensityOperator out_state = DensityOperator::normalized(apply(ch, pi_g));
  TypicalityGuard no_dense = guard;
  no_dense.max_projector_dim = 0;
  const TypicalProjection tp = typical_projector(out_state, l, delta, constants, no_dense);
  std::vector<char> mask = type_mask(tp.spec.types, ch.out_dim(), l, guard);
  WordChannel channel = std::move(tk.reduced);
  channel.set_output_projection(tp.spec.site_basis, std::move(mask));
  const std::size_t n = channel.size();
  return {std::move(channel), tk.certificate, tp.certificate, tp.certificate.entropy, n};
}

OneShotBoundReport one_shot_bound(const std::vector<OneShotTerm>& terms, std::size_t k) {
  if (terms.empty()) throw InvalidInput("one_shot_bound: no channels");
  if (k == 0) throw InvalidInput("one_shot_bound: k must be positive");
  OneShotBoundReport rep;
  rep.terms = terms;
  rep.k = k;
  for (const auto& t : terms) {
    rep.trace += t.trace;
    rep.penalty += 2.0 * std::sqrt(static_cast<double>(k) * t.n) * t.hs_norm;
  }
  rep.trace /= static_cast<double>(terms.size());
  rep.bound = rep.trace - rep.penalty;
  rep.vacuous = !(rep.bound > 0.0);
  return rep;
}

OneShotBoundReport one_shot_bound(const std::vector<TruncatedChannel>& channels, std::size_t k,
                                  const DensityOperator& pi_g) {
  std::vector<OneShotTerm> terms;
  for (const auto& tc : channels) {
    if (tc.channel.out_dim() > 4096) throw GuardExceeded("one_shot_bound: output space too large");
    const CMatrix out = tc.channel.apply_product(pi_g.matrix());
    OneShotTerm t;
    t.n = static_cast<double>(tc.n);
    t.trace = std::real(out.trace());
    t.hs_norm = out.norm();
    const double ld = static_cast<double>(tc.channel.l());
    t.hs_squared_bound = std::exp2(-ld * (tc.output_entropy - 3.0 * tc.output_certificate.phi));
    terms.push_back(t);
  }
  return one_shot_bound(terms, k);
}

DecouplingGap decoupling_gap(const std::vector<CMatrix>& kraus_on_code) {
  if (kraus_on_code.empty()) throw InvalidInput("decoupling_gap: no Kraus operators");
  const Eigen::Index k = kraus_on_code.front().cols();
  const Eigen::Index out = kraus_on_code.front().rows();
  const auto n = static_cast<Eigen::Index>(kraus_on_code.size());
  const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(k));
  CMatrix c(out, k * n);
  for (Eigen::Index s = 0; s < k; ++s)
    for (Eigen::Index i = 0; i < n; ++i) c.col(s * n + i) = kraus_on_code[static_cast<std::size_t>(i)].col(s) * inv_sqrt_k;
  const CMatrix joint = (c.adjoint() * c).conjugate();
  CMatrix env(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      env(i, j) = (kraus_on_code[static_cast<std::size_t>(i)] * kraus_on_code[static_cast<std::size_t>(j)].adjoint()).trace() /
                  static_cast<double>(k);
  const CMatrix product = kron(identity(static_cast<std::size_t>(k)) / static_cast<double>(k), env);
  DecouplingGap out_gap;
  out_gap.w = std::real(env.trace());
  out_gap.gap = trace_norm_hermitian(joint - product);
  return out_gap;
}

DecouplingGap decoupling_gap(const SubspaceFrame& frame, const KrausChannel& ch) {
  frame.validate();
  if (frame.ambient() != ch.in_dim()) throw DimensionMismatch("decoupling_gap: frame does not match channel input");
  std::vector<CMatrix> on_code;
  for (const auto& a : ch.kraus()) on_code.push_back(a * frame.isometry);
  return decoupling_gap(on_code);
}

std::vector<std::vector<DMatrixEntry>> d_matrices(const SubspaceFrame& frame, const std::vector<KrausChannel>& channels) {
  frame.validate();
  const auto kd = static_cast<double>(frame.k());
  const CMatrix p = frame.isometry * frame.isometry.adjoint();
  const auto h = p.rows();
  std::vector<std::vector<DMatrixEntry>> out(channels.size(), std::vector<DMatrixEntry>(channels.size()));
  for (std::size_t j = 0; j < channels.size(); ++j) {
    for (std::size_t l = 0; l < channels.size(); ++l) {
      const auto& aj = channels[j].kraus();
      const auto& al = channels[l].kraus();
      if (channels[j].in_dim() != static_cast<std::size_t>(h) || channels[l].in_dim() != static_cast<std::size_t>(h)) {
        throw DimensionMismatch("d_matrices: channel does not act on the frame's ambient space");
      }
      double closed = 0.0;
      const auto nj = static_cast<Eigen::Index>(aj.size());
      const auto nl = static_cast<Eigen::Index>(al.size());
      CMatrix block = CMatrix::Zero(nj * h, nl * h);
      for (Eigen::Index i = 0; i < nj; ++i) {
        for (Eigen::Index r = 0; r < nl; ++r) {
          const CMatrix b = aj[static_cast<std::size_t>(i)].adjoint() * al[static_cast<std::size_t>(r)];
          const Complex tpb = (p * b).trace();
          closed += (std::real((p * b.adjoint() * p * b).trace()) - std::norm(tpb) / kd) / (kd * kd);
          block.block(i * h, r * h, h, h) = (p * b * p - (tpb / kd) * p) / kd;
        }
      }
      const double direct = block.squaredNorm();
      if (std::abs(closed - direct) > tol::kDMatrixRoutes) {
        throw InvariantViolation("d_matrices: closed formula and direct evaluation disagree");
      }
      out[j][l] = {closed, direct};
    }
  }
  return out;
}

double d_matrix_closed(const CMatrix& frame, const KrausChannel& a, const KrausChannel& b) {
  const double kd = static_cast<double>(frame.cols());
  std::vector<CMatrix> av, bv;
  for (const auto& x : a.kraus()) av.push_back(x * frame);
  for (const auto& x : b.kraus()) bv.push_back(x * frame);
  double total = 0.0;
  for (const auto& x : av) {
    for (const auto& y : bv) {
      const CMatrix m = x.adjoint() * y;  // V† a_i† b_r V
      total += (m.squaredNorm() - std::norm(m.trace()) / kd) / (kd * kd);
    }
  }
  return total;
}

MatrixLemmaResult matrix_lemma_check(const Eigen::MatrixXd& l, const Eigen::MatrixXd& d) {
  const Eigen::Index n = l.rows();
  if (n == 0 || l.cols() != n || d.rows() != n || d.cols() != n) throw DimensionMismatch("matrix_lemma_check: shapes");
  constexpr double slack = 1e-12;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (l(j, k) < 0.0 || d(j, k) < 0.0) throw InvalidInput("matrix_lemma_check: negative entry");
      if (l(j, k) > l(j, j) + slack || l(j, k) > l(k, k) + slack) throw InvalidInput("matrix_lemma_check: L hypothesis");
      if (d(j, k) > std::max(d(j, j), d(k, k)) + slack) throw InvalidInput("matrix_lemma_check: D hypothesis");
    }
  }
  MatrixLemmaResult res;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) res.lhs += std::sqrt(l(j, k) * d(j, k)) / static_cast<double>(n);
    res.rhs += 2.0 * std::sqrt(l(j, j) * d(j, j));
  }
  res.holds = res.lhs <= res.rhs;
  return res;
}

MonteCarloResult monte_carlo_fidelity(const std::vector<WordChannel>& channels, const CMatrix& site_frame,
                                      std::size_t k, const MonteCarloOptions& opts) {
  if (channels.empty()) throw InvalidInput("monte_carlo_fidelity: no channels");
  const std::size_t l = channels.front().l();
  std::size_t g_dim = 1;
  for (std::size_t s = 0; s < l; ++s) g_dim *= static_cast<std::size_t>(site_frame.cols());
  if (k == 0 || k > g_dim) throw InvalidInput("monte_carlo_fidelity: need 0 < k <= dim G^l");
  for (const auto& ch : channels) {
    if (ch.l() != l || ch.site_in_dim() != static_cast<std::size_t>(site_frame.rows())) {
      throw DimensionMismatch("monte_carlo_fidelity: channels do not share the block structure");
    }
  }
  const double weight = 1.0 / std::sqrt(static_cast<double>(channels.size()));
  const std::vector<CMatrix> lift(l, site_frame);
  const DensityOperator pi_k = DensityOperator::maximally_mixed(k);

  MonteCarloResult res;
  res.trials.resize(opts.trials);
  parallel_for(opts.trials, opts.threads, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord& rec = res.trials[t];
    rec.trial = t;
    rec.seed = derive_seed(opts.seed, t);
    const CMatrix code = apply_product_left(lift, haar_isometry(g_dim, k, rec.seed));
    std::vector<CMatrix> on_code;
    for (const auto& ch : channels)
      for (auto& m : ch.kraus_on(code)) on_code.push_back(weight * m);
    const CompressedRecovery cr = optimize_code_recovery(pi_k, on_code, opts.recovery);
    const DecouplingGap dg = decoupling_gap(on_code);
    rec.fidelity = cr.fidelity;
    rec.w = dg.w;
    rec.gap = dg.gap;
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& r : res.trials) {
    sum += r.fidelity;
    sum_sq += r.fidelity * r.fidelity;
    if (r.fidelity < r.w - r.gap - 1e-9) ++res.decoupling_violations;
  }
  const double n = static_cast<double>(res.trials.size());
  res.mean = n > 0 ? sum / n : 0.0;
  res.stddev = n > 1 ? std::sqrt(std::max(0.0, (sum_sq - n * res.mean * res.mean) / (n - 1.0))) : 0.0;
  res.stderr_mean = n > 0 ? res.stddev / std::sqrt(n) : 0.0;
  return res;
}

HaarMomentReport haar_moment_check(const std::vector<KrausChannel>& channels, std::size_t k, std::size_t samples,
                                   std::uint64_t seed, std::size_t threads) {
  if (channels.empty()) throw InvalidInput("haar_moment_check: no channels");
  const std::size_t dim = channels.front().in_dim();
  const std::size_t n = channels.size();
  for (const auto& ch : channels)
    if (ch.in_dim() != dim || ch.out_dim() != channels.front().out_dim()) throw DimensionMismatch("haar_moment_check");
  if (samples < 2) throw InvalidInput("haar_moment_check: need at least two samples");

  struct Sample {
    std::vector<double> d;
    double trace = 0.0;
  };
  std::vector<Sample> per(samples);
  parallel_for(samples, threads, [&](std::size_t s) {
    const CMatrix v = haar_isometry(dim, k, derive_seed(seed, s));
    per[s].d.resize(n * n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < n; ++l) per[s].d[j * n + l] = d_matrix_closed(v, channels[j], channels[l]);
    double tr = 0.0;
    for (const auto& ch : channels)
      for (const auto& a : ch.kraus()) tr += (a * v).squaredNorm() / static_cast<double>(k);
    per[s].trace = tr / static_cast<double>(n);
  });

  HaarMomentReport rep;
  rep.samples = samples;
  rep.d_mean.assign(n, std::vector<double>(n, 0.0));
  rep.d_std.assign(n, std::vector<double>(n, 0.0));
  rep.d_bound.assign(n, std::vector<double>(n, 0.0));
  const double ns = static_cast<double>(samples);
  const DensityOperator pi = DensityOperator::maximally_mixed(dim);
  std::vector<CMatrix> outs;
  for (const auto& ch : channels) outs.push_back(apply(ch, pi));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      double sum = 0.0, sq = 0.0;
      for (const auto& s : per) {
        sum += s.d[j * n + l];
        sq += s.d[j * n + l] * s.d[j * n + l];
      }
      const double mean = sum / ns;
      rep.d_mean[j][l] = mean;
      rep.d_std[j][l] = std::sqrt(std::max(0.0, (sq - ns * mean * mean) / (ns - 1.0)));
      rep.d_bound[j][l] = std::real((outs[j] * outs[l]).trace());
    }
  }
  double sum = 0.0, sq = 0.0;
  for (const auto& s : per) {
    sum += s.trace;
    sq += s.trace * s.trace;
  }
  rep.trace_mean = sum / ns;
  rep.trace_std = std::sqrt(std::max(0.0, (sq - ns * rep.trace_mean * rep.trace_mean) / (ns - 1.0)));
  double tv = 0.0;
  for (const auto& o : outs) tv += std::real(o.trace());
  rep.trace_value = tv / static_cast<double>(n);
  return rep;
}

SubcodeResult extract_subcode(const SubspaceFrame& code, const KrausChannel& effective, std::size_t k) {
  code.validate();
  const std::size_t d = code.k();
  if (k == 0 || k > d) throw InvalidInput("extract_subcode: need 0 < K <= dim C");
  if (effective.in_dim() != code.ambient() || effective.out_dim() != code.ambient()) {
    throw DimensionMismatch("extract_subcode: map must act on the code's ambient space");
  }
  const std::size_t blocks = d / k;
  SubcodeResult res{SubspaceFrame{code.isometry.leftCols(static_cast<Eigen::Index>(k))}, -1.0, 0.0, 0.0, 0.0, {}, false};
  res.code_fidelity = kraus_fidelity(code.maximally_mixed(), effective.kraus());
  for (std::size_t b = 0; b < blocks; ++b) {
    const SubspaceFrame block{code.isometry.middleCols(static_cast<Eigen::Index>(b * k), static_cast<Eigen::Index>(k))};
    const double f = kraus_fidelity(block.maximally_mixed(), effective.kraus());
    res.block_fidelities.push_back(f);
    if (f > res.fidelity) {
      res.fidelity = f;
      res.subcode = block;
    }
  }
  res.penalty = static_cast<double>(d) / static_cast<double>(blocks * k);
  res.guarantee = 1.0 - res.penalty * (1.0 - res.code_fidelity);
  res.holds = res.fidelity >= res.guarantee - 1e-12;
  return res;
}

}  // namespace qcomp
