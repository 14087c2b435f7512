#include <algorithm>
#include <cmath>
#include <limits>

#include "qcomp/compound.hpp"
#include "qcomp/errors.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

double min_pairwise(const ChannelFamily& family, const CVector& psi) {
  const DensityOperator omega = DensityOperator::from_pure(psi);
  std::vector<CMatrix> outs;
  for (const auto& ch : family.members) outs.push_back(apply(ch, omega));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outs.size(); ++i)
    for (std::size_t j = i + 1; j < outs.size(); ++j) best = std::min(best, trace_norm_hermitian(outs[i] - outs[j]));
  return best;
}

// Local random search on the unit sphere. Improvements are kept and the step
// shrinks after repeated misses.
CVector ascend_probe(const ChannelFamily& family, CVector psi, std::size_t iterations, std::uint64_t seed) {
  double value = min_pairwise(family, psi);
  double step = 0.3;
  for (std::size_t it = 0; it < iterations && step > 1e-10; ++it) {
    const CVector trial = (psi + step * haar_state(static_cast<std::size_t>(psi.size()), derive_seed(seed, it))).normalized();
    const double v = min_pairwise(family, trial);
    if (v > value) {
      value = v;
      psi = trial;
    } else {
      step *= 0.97;
    }
  }
  return psi;
}

double trace_product(const CMatrix& y, const CMatrix& o) { return std::real((y.cwiseProduct(o.transpose())).sum()); }

}  // namespace

CVector optimize_probe(const ChannelFamily& family, const DiscriminationOptions& opts) {
  family.validate();
  const std::size_t d = family.members.front().in_dim();
  std::vector<CVector> starts;
  for (std::size_t i = 0; i < d; ++i) starts.push_back(basis_ket(d, i));
  CVector uniform = CVector::Ones(static_cast<Eigen::Index>(d)) / std::sqrt(static_cast<double>(d));
  starts.push_back(uniform);
  for (std::size_t r = 0; r < opts.probe_restarts; ++r) starts.push_back(haar_state(d, derive_seed(opts.seed, r)));
  if (family.size() < 2) return starts.front();

  CVector best = starts.front();
  double best_value = min_pairwise(family, best);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const CVector psi = ascend_probe(family, starts[s], opts.probe_iterations, derive_seed(opts.seed ^ 0xabcdef, s));
    const double v = min_pairwise(family, psi);
    if (v > best_value + 1e-12) {
      best_value = v;
      best = psi;
    }
  }
  return best;
}

DiscriminationReport discriminate(const ChannelFamily& family, std::size_t m, const CVector& probe,
                                  const DiscriminationOptions& opts) {
  family.validate();
  if (m == 0) throw InvalidInput("discriminate: m must be positive");
  const std::size_t n = family.size();
  const std::size_t dim = checked_power(family.members.front().out_dim(), m, 1024);
  DiscriminationReport rep;
  rep.probe = probe.normalized();
  rep.m = m;
  const DensityOperator omega = DensityOperator::from_pure(rep.probe);

  std::vector<CMatrix> states;
  for (const auto& ch : family.members) {
    const CMatrix single = apply(ch, omega);
    states.push_back(kron_all(std::vector<CMatrix>(m, single)));
  }
  rep.min_pairwise_distance = n >= 2 ? min_pairwise(family, rep.probe) : 0.0;
  rep.indistinguishable = n >= 2 && rep.min_pairwise_distance < opts.indistinguishable_tol;

  CMatrix total = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& s : states) total += s;
  const double scale = std::max(1.0, total.cwiseAbs().maxCoeff());
  const double cutoff = tol::kPseudoInverse * scale;
  const CMatrix isqrt = psd_inverse_sqrt(total, cutoff);
  const CMatrix support = support_projector(total, cutoff);
  const CMatrix rest = (identity(dim) - support) / static_cast<double>(n);
  CMatrix completeness = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& s : states) {
    CMatrix p = isqrt * s * isqrt + rest;
    p = (p + p.adjoint()).eval() * 0.5;
    if (hermitian_eigen(p).values.minCoeff() < -tol::kPovm) throw InvariantViolation("discriminate: POVM element not PSD");
    completeness += p;
    rep.povm.push_back(std::move(p));
  }
  if ((completeness - identity(dim)).cwiseAbs().maxCoeff() > tol::kPovm) {
    throw InvariantViolation("discriminate: POVM elements do not sum to the identity");
  }

  rep.success.assign(n, std::vector<double>(n, 0.0));
  rep.worst_success = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = std::real((rep.povm[i] * states[j]).trace());
      if (v < -tol::kPovm || v > 1.0 + tol::kPovm) throw InvariantViolation("discriminate: success outside [0, 1]");
      rep.success[i][j] = std::clamp(v, 0.0, 1.0);
    }
    rep.correct.push_back(rep.success[i][i]);
    rep.average_success += rep.success[i][i] / static_cast<double>(n);
    rep.worst_success = std::min(rep.worst_success, rep.success[i][i]);
  }
  return rep;
}

DiscriminationReport discriminate(const ChannelFamily& family, std::size_t m, const DiscriminationOptions& opts) {
  return discriminate(family, m, optimize_probe(family, opts), opts);
}

DecayFit fit_decay(const std::vector<DiscriminationReport>& sweep) {
  DecayFit fit;
  fit.nondecreasing = true;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    fit.m.push_back(sweep[i].m);
    fit.failure.push_back(1.0 - sweep[i].worst_success);
    if (i > 0 && sweep[i].worst_success < sweep[i - 1].worst_success - 1e-12) fit.nondecreasing = false;
    if (fit.failure.back() > 1e-15) {
      const double x = static_cast<double>(sweep[i].m);
      const double y = std::log(fit.failure.back());
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++used;
    }
  }
  if (used >= 2) {
    const double nn = static_cast<double>(used);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    fit.f = std::exp(slope);
    fit.log_c = (sy - slope * sx) / nn;
  }
  return fit;
}

SubspaceFrame repetition_code_x(std::size_t t) {
  if (t == 0) throw InvalidInput("repetition_code_x: t must be positive");
  const std::size_t dim = checked_power(2, t, 1 << 12);
  CVector plus(2), minus(2);
  plus << 1.0, 1.0;
  minus << 1.0, -1.0;
  plus /= std::sqrt(2.0);
  minus /= std::sqrt(2.0);
  CVector a = plus, b = minus;
  for (std::size_t s = 1; s < t; ++s) {
    a = kron(a, plus);
    b = kron(b, minus);
  }
  CMatrix v(static_cast<Eigen::Index>(dim), 2);
  v.col(0) = a;
  v.col(1) = b;
  return {v};
}

InformedCode informed_code(const KrausChannel& ch, std::size_t t, const SubspaceFrame& frame,
                           const RecoveryOptions& opts) {
  frame.validate();
  const WordChannel words = tensor_word_channel(ch, t);
  if (words.in_dim() != frame.ambient()) throw DimensionMismatch("informed_code: frame does not live on H^{⊗t}");
  const CompressedRecovery cr =
      optimize_code_recovery(DensityOperator::maximally_mixed(frame.k()), words.kraus_on(frame.isometry), opts);
  return {frame, lift_recovery(cr, frame.isometry, words.out_dim()), cr.fidelity};
}

ConversionResult convert_code(const ChannelFamily& family, const std::vector<InformedCode>& codes,
                              const DiscriminationReport& disc) {
  family.validate();
  const std::size_t n = family.size();
  if (codes.size() != n || disc.povm.size() != n) throw InvalidInput("convert_code: need one code and one POVM element per member");
  const std::size_t m = disc.m;
  const std::size_t d = family.members.front().in_dim();
  const std::size_t d_out = family.members.front().out_dim();
  const std::size_t t_dim = codes.front().frame.ambient();
  std::size_t t = 0;
  for (std::size_t x = 1; x < t_dim; x *= d) ++t;
  if (checked_power(d, t, 1 << 12) != t_dim) throw DimensionMismatch("convert_code: code does not live on H^{⊗t}");
  const std::size_t out_t = checked_power(d_out, t, 1 << 12);
  const std::size_t out_m = checked_power(d_out, m, 1 << 12);

  CVector x = disc.probe;
  for (std::size_t s = 1; s < m; ++s) x = kron(x, disc.probe);

  ConversionResult res;
  res.m = m;
  res.t = t;
  for (std::size_t i = 0; i < n; ++i) {
    const InformedCode& code = codes[i];
    code.frame.validate();
    const std::size_t k = code.frame.k();
    if (code.frame.ambient() != t_dim) throw DimensionMismatch("convert_code: codes have different block lengths");
    if (checked_power(d, m, 1 << 12) * k * t_dim > 4096) throw GuardExceeded("convert_code: joint space too large");
    const KrausChannel& ch = family.members[i];

    // Purification of π_F on ref ⊗ H^{⊗t}, and the joint input x ⊗ ψ.
    const PureState psi = purify_on_support(DensityOperator(code.frame.maximally_mixed()));
    const CVector joint_in = kron(x, psi.vec);
    Dims dims(m, d);
    dims.push_back(psi.dims.front());
    for (std::size_t s = 0; s < t; ++s) dims.push_back(d);
    CMatrix y = joint_in * joint_in.adjoint();
    for (std::size_t s = 0; s < dims.size(); ++s) {
      if (s == m) continue;
      y = apply_local(ch, y, dims, s);
      dims[s] = d_out;
    }

    ConversionMember mem;
    const CMatrix phi = psi.vec * psi.vec.adjoint();
    for (std::size_t j = 0; j < n; ++j) {
      // (id ⊗ R_j†)(|ψ⟩⟨ψ|): the observable whose expectation on the output gives F_e.
      CMatrix back = CMatrix::Zero(static_cast<Eigen::Index>(psi.dims.front() * out_t),
                                   static_cast<Eigen::Index>(psi.dims.front() * out_t));
      for (const auto& r : codes[j].recovery.kraus()) {
        if (static_cast<std::size_t>(r.cols()) != out_t || static_cast<std::size_t>(r.rows()) != t_dim) {
          throw DimensionMismatch("convert_code: recovery must map K^{⊗t} to H^{⊗t}");
        }
        const CMatrix lifted = kron(identity(psi.dims.front()), r);
        back += lifted.adjoint() * phi * lifted;
      }
      if (static_cast<std::size_t>(disc.povm[j].rows()) != out_m) throw DimensionMismatch("convert_code: POVM size");
      mem.combined += trace_product(y, kron(disc.povm[j], back));
      const double fj = tensor_power_fidelity(DensityOperator(code.frame.maximally_mixed()), ch, t, codes[j].recovery);
      mem.factorized += disc.success[j][i] * fj;
      if (j == i) mem.informed = fj;
    }
    mem.estimation = disc.success[i][i];
    mem.product_bound = mem.estimation * mem.informed;
    if (std::abs(mem.combined - mem.factorized) > 1e-9) {
      throw InvariantViolation("convert_code: joint evaluation and factorization disagree");
    }
    mem.holds = mem.combined >= mem.product_bound - 1e-9;
    if (!mem.holds) throw InvariantViolation("convert_code: product lower bound violated");
    res.members.push_back(mem);
  }
  return res;
}

std::vector<InformedCode> equalize_codes(const ChannelFamily& family, const std::vector<InformedCode>& codes,
                                         std::size_t t) {
  if (codes.size() != family.size()) throw InvalidInput("equalize_codes: one code per member");
  std::size_t k = std::numeric_limits<std::size_t>::max();
  for (const auto& c : codes) k = std::min(k, c.frame.k());
  std::vector<InformedCode> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].frame.k() == k) {
      out.push_back(codes[i]);
      continue;
    }
    const KrausChannel effective = compose(codes[i].recovery, tensor_power(family.members[i], t));
    const SubcodeResult sub = extract_subcode(codes[i].frame, effective, k);
    if (!sub.holds) throw InvariantViolation("equalize_codes: subcode guarantee violated");
    out.push_back({sub.subcode, codes[i].recovery, sub.fidelity});
  }
  return out;
}

}  // namespace qcomp
