#include "qcomp/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qcomp/errors.hpp"
#include "qcomp/parallel.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

KrausChannel::KrausChannel(std::vector<CMatrix> kraus, Kind kind) : kraus_(std::move(kraus)), kind_(kind) {
  if (kraus_.empty()) throw InvalidInput("channel needs at least one Kraus operator");
  out_dim_ = static_cast<std::size_t>(kraus_.front().rows());
  in_dim_ = static_cast<std::size_t>(kraus_.front().cols());
  if (in_dim_ == 0 || out_dim_ == 0) throw InvalidInput("Kraus operators must be non-empty");
  for (const auto& a : kraus_) {
    if (static_cast<std::size_t>(a.rows()) != out_dim_ || static_cast<std::size_t>(a.cols()) != in_dim_) {
      throw DimensionMismatch("Kraus operators have inconsistent shapes");
    }
  }
  const CMatrix gram = kraus_gram_sum(*this);
  if (kind_ == Kind::TracePreserving) {
    const double dev = (gram - qcomp::identity(in_dim_)).cwiseAbs().maxCoeff();
    if (dev > tol::kTracePreserving) {
      throw InvalidInput("Kraus operators are not trace preserving (deviation " + std::to_string(dev) + ")");
    }
  } else {
    const double top = hermitian_eigen_unchecked(gram).values(0);
    if (top > 1.0 + tol::kTracePreserving) {
      throw InvalidInput("Kraus operators are not trace decreasing (max eigenvalue " + std::to_string(top) + ")");
    }
  }
}

KrausChannel KrausChannel::identity(std::size_t dim) {
  return KrausChannel({qcomp::identity(dim)}, Kind::TracePreserving);
}

KrausChannel KrausChannel::useless(std::size_t in_dim, std::size_t out_dim) {
  std::vector<CMatrix> ks;
  const double amp = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (std::size_t j = 0; j < out_dim; ++j) {
    for (std::size_t k = 0; k < in_dim; ++k) {
      CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = amp;
      ks.push_back(std::move(a));
    }
  }
  return KrausChannel(std::move(ks), Kind::TracePreserving);
}

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(std::string(name) + " parameter must lie in [0, 1]");
}

CMatrix pauli(char which) {
  CMatrix m(2, 2);
  switch (which) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m = CMatrix::Identity(2, 2);
  }
  return m;
}

}  // namespace

KrausChannel KrausChannel::phase_flip(double p) {
  check_probability(p, "phase_flip");
  return KrausChannel({std::sqrt(1.0 - p) * pauli('I'), std::sqrt(p) * pauli('Z')}, Kind::TracePreserving);
}

KrausChannel KrausChannel::bit_flip(double p) {
  check_probability(p, "bit_flip");
  return KrausChannel({std::sqrt(1.0 - p) * pauli('I'), std::sqrt(p) * pauli('X')}, Kind::TracePreserving);
}

KrausChannel KrausChannel::depolarizing(double p) {
  check_probability(p, "depolarizing");
  const double q = std::sqrt(p / 4.0);
  return KrausChannel({std::sqrt(1.0 - 3.0 * p / 4.0) * pauli('I'), q * pauli('X'), q * pauli('Y'), q * pauli('Z')},
                      Kind::TracePreserving);
}

KrausChannel KrausChannel::amplitude_damping(double gamma) {
  check_probability(gamma, "amplitude_damping");
  CMatrix a0(2, 2), a1(2, 2);
  a0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  a1 << 0, std::sqrt(gamma), 0, 0;
  return KrausChannel({a0, a1}, Kind::TracePreserving);
}

KrausChannel KrausChannel::unitary(const CMatrix& u) { return KrausChannel({u}, Kind::TracePreserving); }

CMatrix kraus_gram_sum(const KrausChannel& ch) {
  CMatrix g = CMatrix::Zero(static_cast<Eigen::Index>(ch.in_dim()), static_cast<Eigen::Index>(ch.in_dim()));
  for (const auto& a : ch.kraus()) g.noalias() += a.adjoint() * a;
  return g;
}

CMatrix apply(const KrausChannel& ch, const CMatrix& rho) {
  if (static_cast<std::size_t>(rho.rows()) != ch.in_dim() || static_cast<std::size_t>(rho.cols()) != ch.in_dim()) {
    throw DimensionMismatch("apply: input dimension " + std::to_string(rho.rows()) + " does not match channel input " +
                            std::to_string(ch.in_dim()));
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(ch.out_dim()), static_cast<Eigen::Index>(ch.out_dim()));
  for (const auto& a : ch.kraus()) out.noalias() += a * rho * a.adjoint();
  return out;
}

CMatrix apply(const KrausChannel& ch, const DensityOperator& rho) { return apply(ch, rho.matrix()); }

CMatrix apply_adjoint(const KrausChannel& ch, const CMatrix& y) {
  if (static_cast<std::size_t>(y.rows()) != ch.out_dim() || y.rows() != y.cols()) {
    throw DimensionMismatch("apply_adjoint: operator does not live on the output space");
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(ch.in_dim()), static_cast<Eigen::Index>(ch.in_dim()));
  for (const auto& a : ch.kraus()) out.noalias() += a.adjoint() * y * a;
  return out;
}

CMatrix apply_local(const KrausChannel& ch, const CMatrix& x, const Dims& dims, std::size_t site) {
  if (site >= dims.size() || dims[site] != ch.in_dim()) {
    throw DimensionMismatch("apply_local: channel does not act on the selected factor");
  }
  Dims out_dims = dims;
  out_dims[site] = ch.out_dim();
  std::size_t out_total = 1;
  for (auto d : out_dims) out_total *= d;
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(out_total), static_cast<Eigen::Index>(out_total));
  for (const auto& a : ch.kraus()) {
    // (A X A†) = (A (A X)†)† with A = 1 ⊗ a ⊗ 1.
    const CMatrix ax = apply_local_left(x, dims, site, a);
    const CMatrix axa = apply_local_left(CMatrix(ax.adjoint()), dims, site, a);
    out += axa.adjoint();
  }
  return out;
}

CMatrix apply_tensor_power(const KrausChannel& ch, std::size_t l, const CMatrix& x) {
  Dims dims(l, ch.in_dim());
  CMatrix cur = x;
  for (std::size_t s = 0; s < l; ++s) {
    cur = apply_local(ch, cur, dims, s);
    dims[s] = ch.out_dim();
  }
  return cur;
}

KrausChannel tensor_power(const KrausChannel& ch, std::size_t l, std::size_t cap) {
  if (l == 0) throw InvalidInput("tensor_power: l must be positive");
  const std::size_t words = checked_power(ch.size(), l, cap);
  std::vector<CMatrix> out;
  out.reserve(words);
  std::vector<std::size_t> y(l, 0);
  for (std::size_t w = 0; w < words; ++w) {
    std::size_t rem = w;
    for (std::size_t s = l; s-- > 0;) {
      y[s] = rem % ch.size();
      rem /= ch.size();
    }
    CMatrix a = ch[y[0]];
    for (std::size_t s = 1; s < l; ++s) a = kron(a, ch[y[s]]);
    out.push_back(std::move(a));
  }
  return KrausChannel(std::move(out), ch.kind());
}

KrausChannel complementary(const KrausChannel& ch) {
  const std::size_t n = ch.size();
  std::vector<CMatrix> ks;
  ks.reserve(ch.out_dim());
  for (std::size_t k = 0; k < ch.out_dim(); ++k) {
    CMatrix b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ch.in_dim()));
    for (std::size_t i = 0; i < n; ++i) b.row(static_cast<Eigen::Index>(i)) = ch[i].row(static_cast<Eigen::Index>(k));
    ks.push_back(std::move(b));
  }
  return KrausChannel(std::move(ks), ch.kind());
}

CMatrix stinespring(const KrausChannel& ch) {
  const auto n = static_cast<Eigen::Index>(ch.size());
  const auto dout = static_cast<Eigen::Index>(ch.out_dim());
  CMatrix v = CMatrix::Zero(dout * n, static_cast<Eigen::Index>(ch.in_dim()));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index o = 0; o < dout; ++o) v.row(o * n + i) = ch[static_cast<std::size_t>(i)].row(o);
  }
  return v;
}

CMatrix choi(const KrausChannel& ch) {
  const auto din = static_cast<Eigen::Index>(ch.in_dim());
  const auto dout = static_cast<Eigen::Index>(ch.out_dim());
  CMatrix out = CMatrix::Zero(din * dout, din * dout);
  for (const auto& a : ch.kraus()) {
    // vec with the input index slow: |Ω_a⟩ = Σ_i |i⟩ ⊗ a|i⟩.
    CVector v(din * dout);
    for (Eigen::Index i = 0; i < din; ++i) v.segment(i * dout, dout) = a.col(i);
    out.noalias() += v * v.adjoint();
  }
  return out;
}

CanonicalKraus canonical_kraus(const KrausChannel& ch, const DensityOperator& pi_g) {
  if (pi_g.dim() != ch.in_dim()) throw DimensionMismatch("canonical_kraus: reference state has wrong dimension");
  const auto n = static_cast<Eigen::Index>(ch.size());
  CMatrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      gram(i, j) = (ch[static_cast<std::size_t>(i)] * pi_g.matrix() * ch[static_cast<std::size_t>(j)].adjoint()).trace();
  const EigenSystem es = hermitian_eigen_unchecked(gram);
  std::vector<CMatrix> ks;
  std::vector<double> weights;
  std::vector<std::size_t> index_map;
  for (Eigen::Index k = 0; k < n; ++k) {
    CMatrix b = CMatrix::Zero(ch[0].rows(), ch[0].cols());
    for (Eigen::Index i = 0; i < n; ++i) b += std::conj(es.vectors(i, k)) * ch[static_cast<std::size_t>(i)];
    if (b.norm() < 1e-12) continue;
    ks.push_back(std::move(b));
    weights.push_back(std::max(0.0, es.values(k)));
    index_map.push_back(static_cast<std::size_t>(k));
  }
  return {KrausChannel(std::move(ks), ch.kind()), std::move(weights), std::move(index_map)};
}

KrausChannel mix(const KrausChannel& a, const KrausChannel& b, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidInput("mix: weight must lie in [0, 1]");
  return convex_combination({a, b}, {1.0 - s, s});
}

KrausChannel convex_combination(const std::vector<KrausChannel>& members, const std::vector<double>& weights) {
  if (members.empty() || members.size() != weights.size()) throw InvalidInput("convex_combination: bad arguments");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("convex_combination: weights must sum to 1");
  std::vector<CMatrix> ks;
  bool tp = true;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m].in_dim() != members[0].in_dim() || members[m].out_dim() != members[0].out_dim()) {
      throw DimensionMismatch("convex_combination: members have different dimensions");
    }
    if (weights[m] < 0.0) throw InvalidInput("convex_combination: negative weight");
    tp = tp && members[m].trace_preserving();
    if (weights[m] == 0.0) continue;
    for (const auto& a : members[m].kraus()) ks.push_back(std::sqrt(weights[m]) * a);
  }
  return KrausChannel(std::move(ks), tp ? KrausChannel::Kind::TracePreserving : KrausChannel::Kind::TraceDecreasing);
}

KrausChannel compose(const KrausChannel& outer, const KrausChannel& inner) {
  if (outer.in_dim() != inner.out_dim()) throw DimensionMismatch("compose: dimensions do not chain");
  std::vector<CMatrix> ks;
  ks.reserve(outer.size() * inner.size());
  for (const auto& b : outer.kraus())
    for (const auto& a : inner.kraus()) ks.push_back(b * a);
  const bool tp = outer.trace_preserving() && inner.trace_preserving();
  return KrausChannel(std::move(ks), tp ? KrausChannel::Kind::TracePreserving : KrausChannel::Kind::TraceDecreasing);
}

KrausChannel compression(const CMatrix& q) {
  return KrausChannel({q}, KrausChannel::Kind::TraceDecreasing);
}

KrausChannel random_channel(std::size_t in_dim, std::size_t out_dim, std::size_t n, std::uint64_t seed, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw InvalidInput("random_channel: scale must lie in (0, 1]");
  const CMatrix stacked = ginibre(out_dim * n, in_dim, seed);
  // Normalize so that Σ a†a = scale·1.
  const CMatrix g = stacked.adjoint() * stacked;
  const CMatrix t = psd_inverse_sqrt(g, 0.0) * std::sqrt(scale);
  std::vector<CMatrix> ks;
  for (std::size_t i = 0; i < n; ++i) {
    ks.push_back(stacked.middleRows(static_cast<Eigen::Index>(i * out_dim), static_cast<Eigen::Index>(out_dim)) * t);
  }
  return KrausChannel(std::move(ks), scale == 1.0 ? KrausChannel::Kind::TracePreserving
                                                  : KrausChannel::Kind::TraceDecreasing);
}

namespace {

struct LiftedKraus {
  std::vector<CMatrix> plus;
  std::vector<CMatrix> minus;
};

LiftedKraus lift(const KrausChannel& ch1, const KrausChannel& ch2) {
  const CMatrix anc = identity(ch1.in_dim());
  LiftedKraus out;
  for (const auto& a : ch1.kraus()) out.plus.push_back(kron(anc, a));
  for (const auto& b : ch2.kraus()) out.minus.push_back(kron(anc, b));
  return out;
}

CMatrix difference_output(const LiftedKraus& lk, const CVector& psi) {
  const Eigen::Index dim = lk.plus.front().rows();
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const auto& a : lk.plus) {
    const CVector v = a * psi;
    out.noalias() += v * v.adjoint();
  }
  for (const auto& b : lk.minus) {
    const CVector v = b * psi;
    out.noalias() -= v * v.adjoint();
  }
  return out;
}

// Returns the Heisenberg-picture witness operator for the sign pattern of the
// current output, together with the trace norm of that output.
std::pair<CMatrix, double> witness(const LiftedKraus& lk, const CVector& psi) {
  const CMatrix omega = difference_output(lk, psi);
  const EigenSystem es = hermitian_eigen_unchecked(omega);
  RVector sign(es.values.size());
  double tn = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    sign(i) = es.values(i) >= 0.0 ? 1.0 : -1.0;
    tn += std::abs(es.values(i));
  }
  const CMatrix w = es.vectors * sign.asDiagonal() * es.vectors.adjoint();
  const Eigen::Index din = lk.plus.front().cols();
  CMatrix m = CMatrix::Zero(din, din);
  for (const auto& a : lk.plus) m.noalias() += a.adjoint() * w * a;
  for (const auto& b : lk.minus) m.noalias() -= b.adjoint() * w * b;
  return {m, tn};
}

struct RestartResult {
  double value = 0.0;
  bool converged = false;
};

RestartResult seesaw(const LiftedKraus& lk, CVector psi, const DiamondOptions& opts, std::uint64_t seed) {
  RestartResult res;
  double value = 0.0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    auto [m, tn] = witness(lk, psi);
    const EigenSystem es = hermitian_eigen_unchecked(m);
    CVector next = es.vectors.col(0);
    const double gain = tn - value;
    value = std::max(value, tn);
    psi = next;
    if (it > 0 && gain < opts.tol) {
      res.converged = true;
      break;
    }
  }
  value = std::max(value, trace_norm_hermitian(difference_output(lk, psi)));
  // Random-perturbation polish: keep any improving move, shrink the step otherwise.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double step = 1e-2;
  for (int t = 0; t < 60 && step > 1e-7; ++t) {
    CVector trial = psi;
    for (Eigen::Index i = 0; i < trial.size(); ++i) trial(i) += step * Complex(normal(rng), normal(rng));
    trial /= trial.norm();
    const double v = trace_norm_hermitian(difference_output(lk, trial));
    if (v > value) {
      value = v;
      psi = trial;
    } else {
      step *= 0.7;
    }
  }
  res.value = value;
  return res;
}

}  // namespace

double diamond_objective(const KrausChannel& ch1, const KrausChannel& ch2, const CVector& psi) {
  const LiftedKraus lk = lift(ch1, ch2);
  if (psi.size() != lk.plus.front().cols()) throw DimensionMismatch("diamond_objective: input vector has wrong size");
  return trace_norm_hermitian(difference_output(lk, psi));
}

DiamondEstimate diamond_distance(const KrausChannel& ch1, const KrausChannel& ch2, const DiamondOptions& opts) {
  if (ch1.in_dim() != ch2.in_dim() || ch1.out_dim() != ch2.out_dim()) {
    throw DimensionMismatch("diamond_distance: channels have different dimensions");
  }
  const LiftedKraus lk = lift(ch1, ch2);
  const std::size_t d = ch1.in_dim();
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  std::vector<RestartResult> results(restarts);
  parallel_for(restarts, opts.threads, [&](std::size_t r) {
    CVector psi;
    if (r == 0) {
      psi = CVector::Zero(static_cast<Eigen::Index>(d * d));
      for (std::size_t i = 0; i < d; ++i) psi(static_cast<Eigen::Index>(i * d + i)) = 1.0 / std::sqrt(double(d));
    } else {
      psi = haar_state(d * d, derive_seed(opts.seed, r));
    }
    results[r] = seesaw(lk, psi, opts, derive_seed(opts.seed ^ 0xA5A5A5A5ULL, r));
  });
  DiamondEstimate est;
  est.converged = true;
  for (const auto& r : results) {
    est.value = std::max(est.value, r.value);
    est.converged = est.converged && r.converged;
    est.running_max.push_back(est.value);
  }
  return est;
}

void AveragedChannel::validate() const {
  if (members.empty() || members.size() != weights.size()) throw InvalidInput("averaged channel: bad member list");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("averaged channel: weights must sum to 1");
  for (const auto& w : weights)
    if (!(w > 0.0)) throw InvalidInput("averaged channel: weights must be positive");
  for (const auto& m : members) {
    if (m.in_dim() != members[0].in_dim() || m.out_dim() != members[0].out_dim()) {
      throw DimensionMismatch("averaged channel: members have different dimensions");
    }
  }
  if (block_length == 0) throw InvalidInput("averaged channel: block length must be positive");
}

CMatrix averaged_apply(const AveragedChannel& av, const CMatrix& rho) {
  av.validate();
  CMatrix out;
  for (std::size_t i = 0; i < av.members.size(); ++i) {
    CMatrix term = av.weights[i] * apply_tensor_power(av.members[i], av.block_length, rho);
    if (i == 0) out = std::move(term);
    else out += term;
  }
  return out;
}

void ChannelFamily::validate() const {
  if (members.empty()) throw InvalidInput("channel family is empty");
  for (const auto& m : members) {
    if (m.in_dim() != members[0].in_dim() || m.out_dim() != members[0].out_dim()) {
      throw DimensionMismatch("channel family members have different dimensions");
    }
  }
}

}  // namespace qcomp
