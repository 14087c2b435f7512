#include "qcomp/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "qcomp/errors.hpp"
#include "qcomp/information.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

// Empirical distributions sit on a lattice, so ℓ1 distances can land exactly
// on δ. Floating-point noise must not turn such a boundary type into a
// typical one: a type passes only if it clears δ by this margin.
constexpr double kBoundarySlack = 1e-12;

constexpr double kInf = std::numeric_limits<double>::infinity();

double multinomial(const std::vector<std::size_t>& counts) {
  // After each step `result` is the multinomial coefficient of the counts
  // consumed so far, so the division is exact; 128-bit intermediates keep
  // the product from overflowing for l <= 20.
  unsigned __int128 result = 1;
  std::size_t total = 0;
  for (std::size_t c : counts) {
    for (std::size_t j = 1; j <= c; ++j) {
      ++total;
      result = result * total / j;
    }
  }
  return static_cast<double>(result);
}

void check_guard(std::size_t alphabet, std::size_t l, const TypicalityGuard& guard) {
  if (l == 0) throw InvalidInput("typicality: block length must be positive");
  if (l > guard.max_l) {
    throw GuardExceeded("typicality: block length " + std::to_string(l) + " exceeds guard " + std::to_string(guard.max_l));
  }
  if (alphabet > guard.max_alphabet) {
    throw GuardExceeded("typicality: alphabet size " + std::to_string(alphabet) + " exceeds guard " +
                        std::to_string(guard.max_alphabet));
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("typicality: delta must lie in (0, 1/2)");
}

void compositions(std::size_t parts, std::size_t remaining, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() + 1 == parts) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t c = 0; c <= remaining; ++c) {
    cur.push_back(c);
    compositions(parts, remaining - c, cur, out);
    cur.pop_back();
  }
}

std::vector<double> normalized_base(const std::vector<double>& base) {
  if (base.empty()) throw InvalidInput("typicality: empty distribution");
  double total = 0.0;
  for (double b : base) {
    if (b < 0.0) throw InvalidInput("typicality: negative probability");
    total += b;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("typicality: distribution does not sum to 1");
  return base;
}

CMatrix project_rows_impl(const CMatrix& x, const CMatrix& basis, const std::vector<char>& mask, std::size_t l) {
  const std::vector<CMatrix> adj(l, basis.adjoint());
  CMatrix y = apply_product_left(adj, x);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if (!mask[static_cast<std::size_t>(i)]) y.row(i).setZero();
  const std::vector<CMatrix> fwd(l, basis);
  return apply_product_left(fwd, y);
}

}  // namespace

double TypeClass::prob_each() const { return std::isinf(log2_prob_each) ? 0.0 : std::exp2(log2_prob_each); }

std::vector<TypeClass> typical_types(const std::vector<double>& base_in, std::size_t l, double delta,
                                     const TypicalityGuard& guard) {
  const std::vector<double> base = normalized_base(base_in);
  check_delta(delta);
  check_guard(base.size(), l, guard);
  std::vector<std::vector<std::size_t>> all;
  std::vector<std::size_t> cur;
  compositions(base.size(), l, cur, all);
  std::vector<TypeClass> out;
  for (const auto& counts : all) {
    double dist = 0.0;
    bool abs_cont = true;
    double log2p = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      dist += std::abs(static_cast<double>(counts[i]) / static_cast<double>(l) - base[i]);
      if (counts[i] > 0) {
        if (base[i] <= 0.0) abs_cont = false;
        else log2p += static_cast<double>(counts[i]) * std::log2(base[i]);
      }
    }
    if (!abs_cont || !(dist < delta - kBoundarySlack)) continue;
    out.push_back({counts, multinomial(counts), log2p});
  }
  return out;
}

std::vector<std::vector<std::size_t>> typical_set(const std::vector<double>& base, std::size_t l, double delta,
                                                  const TypicalityGuard& guard) {
  const std::vector<TypeClass> types = typical_types(base, l, delta, guard);
  double total = 0.0;
  for (const auto& t : types) total += t.multiplicity;
  if (total > static_cast<double>(guard.max_sequences)) {
    throw GuardExceeded("typical_set: " + std::to_string(total) + " sequences exceed guard");
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(static_cast<std::size_t>(total));
  for (const auto& t : types) {
    std::vector<std::size_t> seq;
    for (std::size_t i = 0; i < t.counts.size(); ++i) seq.insert(seq.end(), t.counts[i], i);
    do {
      out.push_back(seq);
    } while (std::next_permutation(seq.begin(), seq.end()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<char> type_mask(const std::vector<TypeClass>& types, std::size_t alphabet, std::size_t l,
                            const TypicalityGuard& guard) {
  const std::size_t total = checked_power(alphabet, l, guard.max_sequences);
  std::set<std::vector<std::size_t>> allowed;
  for (const auto& t : types) allowed.insert(t.counts);
  std::vector<char> mask(total, 0);
  std::vector<std::size_t> counts(alphabet);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t rem = idx;
    for (std::size_t s = 0; s < l; ++s) {
      ++counts[rem % alphabet];
      rem /= alphabet;
    }
    mask[idx] = allowed.count(counts) ? 1 : 0;
  }
  return mask;
}

double phi_delta(double delta, std::size_t d) { return -delta * std::log2(delta / static_cast<double>(d)); }

double h_of_l(std::size_t l, std::size_t d) {
  return static_cast<double>(d) / static_cast<double>(l) * std::log2(static_cast<double>(l) + 1.0);
}

TypicalProjection typical_projector(const DensityOperator& rho, std::size_t l, double delta,
                                    const TypicalityConstants& constants, const TypicalityGuard& guard) {
  const EigenSystem es = hermitian_eigen(rho.matrix());
  const std::size_t d = rho.dim();
  std::vector<double> base(d);
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    base[i] = std::max(0.0, es.values(static_cast<Eigen::Index>(i)));
    if (base[i] < tol::kNegativeClamp) base[i] = 0.0;
    total += base[i];
  }
  for (double& b : base) b /= total;

  TypicalProjection out;
  TypicalSpec& spec = out.spec;
  spec.delta = delta;
  spec.l = l;
  spec.base = base;
  spec.types = typical_types(base, l, delta, guard);
  spec.site_basis = es.vectors;
  double hs_sq = 0.0;
  double min_log = kInf;
  double max_log = -kInf;
  for (const auto& t : spec.types) {
    spec.size += t.multiplicity;
    spec.mass += t.mass();
    hs_sq += t.multiplicity * t.prob_each() * t.prob_each();
    min_log = std::min(min_log, t.log2_prob_each);
    max_log = std::max(max_log, t.log2_prob_each);
  }

  ProjectionCertificate& cert = out.certificate;
  cert.mass_classical = spec.mass;
  cert.mass = spec.mass;
  std::size_t full = 1;
  bool small = true;
  for (std::size_t s = 0; s < l && small; ++s) {
    full *= d;
    small = full <= guard.max_projector_dim;
  }
  if (small) {
    const std::vector<char> mask = type_mask(spec.types, d, l, guard);
    CMatrix diag = CMatrix::Zero(static_cast<Eigen::Index>(full), static_cast<Eigen::Index>(full));
    for (std::size_t i = 0; i < full; ++i) diag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = mask[i] ? 1.0 : 0.0;
    const std::vector<CMatrix> fwd(l, es.vectors);
    const CMatrix half = apply_product_left(fwd, diag);
    CMatrix q = apply_product_left(fwd, CMatrix(half.adjoint())).adjoint();
    q = (q + q.adjoint()).eval() * 0.5;
    const std::vector<CMatrix> factors(l, rho.matrix());
    const CMatrix rho_l = kron_all(factors);
    cert.mass = std::real((rho_l * q).trace());
    spec.projector = std::move(q);
  }

  const double ld = static_cast<double>(l);
  cert.c = constants.c;
  cert.entropy = shannon_entropy(base);
  cert.phi = phi_delta(delta, d);
  cert.h = h_of_l(l, d);
  cert.eta = 1.0 - std::exp2(-ld * (constants.c * delta * delta - cert.h));
  cert.mass_bound = cert.eta;
  cert.item1 = cert.mass >= cert.mass_bound - 1e-12;
  cert.c_max = cert.mass >= 1.0 ? kInf : (cert.h - std::log2(1.0 - cert.mass) / ld) / (delta * delta);

  cert.min_eigen_log2 = min_log;
  cert.max_eigen_log2 = max_log;
  cert.sandwich_lo_log2 = -ld * (cert.entropy + cert.phi);
  cert.sandwich_hi_log2 = -ld * (cert.entropy - cert.phi);
  cert.item2 = spec.types.empty() ||
               (min_log >= cert.sandwich_lo_log2 - 1e-9 && max_log <= cert.sandwich_hi_log2 + 1e-9);

  cert.dim = spec.size;
  cert.dim_hi = std::exp2(ld * (cert.entropy + cert.phi));
  cert.dim_lo = cert.eta * std::exp2(ld * (cert.entropy - cert.phi));
  cert.item3 = cert.dim <= cert.dim_hi * (1.0 + 1e-12) && (cert.eta <= 0.0 || cert.dim >= cert.dim_lo * (1.0 - 1e-12));

  cert.hs_squared = hs_sq;
  cert.hs_squared_bound = std::exp2(-ld * (cert.entropy - 3.0 * cert.phi));
  cert.hs_bound = cert.hs_squared <= cert.hs_squared_bound * (1.0 + 1e-12);
  return out;
}

WordChannel::WordChannel(std::vector<CMatrix> site_kraus, std::vector<std::vector<std::size_t>> words, std::size_t l)
    : site_kraus_(std::move(site_kraus)), words_(std::move(words)), l_(l) {
  if (site_kraus_.empty()) throw InvalidInput("word channel needs site Kraus operators");
  if (l_ == 0) throw InvalidInput("word channel: l must be positive");
  for (const auto& a : site_kraus_) {
    if (a.rows() != site_kraus_.front().rows() || a.cols() != site_kraus_.front().cols()) {
      throw DimensionMismatch("word channel: site Kraus shapes differ");
    }
  }
  for (const auto& w : words_) {
    if (w.size() != l_) throw InvalidInput("word channel: word length differs from l");
    for (auto y : w)
      if (y >= site_kraus_.size()) throw InvalidInput("word channel: letter out of range");
  }
  for (std::size_t s = 0; s < l_; ++s) {
    in_total_ *= site_in_dim();
    out_total_ *= site_out_dim();
  }
}

void WordChannel::set_output_projection(const CMatrix& site_basis, std::vector<char> mask) {
  if (static_cast<std::size_t>(site_basis.rows()) != site_out_dim() || site_basis.rows() != site_basis.cols()) {
    throw DimensionMismatch("word channel: projection basis has wrong size");
  }
  if (mask.size() != out_total_) throw DimensionMismatch("word channel: projection mask has wrong size");
  site_basis_ = site_basis;
  mask_ = std::move(mask);
}

CMatrix WordChannel::project_rows(const CMatrix& x) const {
  if (mask_.empty()) return x;
  return project_rows_impl(x, site_basis_, mask_, l_);
}

CMatrix WordChannel::project(const CMatrix& x) const {
  if (mask_.empty()) return x;
  const CMatrix left = project_rows(x);
  return project_rows(CMatrix(left.adjoint())).adjoint();
}

CMatrix WordChannel::kraus_apply(std::size_t w, const CMatrix& x) const {
  std::vector<CMatrix> factors;
  factors.reserve(l_);
  for (auto y : words_.at(w)) factors.push_back(site_kraus_[y]);
  return project_rows(apply_product_left(factors, x));
}

std::vector<CMatrix> WordChannel::kraus_on(const CMatrix& frame) const {
  std::vector<CMatrix> out;
  out.reserve(words_.size());
  for (std::size_t w = 0; w < words_.size(); ++w) out.push_back(kraus_apply(w, frame));
  return out;
}

CMatrix WordChannel::apply(const CMatrix& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != in_total_ || rho.rows() != rho.cols()) {
    throw DimensionMismatch("word channel: input has wrong dimension");
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(out_total_), static_cast<Eigen::Index>(out_total_));
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const CMatrix kr = kraus_apply(w, rho);
    out += kraus_apply(w, CMatrix(kr.adjoint()));
  }
  return out;
}

CMatrix WordChannel::apply_product(const CMatrix& sigma) const {
  if (static_cast<std::size_t>(sigma.rows()) != site_in_dim()) throw DimensionMismatch("word channel: site state size");
  std::vector<CMatrix> tau;
  for (const auto& a : site_kraus_) tau.push_back(a * sigma * a.adjoint());
  const auto od = static_cast<Eigen::Index>(out_total_);
  CMatrix result = CMatrix::Zero(od, od);
  if (!types_) {
    for (const auto& w : words_) {
      std::vector<CMatrix> f;
      for (auto y : w) f.push_back(tau[y]);
      result += kron_all(f);
    }
    return project(result);
  }
  // Dynamic programme over partial count vectors: only prefixes that can
  // still complete to one of the declared types are kept.
  const std::size_t n = site_kraus_.size();
  auto viable = [&](const std::vector<std::size_t>& c) {
    for (const auto& t : *types_) {
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) ok = c[i] <= t.counts[i];
      if (ok) return true;
    }
    return false;
  };
  std::map<std::vector<std::size_t>, CMatrix> layer;
  layer.emplace(std::vector<std::size_t>(n, 0), CMatrix::Ones(1, 1));
  for (std::size_t s = 0; s < l_; ++s) {
    std::map<std::vector<std::size_t>, CMatrix> next;
    for (const auto& [c, m] : layer) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> c2 = c;
        ++c2[i];
        if (!viable(c2)) continue;
        CMatrix term = kron(m, tau[i]);
        auto it = next.find(c2);
        if (it == next.end()) next.emplace(std::move(c2), std::move(term));
        else it->second += term;
      }
    }
    layer = std::move(next);
  }
  for (const auto& t : *types_) {
    auto it = layer.find(t.counts);
    if (it != layer.end()) result += it->second;
  }
  return project(result);
}

KrausChannel WordChannel::materialize(std::size_t max_dim) const {
  if (in_total_ > max_dim || out_total_ > max_dim) throw GuardExceeded("word channel too large to materialize");
  std::vector<CMatrix> ks;
  const CMatrix eye = identity(in_total_);
  for (std::size_t w = 0; w < words_.size(); ++w) ks.push_back(kraus_apply(w, eye));
  if (ks.empty()) ks.push_back(CMatrix::Zero(static_cast<Eigen::Index>(out_total_), static_cast<Eigen::Index>(in_total_)));
  return KrausChannel(std::move(ks), KrausChannel::Kind::TraceDecreasing);
}

double gamma_delta(double delta, std::size_t n) { return -delta * std::log2(delta / static_cast<double>(n)); }

TypicalKrausSet typical_kraus(const KrausChannel& ch, const DensityOperator& pi_g, std::size_t l, double delta,
                              const TypicalityConstants& constants, const TypicalityGuard& guard) {
  if (!ch.trace_preserving()) throw InvalidInput("typical_kraus: the channel must be trace preserving");
  CanonicalKraus canonical = canonical_kraus(ch, pi_g);
  std::vector<double> r = canonical.weights;
  double total = 0.0;
  for (double x : r) total += x;
  for (double& x : r) x /= total;

  TypicalSpec spec;
  spec.delta = delta;
  spec.l = l;
  spec.base = r;
  spec.types = typical_types(r, l, delta, guard);
  for (const auto& t : spec.types) {
    spec.size += t.multiplicity;
    spec.mass += t.mass();
  }
  WordChannel reduced(canonical.channel.kraus(), typical_set(r, l, delta, guard), l);
  reduced.set_types(spec.types);

  KrausWordCertificate cert;
  const double ld = static_cast<double>(l);
  const auto d = static_cast<double>(ch.in_dim());
  cert.c_prime = constants.c_prime;
  cert.entropy_exchange = entropy_exchange(pi_g, ch);
  cert.h_prime = d * d / ld * std::log2(ld + 1.0);
  cert.mass = spec.mass;
  cert.mass_channel = std::numeric_limits<double>::quiet_NaN();
  if (reduced.out_dim() <= 4096 && reduced.in_dim() <= 4096) {
    cert.mass_channel = std::real(reduced.apply_product(pi_g.matrix()).trace());
  }
  cert.mass_bound = 1.0 - std::exp2(-ld * (constants.c_prime * delta * delta - cert.h_prime));
  cert.item1 = cert.mass >= cert.mass_bound - 1e-12;
  cert.c_max = cert.mass >= 1.0 ? kInf : (cert.h_prime - std::log2(1.0 - cert.mass) / ld) / (delta * delta);
  cert.count = spec.size;
  cert.gamma = gamma_delta(delta, canonical.channel.size());
  cert.count_bound_log2 = ld * (cert.entropy_exchange + cert.gamma);
  cert.gamma_min = cert.count > 0 ? std::log2(cert.count) / ld - cert.entropy_exchange : -kInf;
  cert.item2 = cert.count <= 0 || std::log2(cert.count) <= cert.count_bound_log2 + 1e-12;
  return {std::move(canonical), std::move(spec), cert, std::move(reduced)};
}

}  // namespace qcomp
