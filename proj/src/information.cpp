#include "qcomp/information.hpp"

#include <cmath>
#include <string>

#include "qcomp/errors.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

// Purification route for F_e is evaluated literally (building the output
// operator on the joint space) up to this input dimension.
constexpr std::size_t kLiteralFidelityDim = 16;
// Joint reference/output dimension up to which I_c builds (id⊗N)(|ψ⟩⟨ψ|).
constexpr std::size_t kLiteralJointDim = 512;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Reshapes ψ ∈ C^{ra} ⊗ C^{d} (reference first) into the ra×d matrix Ψ.
CMatrix as_matrix(const PureState& ps) {
  const auto ra = static_cast<Eigen::Index>(ps.dims.at(0));
  const auto d = static_cast<Eigen::Index>(ps.dims.at(1));
  CMatrix m(ra, d);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = ps.vec(i * d + j);
  return m;
}

CVector as_vector(const CMatrix& m) {
  CVector v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

}  // namespace

double shannon_entropy(const std::vector<double>& probs) {
  double s = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw InvalidInput("shannon_entropy: negative probability");
    s -= xlog2x(p);
  }
  return s;
}

double binary_entropy(double p) { return shannon_entropy({p, 1.0 - p}); }

double entropy_psd(const CMatrix& m) {
  const EigenSystem es = hermitian_eigen_unchecked(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double v = es.values(i);
    if (v < -1e-8) throw InvalidInput("entropy_psd: operator is not positive semidefinite");
    s -= xlog2x(std::max(0.0, v));
  }
  return s;
}

double entropy(const DensityOperator& rho) { return entropy_psd(rho.matrix()); }

double kraus_fidelity(const CMatrix& rho, const std::vector<CMatrix>& kraus) {
  double f = 0.0;
  for (const auto& a : kraus) f += std::norm((rho * a).trace());
  return f;
}

FidelityRoutes entanglement_fidelity_routes(const DensityOperator& rho, const KrausChannel& ch) {
  if (ch.in_dim() != rho.dim() || ch.out_dim() != rho.dim()) {
    throw DimensionMismatch("entanglement fidelity needs a channel H -> H on the state's space");
  }
  FidelityRoutes out;
  out.kraus = kraus_fidelity(rho.matrix(), ch.kraus());
  const PureState ps = purify(rho);
  const std::size_t d = rho.dim();
  if (d <= kLiteralFidelityDim) {
    const CMatrix anc = identity(d);
    CMatrix omega = CMatrix::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d));
    for (const auto& a : ch.kraus()) {
      const CVector v = kron(anc, a) * ps.vec;
      omega.noalias() += v * v.adjoint();
    }
    out.purification = std::real(ps.vec.dot(omega * ps.vec));
  } else {
    const CMatrix psi = as_matrix(ps);
    double f = 0.0;
    for (const auto& a : ch.kraus()) {
      const CMatrix moved = psi * a.transpose();
      f += std::norm(psi.conjugate().cwiseProduct(moved).sum());
    }
    out.purification = f;
  }
  return out;
}

double entanglement_fidelity(const DensityOperator& rho, const KrausChannel& ch) {
  const FidelityRoutes r = entanglement_fidelity_routes(rho, ch);
  if (std::abs(r.purification - r.kraus) > tol::kFidelityRoutes) {
    throw InvariantViolation("entanglement fidelity routes disagree: " + std::to_string(r.purification) + " vs " +
                             std::to_string(r.kraus));
  }
  return r.purification;
}

CoherentInfoRoutes coherent_information_routes(const DensityOperator& rho, const KrausChannel& ch) {
  if (ch.in_dim() != rho.dim()) throw DimensionMismatch("coherent information: channel input does not match state");
  CoherentInfoRoutes out;
  out.output_entropy = entropy_psd(apply(ch, rho));
  out.complementary = out.output_entropy - entropy_psd(apply(complementary(ch), rho));

  const PureState ps = purify_on_support(rho);
  const std::size_t ra = ps.dims[0];
  double joint = 0.0;
  if (ra * ch.out_dim() <= kLiteralJointDim) {
    const CMatrix anc = identity(ra);
    const auto jd = static_cast<Eigen::Index>(ra * ch.out_dim());
    CMatrix omega = CMatrix::Zero(jd, jd);
    for (const auto& a : ch.kraus()) {
      const CVector v = kron(anc, a) * ps.vec;
      omega.noalias() += v * v.adjoint();
    }
    joint = entropy_psd(omega);
  } else {
    // Nonzero spectrum of Σ v_i v_i† equals that of the Gram matrix ⟨v_i, v_j⟩.
    const CMatrix psi = as_matrix(ps);
    std::vector<CVector> vs;
    for (const auto& a : ch.kraus()) vs.push_back(as_vector(psi * a.transpose()));
    const auto n = static_cast<Eigen::Index>(vs.size());
    CMatrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = vs[static_cast<std::size_t>(i)].dot(vs[static_cast<std::size_t>(j)]);
    joint = entropy_psd(gram);
  }
  out.purification = out.output_entropy - joint;
  return out;
}

double coherent_information(const DensityOperator& rho, const KrausChannel& ch) {
  if (!ch.trace_preserving()) throw InvalidInput("coherent information requires a trace preserving channel");
  const CoherentInfoRoutes r = coherent_information_routes(rho, ch);
  if (std::abs(r.purification - r.complementary) > tol::kCoherentInfoRoutes) {
    throw InvariantViolation("coherent information routes disagree: " + std::to_string(r.purification) + " vs " +
                             std::to_string(r.complementary));
  }
  return r.purification;
}

double coherent_information_tensor(const DensityOperator& rho, const KrausChannel& ch, std::size_t l) {
  if (!ch.trace_preserving()) throw InvalidInput("coherent information requires a trace preserving channel");
  const std::size_t in_total = checked_power(ch.in_dim(), l, 1u << 12);
  if (rho.dim() != in_total) throw DimensionMismatch("coherent_information_tensor: state does not live on H^{⊗l}");
  const double out_entropy = entropy_psd(apply_tensor_power(ch, l, rho.matrix()));
  // The environment of ch^{⊗l} is E^{⊗l} with the Kraus-word index in
  // lexicographic order.
  const double env_entropy = entropy_psd(apply_tensor_power(complementary(ch), l, rho.matrix()));
  const double value = out_entropy - env_entropy;

  std::size_t words = 1;
  std::size_t out_total = 1;
  for (std::size_t s = 0; s < l; ++s) {
    words *= ch.size();
    out_total *= ch.out_dim();
  }
  if (words <= 256 && rho.dim() * out_total <= 256) {
    const double check = coherent_information(rho, tensor_power(ch, l));
    if (std::abs(check - value) > tol::kCoherentInfoRoutes) {
      throw InvariantViolation("coherent information of tensor power disagrees between routes");
    }
  }
  return value;
}

double entropy_exchange(const DensityOperator& pi_g, const KrausChannel& ch) {
  const CanonicalKraus ck = canonical_kraus(ch, pi_g);
  const double shannon = shannon_entropy(ck.weights);
  const double env = entropy_psd(apply(complementary(ch), pi_g));
  if (std::abs(shannon - env) > tol::kEntropyExchange) {
    throw InvariantViolation("entropy exchange: canonical weights disagree with S(E(pi))");
  }
  return shannon;
}

double fannes_bound(double tau, std::size_t d) {
  if (!(tau > 0.0 && tau <= 1.0 / std::exp(1.0) + 1e-15)) throw InvalidInput("fannes_bound: tau must lie in (0, 1/e]");
  if (d == 0) throw InvalidInput("fannes_bound: dimension must be positive");
  return tau * std::log2(static_cast<double>(d)) - tau * std::log2(tau);
}

}  // namespace qcomp
