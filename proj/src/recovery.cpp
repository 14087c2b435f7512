// Recovery maps maximizing entanglement fidelity.
//
// The recovery is represented by its Choi matrix J on C^r ⊗ C^k (input
// first). For ρ̃ on C^k and channel Kraus operators b̃_m (r×k),
// F_e(ρ̃, R∘N) = tr(M J) with M = Σ_m |β_m⟩⟨β_m| and β_m the conjugated
// row-major vectorization of b̃_m ρ̃. Starting from the Petz map, the iterate
// J -> (Λ^{-1/2}⊗1) JMJ (Λ^{-1/2}⊗1), Λ = tr_out(JMJ), is applied and the
// best iterate is kept.

#include <algorithm>
#include <cmath>

#include "qcomp/errors.hpp"
#include "qcomp/information.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

// Choi vector of a k×r Kraus operator p: index (input r', output h) = p(h, r').
CVector choi_vector(const CMatrix& p) { return vec_row_major(CMatrix(p.transpose())); }

CMatrix kraus_from_choi_vector(const CVector& v, std::size_t r, std::size_t k) {
  return unvec_row_major(v, r, k).transpose();
}

// Adds (1 - tr_out J) ⊗ |0⟩⟨0| so that J becomes trace preserving.
void complete(CMatrix& j, std::size_t r, std::size_t k) {
  const CMatrix marginal = partial_trace(j, r, k, Keep::A);
  const CMatrix deficit = identity(r) - marginal;
  const auto kk = static_cast<Eigen::Index>(k);
  for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(r); ++a)
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(r); ++b) j(a * kk, b * kk) += deficit(a, b);
}

RecoveryMap choi_to_channel(const CMatrix& j, std::size_t r, std::size_t k) {
  const EigenSystem es = hermitian_eigen_unchecked(j);
  std::vector<CMatrix> ks;
  const double top = std::max(1.0, es.values(0));
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) <= 1e-14 * top) break;
    ks.push_back(std::sqrt(es.values(i)) * kraus_from_choi_vector(es.vectors.col(i), r, k));
  }
  if (ks.empty()) ks.push_back(CMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r)));
  return KrausChannel(std::move(ks), KrausChannel::Kind::TracePreserving);
}

double objective(const CMatrix& m, const CMatrix& j) { return std::real((m * j).trace()); }

}  // namespace

CompressedRecovery optimize_code_recovery(const DensityOperator& rho_code, const std::vector<CMatrix>& kraus_on_code,
                                          const RecoveryOptions& opts) {
  if (kraus_on_code.empty()) throw InvalidInput("optimize_code_recovery: empty Kraus list");
  const std::size_t k = rho_code.dim();
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::Index out_dim = kraus_on_code.front().rows();
  for (const auto& b : kraus_on_code) {
    if (b.cols() != kk || b.rows() != out_dim) throw DimensionMismatch("optimize_code_recovery: Kraus shape mismatch");
  }

  CMatrix stacked(out_dim, kk * static_cast<Eigen::Index>(kraus_on_code.size()));
  for (std::size_t m = 0; m < kraus_on_code.size(); ++m) stacked.middleCols(static_cast<Eigen::Index>(m) * kk, kk) = kraus_on_code[m];
  CompressedRecovery out{column_span_basis(stacked, tol::kSupportRank), KrausChannel::identity(1), 0.0, true, {}};

  if (out.output_basis.cols() == 0) {
    // The channel annihilates the code: nothing can be recovered.
    out.output_basis = CMatrix::Zero(out_dim, 1);
    out.output_basis(0, 0) = 1.0;
    CMatrix to_zero = CMatrix::Zero(kk, 1);
    to_zero(0, 0) = 1.0;
    out.recovery = KrausChannel({to_zero}, KrausChannel::Kind::TracePreserving);
    out.history.push_back(0.0);
    return out;
  }

  const std::size_t r = static_cast<std::size_t>(out.output_basis.cols());
  const CMatrix& rho = rho_code.matrix();
  std::vector<CMatrix> reduced;
  for (const auto& b : kraus_on_code) reduced.push_back(out.output_basis.adjoint() * b);

  const auto dim = static_cast<Eigen::Index>(r * k);
  CMatrix m = CMatrix::Zero(dim, dim);
  CMatrix sigma = CMatrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (const auto& b : reduced) {
    const CVector beta = vec_row_major(CMatrix(b * rho)).conjugate();
    m.noalias() += beta * beta.adjoint();
    sigma.noalias() += b * rho * b.adjoint();
  }

  // Petz (transpose-channel) initializer on the output support.
  const CMatrix rho_sqrt = psd_sqrt(rho);
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  const CMatrix sigma_isqrt = psd_inverse_sqrt(sigma, tol::kPseudoInverse * scale);
  CMatrix j = CMatrix::Zero(dim, dim);
  for (const auto& b : reduced) {
    const CVector v = choi_vector(rho_sqrt * b.adjoint() * sigma_isqrt);
    j.noalias() += v * v.adjoint();
  }
  complete(j, r, k);

  CMatrix best = j;
  double best_value = objective(m, j);
  out.history.push_back(best_value);
  out.converged = false;
  double previous = best_value;
  for (std::size_t it = 0; it < opts.iterations; ++it) {
    CMatrix x = j * m * j;
    x = (x + x.adjoint()).eval() * 0.5;
    const CMatrix lambda = partial_trace(x, r, k, Keep::A);
    const double lscale = std::max(1e-300, lambda.cwiseAbs().maxCoeff());
    const CMatrix lambda_isqrt = psd_inverse_sqrt(lambda, 1e-13 * lscale);
    const CMatrix left = kron(lambda_isqrt, identity(k));
    j = left * x * left;
    j = (j + j.adjoint()).eval() * 0.5;
    complete(j, r, k);
    const double value = objective(m, j);
    if (value > best_value) {
      best_value = value;
      best = j;
    }
    out.history.push_back(best_value);
    if (std::abs(value - previous) < opts.tol) {
      out.converged = true;
      break;
    }
    previous = value;
  }
  out.recovery = choi_to_channel(best, r, k);
  out.fidelity = kraus_fidelity(rho, [&] {
    std::vector<CMatrix> composed;
    for (const auto& p : out.recovery.kraus())
      for (const auto& b : reduced) composed.push_back(p * b);
    return composed;
  }());
  return out;
}

RecoveryMap lift_recovery(const CompressedRecovery& rec, const CMatrix& frame, std::size_t out_dim_k) {
  const CMatrix& w = rec.output_basis;
  if (static_cast<std::size_t>(w.rows()) != out_dim_k) throw DimensionMismatch("lift_recovery: output basis mismatch");
  std::vector<CMatrix> ks;
  for (const auto& p : rec.recovery.kraus()) ks.push_back(frame * p * w.adjoint());
  const CMatrix complement = identity(out_dim_k) - w * w.adjoint();
  const CMatrix perp = column_span_basis(complement, 1e-8);
  const CVector target = frame.col(0);
  for (Eigen::Index c = 0; c < perp.cols(); ++c) ks.push_back(target * perp.col(c).adjoint());
  return KrausChannel(std::move(ks), KrausChannel::Kind::TracePreserving);
}

RecoveryResult optimize_recovery(const DensityOperator& rho, const KrausChannel& ch, const RecoveryOptions& opts) {
  if (ch.in_dim() != rho.dim()) throw DimensionMismatch("optimize_recovery: channel input does not match state");
  const EigenSystem es = hermitian_eigen(rho.matrix());
  Eigen::Index rank = 0;
  while (rank < es.values.size() && es.values(rank) > tol::kSupportRank) ++rank;
  const CMatrix frame = es.vectors.leftCols(rank);
  std::vector<double> probs;
  for (Eigen::Index i = 0; i < rank; ++i) probs.push_back(es.values(i));
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  const DensityOperator rho_code = DensityOperator::diagonal(probs);
  std::vector<CMatrix> on_code;
  for (const auto& a : ch.kraus()) on_code.push_back(a * frame);
  CompressedRecovery rec = optimize_code_recovery(rho_code, on_code, opts);
  RecoveryResult out{lift_recovery(rec, frame, ch.out_dim()), rec.fidelity, rec.converged, rec.history};
  return out;
}

}  // namespace qcomp
