#pragma once

// Dense complex linear algebra used by every other module.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcomp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Degenerate eigenvalues are ordered by the index of the
/// first significant component of their eigenvector, and every eigenvector's
/// first significant component is made real positive.
struct EigenSystem {
  RVector values;
  CMatrix vectors;
};

double hermiticity_defect(const CMatrix& m);

/// Throws InvalidInput if `m` is not Hermitian within tol::kHermitian.
EigenSystem hermitian_eigen(const CMatrix& m);

/// Same as hermitian_eigen but symmetrizes first instead of checking.
EigenSystem hermitian_eigen_unchecked(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(std::span<const CMatrix> factors);

enum class Keep { A, B };

/// Partial trace of a square operator on A⊗B (A is the slow index).
CMatrix partial_trace(const CMatrix& m, std::size_t dim_a, std::size_t dim_b, Keep keep);

/// Partial trace over an arbitrary set of tensor factors; `keep` lists the
/// retained factors in increasing order.
CMatrix partial_trace(const CMatrix& m, const Dims& dims, const std::vector<std::size_t>& keep);

/// Applies `op` (dims[site] -> op.rows()) to tensor factor `site` of the row
/// space of `x`: returns (1 ⊗ op ⊗ 1) x. `x` may have any number of columns.
CMatrix apply_local_left(const CMatrix& x, const Dims& dims, std::size_t site, const CMatrix& op);

/// Applies the product operator f[0] ⊗ f[1] ⊗ ... to the columns of `x`
/// one factor at a time, never materializing the product.
CMatrix apply_product_left(std::span<const CMatrix> factors, const CMatrix& x);

/// A positive semidefinite operator with unit trace.
class DensityOperator {
 public:
  /// Validates and normalizes. Eigenvalues in [-tol::kNegativeClamp, 0) are
  /// clamped to zero and the trace renormalized; anything more negative throws.
  explicit DensityOperator(const CMatrix& m);

  static DensityOperator maximally_mixed(std::size_t dim);
  static DensityOperator from_pure(const CVector& psi);
  static DensityOperator diagonal(const std::vector<double>& probs);
  /// Normalizes a PSD matrix with positive trace (used for sub-normalized outputs).
  static DensityOperator normalized(const CMatrix& psd);

  const CMatrix& matrix() const { return mat_; }
  std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }

 private:
  CMatrix mat_;
};

struct PureState {
  CVector vec;
  Dims dims;
};

/// Canonical purification ψ = Σ_i √λ_i |i⟩_a ⊗ e_i over the sorted
/// eigensystem of ρ. The reference factor comes first and has dimension d.
PureState purify(const DensityOperator& rho);

/// Schmidt form of the canonical purification truncated to the support:
/// reference dimension equals rank(ρ).
PureState purify_on_support(const DensityOperator& rho);

/// Deterministic splittable seed derivation (splitmix64 of seed and index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Ginibre matrix with i.i.d. standard complex normal entries.
CMatrix ginibre(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Haar-distributed unitary via QR of a Ginibre matrix with the diagonal of R
/// phase-corrected.
CMatrix haar_unitary(std::size_t dim, std::uint64_t seed);

/// First k columns of a Haar unitary (thin QR of a dim×k Ginibre matrix).
CMatrix haar_isometry(std::size_t dim, std::size_t k, std::uint64_t seed);

/// Haar-random pure state in C^dim.
CVector haar_state(std::size_t dim, std::uint64_t seed);

struct Norms {
  double trace_norm;
  double hs_norm;
  double operator_norm;
};

Norms norms(const CMatrix& m);
double trace_norm(const CMatrix& m);
/// Trace norm of a Hermitian matrix via its eigenvalues.
double trace_norm_hermitian(const CMatrix& m);
double hs_norm(const CMatrix& m);

/// Hilbert-Schmidt inner product tr(a† b).
Complex hs_inner(const CMatrix& a, const CMatrix& b);

/// f(M) for Hermitian M applied to the eigenvalues.
template <typename F>
CMatrix hermitian_function(const CMatrix& m, F&& f) {
  const EigenSystem es = hermitian_eigen_unchecked(m);
  RVector mapped(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) mapped(i) = f(es.values(i));
  return es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
}

CMatrix psd_sqrt(const CMatrix& m);
/// Square root of the pseudo-inverse; eigenvalues below `cutoff` are dropped.
CMatrix psd_inverse_sqrt(const CMatrix& m, double cutoff);

/// Orthonormal basis (as columns) of the column span of `columns`.
CMatrix column_span_basis(const CMatrix& columns, double cutoff);

/// Projector onto the support (eigenvalues above cutoff) of a PSD matrix.
CMatrix support_projector(const CMatrix& psd, double cutoff);

CMatrix identity(std::size_t dim);

/// Computational basis ket |index⟩ in C^dim.
CVector basis_ket(std::size_t dim, std::size_t index);

/// Row-major vectorization: entry (j, k) lands at j * cols + k.
CVector vec_row_major(const CMatrix& m);
CMatrix unvec_row_major(const CVector& v, std::size_t rows, std::size_t cols);

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap);

}  // namespace qcomp
