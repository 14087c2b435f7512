#include "qcomp/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qcomp/errors.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

Eigen::Index first_significant(const CVector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * std::max(scale, 1.0)) return i;
  }
  return 0;
}

EigenSystem sorted_eigen(const CMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  const auto n = herm.rows();
  const RVector& vals = solver.eigenvalues();
  CMatrix vecs = solver.eigenvectors();
  std::vector<Eigen::Index> lead(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CVector col = vecs.col(i);
    const Eigen::Index k = first_significant(col);
    lead[i] = k;
    const Complex phase = col(k) / std::abs(col(k));
    vecs.col(i) = col / phase;
  }
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(vals(a) - vals(b)) > 1e-12 * scale) return vals(a) > vals(b);
    return lead[a] < lead[b];
  });
  EigenSystem out{RVector(n), CMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = vals(order[i]);
    out.vectors.col(i) = vecs.col(order[i]);
  }
  return out;
}

}  // namespace

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

EigenSystem hermitian_eigen(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigendecomposition needs a square matrix");
  if (hermiticity_defect(m) > tol::kHermitian) {
    throw InvalidInput("matrix is not Hermitian within tolerance");
  }
  return sorted_eigen(0.5 * (m + m.adjoint()));
}

EigenSystem hermitian_eigen_unchecked(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigendecomposition needs a square matrix");
  return sorted_eigen(0.5 * (m + m.adjoint()));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
  if (factors.empty()) return CMatrix::Identity(1, 1);
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

CMatrix partial_trace(const CMatrix& m, std::size_t dim_a, std::size_t dim_b, Keep keep) {
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  if (m.rows() != m.cols() || m.rows() != da * db) {
    throw DimensionMismatch("partial_trace: operator is not " + std::to_string(dim_a) + "x" +
                            std::to_string(dim_b) + " square");
  }
  if (keep == Keep::A) {
    CMatrix out = CMatrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j) out(i, j) = m.block(i * db, j * db, db, db).trace();
    return out;
  }
  CMatrix out = CMatrix::Zero(db, db);
  for (Eigen::Index i = 0; i < da; ++i) out += m.block(i * db, i * db, db, db);
  return out;
}

CMatrix partial_trace(const CMatrix& m, const Dims& dims, const std::vector<std::size_t>& keep) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != total) {
    throw DimensionMismatch("partial_trace: operator does not match factor dimensions");
  }
  const std::size_t n = dims.size();
  std::vector<bool> kept(n, false);
  for (auto k : keep) {
    if (k >= n) throw DimensionMismatch("partial_trace: kept factor out of range");
    kept[k] = true;
  }
  std::size_t dk = 1;
  for (std::size_t s = 0; s < n; ++s)
    if (kept[s]) dk *= dims[s];
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  // Decompose row/col multi-indices; traced factors must coincide.
  std::vector<std::size_t> ri(n), ci(n);
  for (std::size_t r = 0; r < total; ++r) {
    std::size_t rem = r;
    for (std::size_t s = n; s-- > 0;) {
      ri[s] = rem % dims[s];
      rem /= dims[s];
    }
    for (std::size_t c = 0; c < total; ++c) {
      rem = c;
      bool match = true;
      for (std::size_t s = n; s-- > 0;) {
        ci[s] = rem % dims[s];
        rem /= dims[s];
        if (!kept[s] && ci[s] != ri[s]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      std::size_t kr = 0, kc = 0;
      for (std::size_t s = 0; s < n; ++s) {
        if (!kept[s]) continue;
        kr = kr * dims[s] + ri[s];
        kc = kc * dims[s] + ci[s];
      }
      out(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(kc)) +=
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

CMatrix apply_local_left(const CMatrix& x, const Dims& dims, std::size_t site, const CMatrix& op) {
  if (site >= dims.size()) throw DimensionMismatch("apply_local_left: site out of range");
  std::size_t left = 1, right = 1;
  for (std::size_t s = 0; s < site; ++s) left *= dims[s];
  for (std::size_t s = site + 1; s < dims.size(); ++s) right *= dims[s];
  const auto din = static_cast<Eigen::Index>(dims[site]);
  if (op.cols() != din || static_cast<std::size_t>(x.rows()) != left * dims[site] * right) {
    throw DimensionMismatch("apply_local_left: operator does not act on the selected factor");
  }
  const Eigen::Index dout = op.rows();
  const auto r = static_cast<Eigen::Index>(right);
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(left) * dout * r, x.cols());
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(left); ++l) {
    for (Eigen::Index o = 0; o < dout; ++o) {
      for (Eigen::Index i = 0; i < din; ++i) {
        const Complex coef = op(o, i);
        if (coef == Complex(0.0, 0.0)) continue;
        out.middleRows((l * dout + o) * r, r) += coef * x.middleRows((l * din + i) * r, r);
      }
    }
  }
  return out;
}

CMatrix apply_product_left(std::span<const CMatrix> factors, const CMatrix& x) {
  Dims dims(factors.size());
  for (std::size_t s = 0; s < factors.size(); ++s) dims[s] = static_cast<std::size_t>(factors[s].cols());
  CMatrix cur = x;
  for (std::size_t s = 0; s < factors.size(); ++s) {
    cur = apply_local_left(cur, dims, s, factors[s]);
    dims[s] = static_cast<std::size_t>(factors[s].rows());
  }
  return cur;
}

DensityOperator::DensityOperator(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionMismatch("density operator must be square");
  if (hermiticity_defect(m) > tol::kHermitian) throw InvalidInput("density operator is not Hermitian");
  const double tr = m.trace().real();
  if (std::abs(tr - 1.0) > tol::kTraceOne) {
    throw InvalidInput("density operator trace " + std::to_string(tr) + " differs from 1");
  }
  CMatrix herm = 0.5 * (m + m.adjoint());
  const EigenSystem es = sorted_eigen(herm);
  const double min_eig = es.values.minCoeff();
  if (min_eig < -tol::kNegativeClamp) {
    throw InvalidInput("density operator has eigenvalue " + std::to_string(min_eig));
  }
  if (min_eig < 0.0) {
    RVector clamped = es.values.cwiseMax(0.0);
    clamped /= clamped.sum();
    herm = es.vectors * clamped.asDiagonal() * es.vectors.adjoint();
  } else {
    herm /= tr;
  }
  mat_ = std::move(herm);
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return DensityOperator(CMatrix::Identity(d, d) / static_cast<double>(dim));
}

DensityOperator DensityOperator::from_pure(const CVector& psi) {
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-10) throw InvalidInput("pure state is not normalized");
  return DensityOperator(psi * psi.adjoint());
}

DensityOperator DensityOperator::diagonal(const std::vector<double>& probs) {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(probs.size()), static_cast<Eigen::Index>(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = probs[i];
  return DensityOperator(m);
}

DensityOperator DensityOperator::normalized(const CMatrix& psd) {
  const double tr = psd.trace().real();
  if (!(tr > 0.0)) throw InvalidInput("cannot normalize an operator with non-positive trace");
  return DensityOperator(psd / tr);
}

PureState purify(const DensityOperator& rho) {
  const EigenSystem es = hermitian_eigen(rho.matrix());
  const auto d = static_cast<Eigen::Index>(rho.dim());
  CVector psi = CVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = std::max(0.0, es.values(i));
    if (lam == 0.0) continue;
    psi.segment(i * d, d) = std::sqrt(lam) * es.vectors.col(i);
  }
  psi /= psi.norm();
  return {psi, {rho.dim(), rho.dim()}};
}

PureState purify_on_support(const DensityOperator& rho) {
  const EigenSystem es = hermitian_eigen(rho.matrix());
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Eigen::Index rank = 0;
  while (rank < d && es.values(rank) > tol::kPseudoInverse) ++rank;
  CVector psi = CVector::Zero(rank * d);
  for (Eigen::Index i = 0; i < rank; ++i) psi.segment(i * d, d) = std::sqrt(es.values(i)) * es.vectors.col(i);
  psi /= psi.norm();
  return {psi, {static_cast<std::size_t>(rank), rho.dim()}};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CMatrix ginibre(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re * s, im * s);
    }
  return z;
}

namespace {

CMatrix phase_fixed_q(const CMatrix& z, Eigen::Index k) {
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(z.rows(), k);
  const CMatrix& packed = qr.matrixQR();
  for (Eigen::Index i = 0; i < k; ++i) {
    const Complex rii = packed(i, i);
    const double mag = std::abs(rii);
    if (mag > 0.0) q.col(i) *= rii / mag;
  }
  return q;
}

}  // namespace

CMatrix haar_unitary(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw InvalidInput("haar_unitary: dimension must be positive");
  const CMatrix z = ginibre(dim, dim, seed);
  return phase_fixed_q(z, static_cast<Eigen::Index>(dim));
}

CMatrix haar_isometry(std::size_t dim, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > dim) throw InvalidInput("haar_isometry: need 1 <= k <= dim");
  const CMatrix z = ginibre(dim, k, seed);
  return phase_fixed_q(z, static_cast<Eigen::Index>(k));
}

CVector haar_state(std::size_t dim, std::uint64_t seed) {
  CVector v = ginibre(dim, 1, seed).col(0);
  return v / v.norm();
}

Norms norms(const CMatrix& m) {
  if (m.size() == 0) return {0.0, 0.0, 0.0};
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& s = svd.singularValues();
  return {s.sum(), m.norm(), s.maxCoeff()};
}

double trace_norm(const CMatrix& m) { return norms(m).trace_norm; }

double trace_norm_hermitian(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

double hs_norm(const CMatrix& m) { return m.norm(); }

Complex hs_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace(); }

CMatrix psd_sqrt(const CMatrix& m) {
  return hermitian_function(m, [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

CMatrix psd_inverse_sqrt(const CMatrix& m, double cutoff) {
  return hermitian_function(m, [cutoff](double x) { return x > cutoff ? 1.0 / std::sqrt(x) : 0.0; });
}

CMatrix column_span_basis(const CMatrix& columns, double cutoff) {
  if (columns.cols() == 0) return CMatrix(columns.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff * scale) ++rank;
  return svd.matrixU().leftCols(rank);
}

CMatrix support_projector(const CMatrix& psd, double cutoff) {
  return hermitian_function(psd, [cutoff](double x) { return x > cutoff ? 1.0 : 0.0; });
}

CMatrix identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return CMatrix::Identity(d, d);
}

CVector basis_ket(std::size_t dim, std::size_t index) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

CVector vec_row_major(const CMatrix& m) {
  CVector v(m.size());
  for (Eigen::Index j = 0; j < m.rows(); ++j)
    for (Eigen::Index k = 0; k < m.cols(); ++k) v(j * m.cols() + k) = m(j, k);
  return v;
}

CMatrix unvec_row_major(const CVector& v, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(v.size()) != rows * cols) throw DimensionMismatch("unvec: size mismatch");
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.rows(); ++j)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(j, k) = v(j * m.cols() + k);
  return m;
}

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (base != 0 && out > cap / base) {
      throw GuardExceeded(std::to_string(base) + "^" + std::to_string(exponent) + " exceeds cap " +
                          std::to_string(cap));
    }
    out *= base;
  }
  if (out > cap) throw GuardExceeded("power exceeds cap " + std::to_string(cap));
  return out;
}

}  // namespace qcomp
