#pragma once

// One-shot random coding over Haar-random code subspaces, with the bounds
// used to certify it.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qcomp/channels.hpp"
#include "qcomp/information.hpp"
#include "qcomp/qmat.hpp"
#include "qcomp/typicality.hpp"

namespace qcomp {

/// A code subspace given by an isometry with orthonormal columns.
struct SubspaceFrame {
  CMatrix isometry;  // ambient × k

  std::size_t ambient() const { return static_cast<std::size_t>(isometry.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(isometry.cols()); }
  /// Throws InvalidInput unless V†V = 1 within tol::kUnitary.
  void validate() const;
  /// Span of the first k computational basis vectors.
  static SubspaceFrame first_k(std::size_t ambient, std::size_t k);
  /// π_F = V V† / k.
  CMatrix maximally_mixed() const;
};

/// N^{⊗l} as a word channel over all n^l Kraus words (guarded by `cap`).
WordChannel tensor_word_channel(const KrausChannel& ch, std::size_t l, std::size_t cap = kDefaultKrausWordCap);

struct TruncatedChannel {
  WordChannel channel;       // Q ∘ N_{δ,l}
  KrausWordCertificate kraus_certificate;
  ProjectionCertificate output_certificate;
  double output_entropy = 0.0;  // S(N(π_G)), single site
  std::size_t n = 0;            // number of Kraus words
};

/// N̂ = Q ∘ N_{δ,l}: the reduced operation followed by compression onto the
/// frequency-typical projection of N(π_G)^{⊗l}.
TruncatedChannel truncate_channel(const KrausChannel& ch, const DensityOperator& pi_g, std::size_t l, double delta,
                                  const TypicalityConstants& constants = {}, const TypicalityGuard& guard = {});

struct OneShotTerm {
  double n = 0.0;        // Kraus operators of N_j
  double trace = 0.0;    // tr(N_j(π_G))
  double hs_norm = 0.0;  // ||N_j(π_G)||_2
  /// Analytic bound on ||N_j(π_G)||_2² from the typical-projection lemma
  /// (NaN when not applicable).
  double hs_squared_bound = 0.0;
};

struct OneShotBoundReport {
  std::vector<OneShotTerm> terms;
  std::size_t k = 0;
  double trace = 0.0;   // tr(N(π_G)) of the uniform average
  double penalty = 0.0; // 2 Σ √(k n_j) ||N_j(π_G)||_2
  double bound = 0.0;
  bool vacuous = false;
};

OneShotBoundReport one_shot_bound(const std::vector<OneShotTerm>& terms, std::size_t k);
OneShotBoundReport one_shot_bound(const std::vector<TruncatedChannel>& channels, std::size_t k,
                                  const DensityOperator& pi_g);

struct DecouplingGap {
  double w = 0.0;    // tr(N(π_F))
  double gap = 0.0;  // ||wρ'_ae - wρ_a⊗ρ'_e||_1
  double lower_bound() const { return w - gap; }
};

/// Decoupling quantities for π_F with the channel given by its Kraus
/// operators restricted to the code, b_m = a_m V (K×k).
DecouplingGap decoupling_gap(const std::vector<CMatrix>& kraus_on_code);
DecouplingGap decoupling_gap(const SubspaceFrame& frame, const KrausChannel& ch);

struct DMatrixEntry {
  double closed = 0.0;  // Kraus-sum formula
  double direct = 0.0;  // squared HS norm of the materialized block operator
};

/// ||D_{j,l}(p)||_2² for p = kπ_F, by both routes. Throws InvariantViolation
/// if they differ by more than tol::kDMatrixRoutes.
std::vector<std::vector<DMatrixEntry>> d_matrices(const SubspaceFrame& frame, const std::vector<KrausChannel>& channels);
/// Closed-formula value only, for a projector given through its frame.
double d_matrix_closed(const CMatrix& frame, const KrausChannel& a, const KrausChannel& b);

struct MatrixLemmaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Σ (1/N)√(L_jl D_jl) <= 2 Σ √(L_jj D_jj). Throws InvalidInput if L or D
/// violate the hypotheses.
MatrixLemmaResult matrix_lemma_check(const Eigen::MatrixXd& l, const Eigen::MatrixXd& d);

struct MonteCarloOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  RecoveryOptions recovery{};
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double fidelity = 0.0;
  double w = 0.0;
  double gap = 0.0;
  double runtime_ms = 0.0;
};

struct MonteCarloResult {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
  std::size_t decoupling_violations = 0;
  std::vector<TrialRecord> trials;
};

/// Haar-random codes u F0 inside G^{⊗l} (G spanned by the columns of
/// `site_frame`), recovered by optimize_code_recovery for the uniform
/// average of the given channels.
MonteCarloResult monte_carlo_fidelity(const std::vector<WordChannel>& channels, const CMatrix& site_frame,
                                      std::size_t k, const MonteCarloOptions& opts);

struct HaarMomentReport {
  std::size_t samples = 0;
  /// Per pair (j, l): empirical mean and standard deviation of ||D_{j,l}(UpU†)||_2²
  /// and the bound tr(N_j(π_G) N_l(π_G)).
  std::vector<std::vector<double>> d_mean, d_std, d_bound;
  double trace_mean = 0.0;
  double trace_std = 0.0;
  double trace_value = 0.0;  // tr(N(π_G))
};

/// Empirical Haar averages over codes of dimension k inside the full input
/// space of the channels (G = H).
HaarMomentReport haar_moment_check(const std::vector<KrausChannel>& channels, std::size_t k, std::size_t samples,
                                   std::uint64_t seed, std::size_t threads = 1);

struct SubcodeResult {
  SubspaceFrame subcode;
  double fidelity = 0.0;       // F_e(π_{C'}, E)
  double code_fidelity = 0.0;  // F_e(π_C, E)
  double penalty = 0.0;        // D / (⌊D/K⌋ K)
  double guarantee = 0.0;      // 1 - penalty (1 - code_fidelity)
  std::vector<double> block_fidelities;
  bool holds = false;
};

/// Splits C along its basis order into ⌊D/K⌋ blocks of dimension K and
/// returns the best block for the map `effective` (acting on the ambient
/// space of C).
SubcodeResult extract_subcode(const SubspaceFrame& code, const KrausChannel& effective, std::size_t k);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct FloorRatioResult {
  double value = 0.0;
  double bound = 0.0;         // 1 + 3·2^{-nB}
  bool holds = false;         // value <= 1 + 3·2^{-nB}, decided exactly
  double stated_bound = 0.0;  // 1 - 3·2^{-nB}
  bool stated_holds = false;  // value <= 1 - 3·2^{-nB}, decided exactly
};

/// ⌊2^{nA}⌋ / (⌊2^{nB}⌋·⌊⌊2^{nA}⌋/⌊2^{nB}⌋⌋) in exact integer arithmetic.
FloorRatioResult floor_ratio_check(std::int64_t n, Rational a, Rational b);

}  // namespace qcomp
