#pragma once

// Compound channels. Nets over parameterized families and the checks built
// on them live here next to estimation-based code conversion and capacity
// lower bounds.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qcomp/channels.hpp"
#include "qcomp/coding.hpp"
#include "qcomp/information.hpp"
#include "qcomp/qmat.hpp"

namespace qcomp {

/// One-parameter qubit noise family {Λ_p : p ∈ [lo, hi]}.
struct ParametricFamily {
  enum class Kind { PhaseFlip, BitFlip, Depolarizing };
  Kind kind = Kind::PhaseFlip;
  double lo = 0.0;
  double hi = 0.0;

  static ParametricFamily parse(const std::string& name, double lo, double hi);
  std::string name() const;
  KrausChannel at(double p) const;
  /// Largest admissible parameter value.
  double domain_max() const { return 1.0; }
  /// Modulus L with ||Λ_p - Λ_q||_◊ <= L |p - q|.
  double lipschitz() const;
  /// Evenly spaced members (both endpoints included).
  ChannelFamily sample(std::size_t points) const;
  void validate() const;
};

struct ChannelNet {
  double tau = 0.0;
  ChannelFamily members;            // (1 - τ/2) N_g + (τ/2) U for the kept grid points
  std::vector<double> parameters;   // kept grid points g
  double step = 0.0;                // grid spacing τ/(4L)
  double covering_radius = 0.0;     // L·step/2, certified analytically
  std::vector<double> distance_lower;  // diamond estimate ||Λ_g - Λ_nearest family point||
  double log2_cardinality_bound = 0.0; // log2 (6/τ)^{2(dd')²}
  bool mixed = true;
};

/// Grid over the whole parameter domain with spacing τ/(4L); grid points whose
/// cell meets the family are kept and mixed with the useless channel.
ChannelNet build_adapted_net(const ParametricFamily& family, double tau, const DiamondOptions& diamond = {});

/// log2 (3/τ)^{2(dd')²}.
double net_cardinality_bound(double tau, std::size_t d, std::size_t d_out);

/// Smallest value of λ_min(N_i(ψ)) - τ/(2d') over the net members, scanned
/// over basis states and Haar-random pure probes ψ.
double adapted_mixing_margin(const ChannelNet& net, std::size_t probes, std::uint64_t seed);

struct ApproximationReport {
  std::size_t l = 0;
  double tau = 0.0;
  double diamond_lower = 0.0;       // single-copy estimate ||N - N_i||_◊
  double diamond_analytic = 0.0;    // analytic upper bound for the pair
  double diamond_lower_l = -1.0;    // estimate for the l-fold powers (-1 when too large)
  double fidelity_gap = 0.0;        // |F_e(ρ, R∘N^{⊗l}) - F_e(ρ, R∘N_i^{⊗l})|
  bool diamond_consistent = false;  // lower <= analytic + tol
  bool diamond_ok = false;          // l-fold estimate < lτ (or skipped)
  bool fidelity_ok = false;         // gap < lτ
};

/// Checks the approximation lemma for a pair (N, N_i), a state ρ on H^{⊗l} and
/// a recovery R : K^{⊗l} -> H^{⊗l}. `analytic` is an upper bound on
/// ||N - N_i||_◊ known for the pair.
ApproximationReport approximation_check(const KrausChannel& n, const KrausChannel& ni, double analytic,
                                        const DensityOperator& rho, std::size_t l, const KrausChannel& recovery,
                                        double tau, const DiamondOptions& diamond = {});

/// ⟨ψ|(id ⊗ R∘N^{⊗l})(|ψ⟩⟨ψ|)|ψ⟩ for a purification ψ of ρ, applying N site by site.
double tensor_power_fidelity(const DensityOperator& rho, const KrausChannel& ch, std::size_t l,
                             const KrausChannel& recovery);

/// inf over a finite family of I_c(ρ, N).
double min_coherent_information(const DensityOperator& rho, const ChannelFamily& family);

struct IcShiftReport {
  double family_value = 0.0;  // I_c(ρ, I) over the sampled family
  double net_value = 0.0;     // I_c(ρ, I_τ)
  double shift = 0.0;
  double bound = 0.0;         // τ + 2τ log(d/τ)
  bool holds = false;
};

IcShiftReport ic_shift_check(const DensityOperator& rho, const ChannelFamily& family, const ChannelNet& net);

struct CapacityOptions {
  std::size_t random_starts = 8;
  std::size_t max_iterations = 4000;
  double simplex_tol = 1e-9;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct CapacityStart {
  std::string label;
  double start_value = 0.0;
  double value = 0.0;
};

struct CapacityResult {
  DensityOperator rho;
  double value = 0.0;  // max found of min_i I_c(ρ, N_i^{⊗l}) / l
  std::size_t l = 1;
  std::vector<CapacityStart> starts;
};

/// Multi-start simplex ascent over ρ = AA†/tr(AA†) on H^{⊗l}. The starts are
/// the maximally mixed states on the coordinate subspaces (including pure
/// basis states) and random Ginibre matrices.
CapacityResult compound_capacity_lower(const ChannelFamily& family, std::size_t l, const CapacityOptions& opts = {});

struct DiscriminationOptions {
  std::size_t probe_restarts = 4;
  std::size_t probe_iterations = 2000;
  std::uint64_t seed = 1;
  double indistinguishable_tol = 1e-9;
};

struct DiscriminationReport {
  CVector probe;                             // single-site pure probe x, ω = (|x⟩⟨x|)^{⊗m}
  std::size_t m = 0;
  std::vector<CMatrix> povm;                 // on K^{⊗m}
  std::vector<std::vector<double>> success;  // success[i][j] = tr(p_i N_j^{⊗m}(ω))
  std::vector<double> correct;               // success[i][i]
  double average_success = 0.0;
  double worst_success = 0.0;
  double min_pairwise_distance = 0.0;        // min_{i<j} ||N_i(x) - N_j(x)||_1
  bool indistinguishable = false;
};

/// Pure single-site probe maximizing the smallest pairwise output trace distance.
CVector optimize_probe(const ChannelFamily& family, const DiscriminationOptions& opts = {});

/// Pretty-good measurement on {N_i^{⊗m}(ω)} completed by (1 - Π)/N on the
/// complement of the joint support.
DiscriminationReport discriminate(const ChannelFamily& family, std::size_t m, const CVector& probe,
                                  const DiscriminationOptions& opts = {});
DiscriminationReport discriminate(const ChannelFamily& family, std::size_t m, const DiscriminationOptions& opts = {});

struct DecayFit {
  std::vector<std::size_t> m;
  std::vector<double> failure;  // 1 - worst success
  double f = 1.0;               // failure ≈ C f^m (least squares in log space)
  double log_c = 0.0;
  bool nondecreasing = false;   // worst success nondecreasing in m
};

DecayFit fit_decay(const std::vector<DiscriminationReport>& sweep);

/// An informed code: a frame on H^{⊗t} and a recovery K^{⊗t} -> H^{⊗t}.
struct InformedCode {
  SubspaceFrame frame;
  KrausChannel recovery;
  double fidelity = 0.0;  // F_e(π_F, R∘N^{⊗t}) for its own member
};

/// Optimal recovery for the given frame against ch^{⊗t}.
InformedCode informed_code(const KrausChannel& ch, std::size_t t, const SubspaceFrame& frame,
                           const RecoveryOptions& opts = {});

/// Repetition code span{|+⟩^{⊗t}, |−⟩^{⊗t}} on qubits.
SubspaceFrame repetition_code_x(std::size_t t);

struct ConversionMember {
  double combined = 0.0;                 // F_e(π_{F'}, R∘N_i^{⊗(m+t)}), evaluated on the joint state
  double factorized = 0.0;               // Σ_j success[j][i] F_e(π_{F^i}, R_j∘N_i^{⊗t})
  double estimation = 0.0;               // success[i][i]
  double informed = 0.0;                 // F_e(π_{F^i}, R_i∘N_i^{⊗t})
  double product_bound = 0.0;            // estimation · informed
  bool holds = false;
};

struct ConversionResult {
  std::size_t m = 0;
  std::size_t t = 0;
  std::vector<ConversionMember> members;
};

/// Estimate-then-decode conversion: the recovery Σ_j R̂_j ⊗ R_j with
/// R̂_j(X) = ω tr(p_j X). codes[i] is used when member i is present (pass the
/// same frame for every member to model an uninformed encoder). Throws
/// InvariantViolation if the product bound fails on any member.
ConversionResult convert_code(const ChannelFamily& family, const std::vector<InformedCode>& codes,
                              const DiscriminationReport& discrimination);

/// Equalizes code dimensions by extracting subcodes of the smallest dimension.
std::vector<InformedCode> equalize_codes(const ChannelFamily& family, const std::vector<InformedCode>& codes,
                                         std::size_t t);

struct AveragedFidelityReport {
  std::vector<double> members;  // F_e(ρ, R∘N_i)
  double average = 0.0;         // F_e(ρ, R∘Σλ_i N_i)
  double linear = 0.0;          // Σ λ_i F_e,i
  bool linear_ok = false;
  bool back_conversion_ok = false;  // F_e,i >= 1 - (1 - average)/λ_i
};

/// Linearity of F_e in the channel and the conversion between averaged and
/// per-member fidelities. The recovery is applied after each member.
AveragedFidelityReport averaged_fidelity_check(const DensityOperator& rho, const std::vector<KrausChannel>& members,
                                               const std::vector<double>& weights, const KrausChannel& recovery);

struct BsstRow {
  std::size_t l = 0;
  double delta = 0.0;
  double tau = 0.0;
  double value = 0.0;       // (1/l) min_i I_c(π_{δ,l}, N_i^{⊗l})
  double target = 0.0;      // min_i I_c(ρ, N_i)
  double deviation = 0.0;
  double mass = 0.0;        // tr(ρ^{⊗l} q), used in place of η_l(δ)
  double theta_out = 0.0;   // Θ_l(δ, d')
  double theta_env = 0.0;   // Θ_l(δ, dim H_e)
  double big_delta = 0.0;   // Δ_l(δ, d', dim H_e)
  double envelope = 0.0;    // right-hand side of the final triangle inequality
  bool within = false;
};

struct BsstReport {
  std::vector<BsstRow> rows;
  bool monotone = false;
  bool all_within = false;
};

/// τ_l = 1/(e l²) when `taus` is empty.
BsstReport bsst_check(const DensityOperator& rho, const ChannelFamily& family, const std::vector<std::size_t>& ls,
                      const std::vector<double>& deltas, std::vector<double> taus = {});

}  // namespace qcomp
