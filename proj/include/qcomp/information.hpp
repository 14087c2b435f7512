#pragma once

// Entropic quantities of states and channels, plus recovery maps.

#include <cstddef>
#include <vector>

#include "qcomp/channels.hpp"
#include "qcomp/qmat.hpp"

namespace qcomp {

/// Shannon entropy in bits with 0 log 0 = 0. Entries must be nonnegative.
double shannon_entropy(const std::vector<double>& probs);
double binary_entropy(double p);

/// von Neumann entropy in bits.
double entropy(const DensityOperator& rho);
/// Entropy of a PSD matrix of arbitrary positive trace, spectrum used as given
/// (no renormalization). Small negative eigenvalues are clamped.
double entropy_psd(const CMatrix& m);

struct FidelityRoutes {
  double purification = 0.0;
  double kraus = 0.0;
};

/// Both evaluations of F_e(ρ, ch) for ch: H -> H. The purification route is
/// ⟨ψ|(id⊗ch)(|ψ⟩⟨ψ|)|ψ⟩ with ψ the canonical purification; the Kraus route
/// is Σ|tr(ρ a_i)|².
FidelityRoutes entanglement_fidelity_routes(const DensityOperator& rho, const KrausChannel& ch);

/// F_e(ρ, ch). Computes both routes and throws InvariantViolation if they
/// disagree by more than tol::kFidelityRoutes.
double entanglement_fidelity(const DensityOperator& rho, const KrausChannel& ch);

/// Σ_i |tr(ρ a_i)|² over an arbitrary Kraus list (no validation).
double kraus_fidelity(const CMatrix& rho, const std::vector<CMatrix>& kraus);

struct CoherentInfoRoutes {
  double purification = 0.0;
  double complementary = 0.0;
  double output_entropy = 0.0;
};

CoherentInfoRoutes coherent_information_routes(const DensityOperator& rho, const KrausChannel& ch);

/// I_c(ρ, ch) = S(ch(ρ)) - S((id⊗ch)(|ψ⟩⟨ψ|)). Both routes are evaluated and
/// must agree within tol::kCoherentInfoRoutes.
double coherent_information(const DensityOperator& rho, const KrausChannel& ch);

/// I_c(ρ, ch^{⊗l}) for ρ on H^{⊗l} without materializing Kraus words: the
/// output and environment states are built factor by factor. When the joint
/// reference/output space is small the purification route is cross-checked.
double coherent_information_tensor(const DensityOperator& rho, const KrausChannel& ch, std::size_t l);

/// S_e(π_G, ch): Shannon entropy of the canonical Kraus weights, checked
/// against S(E(π_G)).
double entropy_exchange(const DensityOperator& pi_g, const KrausChannel& ch);

/// τ log d - τ log τ, for 0 < τ <= 1/e.
double fannes_bound(double tau, std::size_t d);

using RecoveryMap = KrausChannel;

struct RecoveryOptions {
  std::size_t iterations = 200;
  double tol = 1e-10;
};

struct RecoveryResult {
  RecoveryMap recovery;
  double fidelity = 0.0;
  bool converged = false;
  /// Best value after the initializer and after each iteration (nondecreasing).
  std::vector<double> history;
};

/// Recovery for a code given in compressed form: ρ̃ on C^k and Kraus
/// operators b_m = a_m V (K×k) of the channel restricted to the code.
/// The recovery acts C^r -> C^k on an orthonormal basis W (K×r) of the output
/// support; the full recovery is X -> V R̃(W†XW) V† plus a completion.
struct CompressedRecovery {
  CMatrix output_basis;      // W, K×r
  RecoveryMap recovery;      // C^r -> C^k
  double fidelity = 0.0;
  bool converged = false;
  std::vector<double> history;
};

CompressedRecovery optimize_code_recovery(const DensityOperator& rho_code, const std::vector<CMatrix>& kraus_on_code,
                                          const RecoveryOptions& opts = {});

/// Lifts a compressed recovery to a CPTP map K -> H given the code frame V.
RecoveryMap lift_recovery(const CompressedRecovery& rec, const CMatrix& frame, std::size_t out_dim_k);

/// Petz-initialized fixed-point optimization of F_e(ρ, R∘ch) over CPTP R.
/// The value is a lower bound on the optimal entanglement fidelity.
RecoveryResult optimize_recovery(const DensityOperator& rho, const KrausChannel& ch, const RecoveryOptions& opts = {});

}  // namespace qcomp
