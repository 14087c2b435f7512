#pragma once

// Completely positive maps in Kraus form and the operations built on them.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qcomp/qmat.hpp"

namespace qcomp {

/// A completely positive map H -> K given by Kraus operators (K×H matrices).
/// Trace preserving channels satisfy Σ a†a = 1 within tol::kTracePreserving,
/// trace decreasing ones Σ a†a <= 1.
class KrausChannel {
 public:
  enum class Kind { TracePreserving, TraceDecreasing };

  KrausChannel(std::vector<CMatrix> kraus, Kind kind);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t size() const { return kraus_.size(); }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const CMatrix& operator[](std::size_t i) const { return kraus_[i]; }
  bool trace_preserving() const { return kind_ == Kind::TracePreserving; }
  Kind kind() const { return kind_; }

  static KrausChannel identity(std::size_t dim);
  /// U(ρ) = tr(ρ) 1/d'.
  static KrausChannel useless(std::size_t in_dim, std::size_t out_dim);
  static KrausChannel phase_flip(double p);
  static KrausChannel bit_flip(double p);
  /// ρ -> (1-p)ρ + p 1/2 with Kraus weights (1-3p/4, p/4, p/4, p/4).
  static KrausChannel depolarizing(double p);
  static KrausChannel amplitude_damping(double gamma);
  static KrausChannel unitary(const CMatrix& u);

 private:
  std::vector<CMatrix> kraus_;
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  Kind kind_;
};

/// Σ a†a, the operator whose deviation from 1 measures trace loss.
CMatrix kraus_gram_sum(const KrausChannel& ch);

CMatrix apply(const KrausChannel& ch, const CMatrix& rho);
CMatrix apply(const KrausChannel& ch, const DensityOperator& rho);

/// Heisenberg-picture map Y -> Σ a† Y a.
CMatrix apply_adjoint(const KrausChannel& ch, const CMatrix& y);

/// Applies `ch` to tensor factor `site` of an operator on ⊗ dims.
CMatrix apply_local(const KrausChannel& ch, const CMatrix& x, const Dims& dims, std::size_t site);

/// ch^{⊗l} applied factor by factor. No Kraus words are materialized.
CMatrix apply_tensor_power(const KrausChannel& ch, std::size_t l, const CMatrix& x);

inline constexpr std::size_t kDefaultKrausWordCap = 4096;

/// ch^{⊗l} with Kraus words a_{y1}⊗...⊗a_{yl} in lexicographic order of y^l.
/// Throws GuardExceeded if size()^l exceeds `cap`.
KrausChannel tensor_power(const KrausChannel& ch, std::size_t l, std::size_t cap = kDefaultKrausWordCap);

/// Complementary map into the environment C^n (n = Kraus count):
/// E(ρ)_{ij} = tr(a_i ρ a_j†). Returned in Kraus form.
KrausChannel complementary(const KrausChannel& ch);

/// Stinespring isometry v φ = Σ_i (a_i φ) ⊗ e_i as an (out·n)×in matrix.
CMatrix stinespring(const KrausChannel& ch);

/// Unnormalized Choi matrix Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|).
CMatrix choi(const KrausChannel& ch);

struct CanonicalKraus {
  KrausChannel channel;
  /// r(i) = tr(a_i π_G a_i†), sorted descending.
  std::vector<double> weights;
  /// index_map[i] = position of the i-th canonical operator before sorting
  /// (eigenvector index of the Gram matrix).
  std::vector<std::size_t> index_map;
};

/// Kraus family of the same map with diagonal Gram matrix tr(a_i π_G a_j†).
/// Operators that vanish identically are dropped.
CanonicalKraus canonical_kraus(const KrausChannel& ch, const DensityOperator& pi_g);

/// Kraus family of (1-s)·a + s·b.
KrausChannel mix(const KrausChannel& a, const KrausChannel& b, double s);

/// Convex combination Σ w_i ch_i (weights must sum to 1).
KrausChannel convex_combination(const std::vector<KrausChannel>& members, const std::vector<double>& weights);

/// outer ∘ inner.
KrausChannel compose(const KrausChannel& outer, const KrausChannel& inner);

/// Kraus family of X -> x†Xx for a (not necessarily square) matrix x, i.e.
/// the operation X -> q X q for a projector q.
KrausChannel compression(const CMatrix& q);

/// Random CPTP (scale = 1) or CPTD (scale < 1: Σ a†a = scale·1) map with n
/// Kraus operators. Deterministic in the seed.
KrausChannel random_channel(std::size_t in_dim, std::size_t out_dim, std::size_t n, std::uint64_t seed,
                            double scale = 1.0);

struct DiamondOptions {
  std::size_t restarts = 8;
  double tol = 1e-9;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 0x5eed;
  std::size_t threads = 1;
};

struct DiamondEstimate {
  /// max over restarts; a lower bound on ||ch1 - ch2||_◊.
  double value = 0.0;
  bool converged = false;
  /// Running maximum after each restart (nondecreasing).
  std::vector<double> running_max;
};

/// Lower estimate of the diamond distance by see-saw ascent over pure inputs
/// on C^d ⊗ H followed by a random-perturbation polish. Restart 0 starts from
/// the maximally entangled state.
DiamondEstimate diamond_distance(const KrausChannel& ch1, const KrausChannel& ch2, const DiamondOptions& opts = {});

/// ||(id ⊗ (ch1 - ch2))(|ψ⟩⟨ψ|)||_1 for ψ on C^d ⊗ H, ancilla first.
double diamond_objective(const KrausChannel& ch1, const KrausChannel& ch2, const CVector& psi);

/// Memoryless averaged channel Σ λ_i N_i^{⊗l}.
struct AveragedChannel {
  std::vector<KrausChannel> members;
  std::vector<double> weights;
  std::size_t block_length = 1;

  void validate() const;
};

CMatrix averaged_apply(const AveragedChannel& av, const CMatrix& rho);

/// The finite set I of a compound channel (or a net approximating it).
struct ChannelFamily {
  std::vector<KrausChannel> members;
  std::vector<std::string> labels;

  void validate() const;
  std::size_t size() const { return members.size(); }
};

}  // namespace qcomp
