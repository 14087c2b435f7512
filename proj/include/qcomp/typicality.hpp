#pragma once

// Frequency typicality for states and for Kraus words. Word channels are
// evaluated lazily.

#include <cstddef>
#include <optional>
#include <vector>

#include "qcomp/channels.hpp"
#include "qcomp/qmat.hpp"

namespace qcomp {

struct TypicalityGuard {
  std::size_t max_l = 20;
  std::size_t max_alphabet = 4;
  /// Largest number of sequences that may be listed explicitly.
  std::size_t max_sequences = std::size_t{1} << 22;
  /// Largest d^l for which the projector is materialized as a dense matrix.
  std::size_t max_projector_dim = 1024;
};

/// Constants of the mass bounds. The defaults 1/(2 ln 2) are the
/// Pinsker-consistent choice; both are configurable.
struct TypicalityConstants {
  double c = 0.72134752044448170368;        // 1 / (2 ln 2)
  double c_prime = 0.72134752044448170368;  // 1 / (2 ln 2)
};

/// One type (composition of l) with its multiplicity and the probability of
/// each of its sequences under base^{⊗l}.
struct TypeClass {
  std::vector<std::size_t> counts;
  double multiplicity = 0.0;
  double log2_prob_each = 0.0;  // -inf when the type has zero probability
  double prob_each() const;
  double mass() const { return multiplicity * prob_each(); }
};

/// All compositions of l into base.size() parts passing the ℓ1 test
/// ||counts/l - base||_1 < δ and vanishing wherever base does.
std::vector<TypeClass> typical_types(const std::vector<double>& base, std::size_t l, double delta,
                                     const TypicalityGuard& guard = {});

/// Explicit list of the typical sequences in lexicographic order.
std::vector<std::vector<std::size_t>> typical_set(const std::vector<double>& base, std::size_t l, double delta,
                                                  const TypicalityGuard& guard = {});

/// Membership mask over all base.size()^l sequences in row-major
/// (lexicographic) order.
std::vector<char> type_mask(const std::vector<TypeClass>& types, std::size_t alphabet, std::size_t l,
                            const TypicalityGuard& guard = {});

struct TypicalSpec {
  double delta = 0.0;
  std::size_t l = 0;
  std::vector<double> base;
  std::vector<TypeClass> types;
  double size = 0.0;  // number of typical sequences
  double mass = 0.0;  // base^{⊗l}(T)
  /// Eigenbasis of the single-site state (columns ordered like `base`).
  CMatrix site_basis;
  /// Dense projector, present when d^l <= guard.max_projector_dim.
  std::optional<CMatrix> projector;
};

struct ProjectionCertificate {
  double c = 0.0;
  double entropy = 0.0;      // S(ρ)
  double phi = 0.0;          // -δ log(δ/d)
  double h = 0.0;            // (d/l) log(l+1)
  double eta = 0.0;          // 1 - 2^{-l(cδ² - h)}
  double mass = 0.0;         // tr(ρ^{⊗l} q)
  double mass_classical = 0.0;
  double mass_bound = 0.0;   // η
  double c_max = 0.0;        // largest c for which item 1 holds here
  double min_eigen_log2 = 0.0;  // log2 of the smallest retained eigenvalue
  double max_eigen_log2 = 0.0;
  double sandwich_lo_log2 = 0.0;  // -l(S + φ)
  double sandwich_hi_log2 = 0.0;  // -l(S - φ)
  double dim = 0.0;          // tr q
  double dim_lo = 0.0;       // η 2^{l(S-φ)}
  double dim_hi = 0.0;       // 2^{l(S+φ)}
  double hs_squared = 0.0;   // ||q ρ^{⊗l} q||_2²
  double hs_squared_bound = 0.0;  // 2^{-l(S - 3φ)}
  bool item1 = false;
  bool item2 = false;
  bool item3 = false;
  bool hs_bound = false;
};

struct TypicalProjection {
  TypicalSpec spec;
  ProjectionCertificate certificate;
};

double phi_delta(double delta, std::size_t d);
double h_of_l(std::size_t l, std::size_t d);

/// Frequency-typical projection of ρ^{⊗l} in the sorted eigenbasis of ρ with
/// its measured certificate.
TypicalProjection typical_projector(const DensityOperator& rho, std::size_t l, double delta,
                                    const TypicalityConstants& constants = {}, const TypicalityGuard& guard = {});

/// A CPTD map on H^{⊗l} whose Kraus operators are words a_{y1}⊗...⊗a_{yl}
/// over single-site operators, optionally followed by the compression
/// X -> qXq with q diagonal in a product basis. Nothing of size (d^l)² is
/// formed unless an operator on the full space is requested.
class WordChannel {
 public:
  WordChannel(std::vector<CMatrix> site_kraus, std::vector<std::vector<std::size_t>> words, std::size_t l);

  /// Declares that the words are exactly the union of these type classes,
  /// enabling the fast product-input evaluation.
  void set_types(std::vector<TypeClass> types) { types_ = std::move(types); }
  /// Compression by q = U^{⊗l} diag(mask) U^{⊗l}† after the Kraus words.
  void set_output_projection(const CMatrix& site_basis, std::vector<char> mask);

  std::size_t l() const { return l_; }
  std::size_t size() const { return words_.size(); }
  std::size_t site_in_dim() const { return static_cast<std::size_t>(site_kraus_.front().cols()); }
  std::size_t site_out_dim() const { return static_cast<std::size_t>(site_kraus_.front().rows()); }
  std::size_t in_dim() const { return in_total_; }
  std::size_t out_dim() const { return out_total_; }
  const std::vector<std::vector<std::size_t>>& words() const { return words_; }
  const std::vector<CMatrix>& site_kraus() const { return site_kraus_; }
  bool has_projection() const { return !mask_.empty(); }

  /// K_w x for the w-th Kraus operator (including the compression).
  CMatrix kraus_apply(std::size_t w, const CMatrix& x) const;
  /// {K_w V} for all words: the channel restricted to the columns of V.
  std::vector<CMatrix> kraus_on(const CMatrix& frame) const;
  /// Σ_w K_w ρ K_w†.
  CMatrix apply(const CMatrix& rho) const;
  /// Σ_w K_w σ^{⊗l} K_w† for a single-site operator σ.
  CMatrix apply_product(const CMatrix& sigma) const;
  /// q X q (identity when no projection is set).
  CMatrix project(const CMatrix& x) const;
  /// Dense Kraus channel; throws GuardExceeded beyond `max_dim`.
  KrausChannel materialize(std::size_t max_dim = 256) const;

 private:
  CMatrix project_rows(const CMatrix& x) const;

  std::vector<CMatrix> site_kraus_;
  std::vector<std::vector<std::size_t>> words_;
  std::size_t l_;
  std::size_t in_total_ = 1;
  std::size_t out_total_ = 1;
  std::optional<std::vector<TypeClass>> types_;
  CMatrix site_basis_;
  std::vector<char> mask_;
};

struct KrausWordCertificate {
  double c_prime = 0.0;
  double entropy_exchange = 0.0;
  double h_prime = 0.0;    // (d²/l) log(l+1), d = input dimension
  double mass = 0.0;       // r^{⊗l}(K)
  double mass_channel = 0.0;  // tr(N_{δ,l}(π_G^{⊗l})) evaluated on the operator
  double mass_bound = 0.0;
  double c_max = 0.0;
  double count = 0.0;      // n_{δ,l}
  double gamma = 0.0;      // configured γ(δ) = -δ log(δ/n)
  double gamma_min = 0.0;  // smallest γ for which item 2 holds here
  double count_bound_log2 = 0.0;
  bool item1 = false;
  bool item2 = false;
};

struct TypicalKrausSet {
  CanonicalKraus canonical;
  TypicalSpec spec;
  KrausWordCertificate certificate;
  WordChannel reduced;
};

/// γ(δ) = -δ log(δ/n) for a Kraus alphabet of size n.
double gamma_delta(double delta, std::size_t n);

/// Typical Kraus words of ch in canonical form relative to π_G, and the
/// reduced operation N_{δ,l}. The operator mass is evaluated when the
/// output space is at most 4096-dimensional.
TypicalKrausSet typical_kraus(const KrausChannel& ch, const DensityOperator& pi_g, std::size_t l, double delta,
                              const TypicalityConstants& constants = {}, const TypicalityGuard& guard = {});

}  // namespace qcomp
