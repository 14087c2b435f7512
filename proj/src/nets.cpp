#include <algorithm>
#include <cmath>
#include <limits>

#include "qcomp/compound.hpp"
#include "qcomp/errors.hpp"

namespace qcomp {

ParametricFamily ParametricFamily::parse(const std::string& name, double lo, double hi) {
  ParametricFamily f;
  if (name == "phase_flip") f.kind = Kind::PhaseFlip;
  else if (name == "bit_flip") f.kind = Kind::BitFlip;
  else if (name == "depolarizing") f.kind = Kind::Depolarizing;
  else throw InvalidInput("unknown parametric family '" + name + "'");
  f.lo = lo;
  f.hi = hi;
  f.validate();
  return f;
}

std::string ParametricFamily::name() const {
  switch (kind) {
    case Kind::PhaseFlip: return "phase_flip";
    case Kind::BitFlip: return "bit_flip";
    case Kind::Depolarizing: return "depolarizing";
  }
  return "";
}

KrausChannel ParametricFamily::at(double p) const {
  switch (kind) {
    case Kind::PhaseFlip: return KrausChannel::phase_flip(p);
    case Kind::BitFlip: return KrausChannel::bit_flip(p);
    case Kind::Depolarizing: return KrausChannel::depolarizing(p);
  }
  throw InvalidInput("unknown parametric family");
}

double ParametricFamily::lipschitz() const {
  // Λ_p - Λ_q = (p - q)(Λ_1 - Λ_0); the diamond norm of Λ_1 - Λ_0 is 2 for
  // the flip channels and 3/2 for (useless - identity).
  return kind == Kind::Depolarizing ? 1.5 : 2.0;
}

void ParametricFamily::validate() const {
  if (!(lo >= 0.0 && hi <= domain_max() && lo <= hi)) throw InvalidInput("parametric family: need 0 <= lo <= hi <= 1");
}

ChannelFamily ParametricFamily::sample(std::size_t points) const {
  validate();
  ChannelFamily fam;
  const std::size_t n = (lo == hi) ? 1 : std::max<std::size_t>(points, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    fam.members.push_back(at(p));
    fam.labels.push_back(name() + "(" + std::to_string(p) + ")");
  }
  return fam;
}

double net_cardinality_bound(double tau, std::size_t d, std::size_t d_out) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("net_cardinality_bound: need 0 < tau <= 1");
  const double dd = static_cast<double>(d * d_out);
  return 2.0 * dd * dd * std::log2(3.0 / tau);
}

ChannelNet build_adapted_net(const ParametricFamily& family, double tau, const DiamondOptions& diamond) {
  family.validate();
  if (!(tau > 0.0 && tau <= 1.0 / std::exp(1.0))) throw InvalidInput("build_adapted_net: need 0 < tau <= 1/e");
  ChannelNet net;
  net.tau = tau;
  const double lip = family.lipschitz();
  net.step = tau / (4.0 * lip);
  net.covering_radius = lip * net.step / 2.0;
  if (!(net.covering_radius < tau / 2.0)) throw InvalidInput("build_adapted_net: grid too coarse to certify covering");
  const auto cells = static_cast<std::size_t>(std::ceil(family.domain_max() / net.step - 1e-12));
  const KrausChannel useless = KrausChannel::useless(2, 2);
  std::size_t nearest_lo = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c <= cells; ++c) {
    const double g = std::min(family.domain_max(), static_cast<double>(c) * net.step);
    if (std::abs(g - family.lo) < best) {
      best = std::abs(g - family.lo);
      nearest_lo = c;
    }
  }
  for (std::size_t c = 0; c <= cells; ++c) {
    const double g = std::min(family.domain_max(), static_cast<double>(c) * net.step);
    const double gap = g < family.lo ? family.lo - g : (g > family.hi ? g - family.hi : 0.0);
    if (!(gap < net.step / 2.0 || c == nearest_lo)) continue;
    const double nearest = std::clamp(g, family.lo, family.hi);
    const KrausChannel base = family.at(g);
    net.parameters.push_back(g);
    net.distance_lower.push_back(diamond_distance(base, family.at(nearest), diamond).value);
    if (net.distance_lower.back() > lip * std::abs(g - nearest) + 2.0 * diamond.tol + 1e-9) {
      throw InvariantViolation("build_adapted_net: diamond estimate exceeds the analytic modulus");
    }
    net.members.members.push_back(mix(base, useless, tau / 2.0));
    net.members.labels.push_back(family.name() + "(" + std::to_string(g) + ") mixed");
  }
  const double dd = 4.0;
  net.log2_cardinality_bound = 2.0 * dd * dd * std::log2(6.0 / tau);
  if (std::log2(static_cast<double>(net.members.size())) > net.log2_cardinality_bound) {
    throw InvariantViolation("build_adapted_net: cardinality bound violated");
  }
  return net;
}

double adapted_mixing_margin(const ChannelNet& net, std::size_t probes, std::uint64_t seed) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& ch : net.members.members) {
    const double floor = net.tau / (2.0 * static_cast<double>(ch.out_dim()));
    auto check = [&](const CVector& psi) {
      const CMatrix out = apply(ch, DensityOperator::from_pure(psi));
      margin = std::min(margin, hermitian_eigen(out).values.minCoeff() - floor);
    };
    for (std::size_t i = 0; i < ch.in_dim(); ++i) check(basis_ket(ch.in_dim(), i));
    for (std::size_t p = 0; p < probes; ++p) check(haar_state(ch.in_dim(), derive_seed(seed, p)));
  }
  return margin;
}

double tensor_power_fidelity(const DensityOperator& rho, const KrausChannel& ch, std::size_t l,
                             const KrausChannel& recovery) {
  const std::size_t total = checked_power(ch.in_dim(), l, 4096);
  if (rho.dim() != total) throw DimensionMismatch("tensor_power_fidelity: state does not live on H^{⊗l}");
  if (recovery.in_dim() != checked_power(ch.out_dim(), l, 4096) || recovery.out_dim() != total) {
    throw DimensionMismatch("tensor_power_fidelity: recovery must map K^{⊗l} to H^{⊗l}");
  }
  const PureState psi = purify_on_support(rho);
  const std::size_t r = psi.dims.front();
  Dims dims(l + 1, ch.in_dim());
  dims[0] = r;
  CMatrix joint = psi.vec * psi.vec.adjoint();
  for (std::size_t s = 1; s <= l; ++s) {
    joint = apply_local(ch, joint, dims, s);
    dims[s] = ch.out_dim();
  }
  joint = apply_local(recovery, joint, Dims{r, recovery.in_dim()}, 1);
  return std::real(psi.vec.dot(joint * psi.vec));
}

ApproximationReport approximation_check(const KrausChannel& n, const KrausChannel& ni, double analytic,
                                        const DensityOperator& rho, std::size_t l, const KrausChannel& recovery,
                                        double tau, const DiamondOptions& diamond) {
  if (n.in_dim() != ni.in_dim() || n.out_dim() != ni.out_dim()) throw DimensionMismatch("approximation_check");
  ApproximationReport rep;
  rep.l = l;
  rep.tau = tau;
  rep.diamond_analytic = analytic;
  rep.diamond_lower = diamond_distance(n, ni, diamond).value;
  rep.diamond_consistent = rep.diamond_lower <= analytic + 2.0 * diamond.tol + 1e-9;
  const double limit = static_cast<double>(l) * tau;
  rep.diamond_ok = true;
  std::size_t in_total = 1;
  for (std::size_t s = 0; s < l; ++s) in_total *= n.in_dim();
  if (in_total <= 4) {
    const KrausChannel a = tensor_power(n, l);
    const KrausChannel b = tensor_power(ni, l);
    rep.diamond_lower_l = diamond_distance(a, b, diamond).value;
    rep.diamond_ok = rep.diamond_lower_l < limit;
  }
  rep.fidelity_gap =
      std::abs(tensor_power_fidelity(rho, n, l, recovery) - tensor_power_fidelity(rho, ni, l, recovery));
  rep.fidelity_ok = rep.fidelity_gap < limit;
  return rep;
}

double min_coherent_information(const DensityOperator& rho, const ChannelFamily& family) {
  if (family.members.empty()) throw InvalidInput("min_coherent_information: empty family");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ch : family.members) best = std::min(best, coherent_information(rho, ch));
  return best;
}

IcShiftReport ic_shift_check(const DensityOperator& rho, const ChannelFamily& family, const ChannelNet& net) {
  IcShiftReport rep;
  rep.family_value = min_coherent_information(rho, family);
  rep.net_value = min_coherent_information(rho, net.members);
  rep.shift = std::abs(rep.family_value - rep.net_value);
  const double tau = net.tau;
  rep.bound = tau + 2.0 * tau * std::log2(static_cast<double>(rho.dim()) / tau);
  rep.holds = rep.shift <= rep.bound;
  return rep;
}

}  // namespace qcomp
