#pragma once

// Numerical tolerances shared by every module. Change them here only.
namespace qcomp::tol {

inline constexpr double kHermitian = 1e-10;
inline constexpr double kNegativeClamp = 1e-10;
inline constexpr double kTraceOne = 1e-10;
inline constexpr double kPureNorm = 1e-12;
inline constexpr double kPartialTrace = 1e-12;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kTracePreserving = 1e-9;
inline constexpr double kChoiPsd = 1e-9;
inline constexpr double kPseudoInverse = 1e-12;
inline constexpr double kFidelityRoutes = 1e-10;
inline constexpr double kCoherentInfoRoutes = 1e-8;
inline constexpr double kEntropyExchange = 1e-8;
inline constexpr double kProjector = 1e-10;
inline constexpr double kPovm = 1e-9;
inline constexpr double kDMatrixRoutes = 1e-9;
inline constexpr double kSupportRank = 1e-10;

}  // namespace qcomp::tol
