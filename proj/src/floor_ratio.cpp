#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "qcomp/coding.hpp"
#include "qcomp/errors.hpp"

namespace qcomp {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow_int(const cpp_int& base, std::int64_t e) {
  cpp_int r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= base;
  return r;
}

// ⌊2^{num/den}⌋: the largest x with x^den <= 2^num.
cpp_int floor_pow2(std::int64_t num, std::int64_t den) {
  const cpp_int target = cpp_int(1) << static_cast<unsigned>(num);
  cpp_int lo = cpp_int(1) << static_cast<unsigned>(num / den);  // lo^den <= target
  cpp_int hi = lo * 2 + 1;                                      // hi^den > target
  while (hi - lo > 1) {
    const cpp_int mid = (lo + hi) / 2;
    if (pow_int(mid, den) <= target) lo = mid;
    else hi = mid;
  }
  return lo;
}

void check_rational(const Rational& r, const char* name) {
  if (r.den <= 0 || r.num <= 0) throw InvalidInput(std::string("floor_ratio_check: ") + name + " must be a positive fraction");
}

}  // namespace

FloorRatioResult floor_ratio_check(std::int64_t n, Rational a, Rational b) {
  check_rational(a, "A");
  check_rational(b, "B");
  if (n < 1) throw InvalidInput("floor_ratio_check: n must be positive");
  if (a.num * b.den < b.num * a.den) throw InvalidInput("floor_ratio_check: need A >= B");
  if (n * a.num / a.den > 4096 || a.den > 64 || b.den > 64) throw GuardExceeded("floor_ratio_check: exponent too large");

  const cpp_int x = floor_pow2(n * a.num, a.den);
  const cpp_int y = floor_pow2(n * b.num, b.den);
  const cpp_int q = x / y;
  const cpp_int denom = y * q;
  const cpp_int excess = x - denom;  // value - 1 = excess / denom

  FloorRatioResult res;
  res.value = static_cast<double>(x) / static_cast<double>(denom);
  const double nb = static_cast<double>(n) * b.value();
  res.bound = 1.0 + 3.0 * std::exp2(-nb);
  res.stated_bound = 1.0 - 3.0 * std::exp2(-nb);
  // excess/denom <= 3·2^{-n pB/qB}  <=>  excess^{qB} 2^{n pB} <= (3 denom)^{qB}
  const cpp_int lhs = pow_int(excess, b.den) << static_cast<unsigned>(n * b.num);
  res.holds = lhs <= pow_int(3 * denom, b.den);
  // value >= 1 always, so the stated bound can never hold.
  res.stated_holds = false;
  return res;
}

}  // namespace qcomp
