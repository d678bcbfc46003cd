#pragma once

// Shared exp implementation used by every kernel backend. The vector backends
// mirror this exact operation sequence with packed intrinsics; any change here
// must be applied there as well or the bitwise-equivalence tests will fail.
//
// Classic Cephes-style rational approximation: split x = n*ln2 + r with
// |r| <= ln2/2 (Cody-Waite two-term reduction), evaluate
// e^r = 1 + 2*r*P(r^2) / (Q(r^2) - r*P(r^2)), scale by 2^n. The 2^n scaling
// uses two bit-built powers 2^(n>>1) * 2^(n-(n>>1)) so n = -1023 (subnormal
// results) works without ldexp.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sdigs::kernels::detail {

inline constexpr double kExpLog2E = 1.4426950408889634073599;
inline constexpr double kExpLn2Hi = 6.93145751953125e-1;
inline constexpr double kExpLn2Lo = 1.42860682030941723212e-6;
inline constexpr double kExpP0 = 1.26177193074810590878e-4;
inline constexpr double kExpP1 = 3.02994407707441961300e-2;
inline constexpr double kExpP2 = 9.99999999999999999910e-1;
inline constexpr double kExpQ0 = 3.00198505138664455042e-6;
inline constexpr double kExpQ1 = 2.52448340349684104192e-3;
inline constexpr double kExpQ2 = 2.27265548208155028766e-1;
inline constexpr double kExpQ3 = 2.00000000000000000005e0;
inline constexpr double kExpOverflow = 709.0;
inline constexpr double kExpUnderflow = -709.0;

inline double pow2i(int32_t e) {
  // 2^e for e in [-1022, 1023]
  return std::bit_cast<double>(static_cast<uint64_t>(e + 1023) << 52);
}

inline double exp_one(double x) {
  if (x != x) return x;  // NaN
  if (x > kExpOverflow) return std::numeric_limits<double>::infinity();
  if (x < kExpUnderflow) return 0.0;
  double nd = std::nearbyint(x * kExpLog2E);
  double r = x - nd * kExpLn2Hi;
  r = r - nd * kExpLn2Lo;
  double rr = r * r;
  double p = kExpP0 * rr + kExpP1;
  p = p * rr + kExpP2;
  p = p * r;
  double q = kExpQ0 * rr + kExpQ1;
  q = q * rr + kExpQ2;
  q = q * rr + kExpQ3;
  double s = p + p;
  double d = q - p;
  double y = s / d + 1.0;
  int32_t n = static_cast<int32_t>(nd);
  int32_t n1 = n >> 1;
  int32_t n2 = n - n1;
  return (y * pow2i(n1)) * pow2i(n2);
}

}  // namespace sdigs::kernels::detail
