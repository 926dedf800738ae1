#pragma once

#include <algorithm>
#include <cmath>

namespace vpmcf {

/// Double well W(u) = 18 u^2 (u-1)^2 with wells at 0 and 1. The prefactor 18
/// normalizes the associated surface tension: phi(1) = 1.
inline double W(double u) {
  const double a = u * (u - 1.0);
  return 18.0 * a * a;
}

inline double W_prime(double u) { return 36.0 * u * (u - 1.0) * (2.0 * u - 1.0); }

/// Nonnegative branch sqrt(2 W(u)) = 6 |u (u-1)|.
inline double sqrt2W(double u) { return 6.0 * std::abs(u * (u - 1.0)); }

/// phi(s) = int_0^s sqrt(2 W(t)) dt. Closed form 3 s^2 - 2 s^3 on [0,1];
/// outside, the integral of 6 |t(t-1)| keeps phi monotone nondecreasing.
inline double phi(double s) {
  if (s < 0.0) return 2.0 * s * s * s - 3.0 * s * s;        // integrand 6(t^2 - t)
  if (s > 1.0) return 2.0 * s * s * s - 3.0 * s * s + 2.0;  // continues past phi(1)=1
  return s * s * (3.0 - 2.0 * s);
}

/// Equipartition profile q(z) = 1/(1 + exp(-6 z)), solving q' = sqrt(2 W(q))
/// with q(0) = 1/2. Makes the one-dimensional discrepancy
/// eps/2 (u')^2 - W(u)/eps vanish identically for u(x) = q(x/eps).
inline double optimal_profile(double z) {
  if (z > 120.0) return 1.0;   // exponent clamped against overflow
  if (z < -120.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-6.0 * z));
}

}  // namespace vpmcf
