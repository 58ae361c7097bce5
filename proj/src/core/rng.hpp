// SPDX-License-Identifier: Apache-2.0
//
// Counter-based splittable RNG. Every draw is a pure function of its key
// material, so replays are independent of call order and thread count.
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ttc::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t head, Rest... rest) {
  return mix(splitmix64(seed ^ (head + kGolden)), rest...);
}

inline std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  // FNV-1a folded through splitmix for avalanche.
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(h);
}

// Uniform in [0, 1), 53-bit resolution.
inline double uniform01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) without modulo bias (n > 0).
inline std::uint64_t bounded(std::uint64_t bits, std::uint64_t n) {
  // Lemire's multiply-shift reduction.
  __uint128_t wide = static_cast<__uint128_t>(bits) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

// Inverse normal CDF (Acklam's rational approximation, |rel err| < 1.2e-9).
// https://en.wikipedia.org/wiki/Normal_distribution#Generating_values_from_normal_distribution
inline double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > 1 - plow) {
    double q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

// Standard normal from one counter value.
inline double gaussian(std::uint64_t bits) {
  double u = uniform01(bits);
  if (u < 1e-12) u = 1e-12;
  if (u > 1.0 - 1e-12) u = 1.0 - 1e-12;
  return inverse_normal_cdf(u);
}

}  // namespace ttc::rng
