#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "randpred/sampler.hpp"

namespace randpred {

/// Window and mass functions f1(n), f2(n) of a smoothness check.
struct SmoothnessFunctions {
  std::function<double(double)> f1;
  std::function<double(double)> f2;

  /// f1(n) = n^gamma, f2(n) = n^alpha.
  [[nodiscard]] static SmoothnessFunctions power(double gamma, double alpha);
};

inline constexpr std::size_t kMaxSmoothnessSupport = 512;

/// Smallest beta with
///   P[c2 - (c3 - c1)/f1(n) <= y < c2 | c1 <= y <= c3] <= beta * f2(n) / n
/// over all support triples c1 < c2 < c3 and all n in n_list. A support point
/// counts toward the window when it lies in the half-open real interval.
/// Triples with zero conditioning mass are skipped. Throws
/// std::invalid_argument when the support exceeds kMaxSmoothnessSupport.
///
/// The serial version is the reference; the default version splits the
/// outer loop across OpenMP threads and must agree with it exactly.
[[nodiscard]] double estimate_beta(const DiscreteDist& dist, const SmoothnessFunctions& f,
                                   std::span<const std::uint64_t> n_list);
[[nodiscard]] double estimate_beta_serial(const DiscreteDist& dist,
                                          const SmoothnessFunctions& f,
                                          std::span<const std::uint64_t> n_list);

[[nodiscard]] inline double estimate_beta(const DiscreteDist& dist, double gamma, double alpha,
                                          std::span<const std::uint64_t> n_list) {
  return estimate_beta(dist, SmoothnessFunctions::power(gamma, alpha), n_list);
}

}  // namespace randpred
