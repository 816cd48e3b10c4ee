#pragma once

#include <cstdint>

#include "randpred/errors.hpp"

namespace randpred {

using Key = std::uint64_t;

/// Key universe [0, 2^bits).
struct UniverseParams {
  unsigned bits = 32;

  /// Number of representable keys, 2^bits.
  [[nodiscard]] Key size() const noexcept { return Key{1} << bits; }
  [[nodiscard]] bool contains(Key y) const noexcept { return y < size(); }
  /// Throws std::invalid_argument unless 1 <= bits <= 63.
  void validate() const;
};

/// Smoothness exponents of f1(n) = n^gamma and f2(n) = n^alpha, the
/// smoothness constant beta, and the upper load constant c_max.
struct SmoothParams {
  double alpha = 0.5;
  double gamma = 1.0;
  double beta = 1.0;
  double c_max = 2.0;

  void validate() const;
};

/// Equal-width partition of the universe into parts addressed by index_bits
/// bits. `target_parts` is the recursive product of part counts (after the
/// universe and closed-form clamps); `num_parts` is the number of parts the
/// rounded-up `part_width` actually produces, so every part id below
/// `num_parts` is hit by some key.
struct PartitionPlan {
  std::uint64_t n = 0;
  unsigned depth = 0;
  std::uint64_t target_parts = 0;
  std::uint64_t num_parts = 0;
  unsigned index_bits = 0;
  Key part_width = 0;
  /// Set when the recursive product reached the universe size.
  bool universe_smaller_than_plan = false;
  /// Set when per-level rounding pushed the product past the closed-form bound.
  bool capped_at_bound = false;
};

/// c_max^(gamma/(1-alpha)) * n^(gamma/(1-alpha)).
[[nodiscard]] double partition_size_bound(std::uint64_t n, const SmoothParams& sp);

/// Recursion depth h: smallest h >= 1 with nu^(alpha^h) <= ln n, nu = c_max * n.
[[nodiscard]] unsigned partition_depth(std::uint64_t n, const SmoothParams& sp);

/// Sizes the partition for a calibration file of n keys. Throws SizingError
/// for n < 16.
[[nodiscard]] PartitionPlan plan_partition(std::uint64_t n, const SmoothParams& sp,
                                           const UniverseParams& u);

/// Same plan with one more index bit (twice as many parts, capped at the
/// universe size). Used to recover from representative collisions.
[[nodiscard]] PartitionPlan widen_plan(const PartitionPlan& plan, const UniverseParams& u);

/// floor(y / part_width). Throws std::domain_error for keys outside u.
[[nodiscard]] std::uint64_t part_index(Key y, const PartitionPlan& plan, const UniverseParams& u);

/// [(q/a)^a ((1-q)/(1-a))^(1-a)]^n evaluated in log space. Throws
/// std::domain_error unless q and a lie strictly inside (0, 1).
[[nodiscard]] double binomial_deviation_bound(double q, double a, std::uint64_t n);
[[nodiscard]] double log_binomial_deviation_bound(double q, double a, std::uint64_t n);

}  // namespace randpred
