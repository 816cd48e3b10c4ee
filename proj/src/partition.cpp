#include "randpred/partition.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace randpred {

namespace {

unsigned ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0u : static_cast<unsigned>(std::bit_width(x - 1));
}

// Fills part_width, num_parts and index_bits from target_parts.
void settle_widths(PartitionPlan& plan, const UniverseParams& u) {
  const Key universe = u.size();
  plan.part_width = (universe - 1) / plan.target_parts + 1;
  plan.num_parts = (universe - 1) / plan.part_width + 1;
  plan.index_bits = ceil_log2(plan.num_parts);
}

}  // namespace

void UniverseParams::validate() const {
  if (bits < 1 || bits > 63) {
    throw std::invalid_argument("universe bit width must be in [1, 63], got " +
                                std::to_string(bits));
  }
}

void SmoothParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(beta >= 1.0)) throw std::invalid_argument("beta must be >= 1");
  if (!(c_max > 1.0)) throw std::invalid_argument("c_max must be > 1");
}

double partition_size_bound(std::uint64_t n, const SmoothParams& sp) {
  const double e = sp.gamma / (1.0 - sp.alpha);
  return std::pow(sp.c_max, e) * std::pow(static_cast<double>(n), e);
}

unsigned partition_depth(std::uint64_t n, const SmoothParams& sp) {
  if (n < 16) {
    throw SizingError("partition sizing needs n >= 16, got " + std::to_string(n));
  }
  const double nu = sp.c_max * static_cast<double>(n);
  const double ratio = std::log(std::log(static_cast<double>(n))) / std::log(nu);
  const double h = std::ceil(std::log(ratio) / std::log(sp.alpha) - 1e-12);
  return h < 1.0 ? 1u : static_cast<unsigned>(h);
}

PartitionPlan plan_partition(std::uint64_t n, const SmoothParams& sp, const UniverseParams& u) {
  sp.validate();
  u.validate();
  PartitionPlan plan;
  plan.n = n;
  plan.depth = partition_depth(n, sp);

  const long double universe = static_cast<long double>(u.size());
  const long double log_nu = std::log(static_cast<long double>(sp.c_max) * n);
  long double product = 1.0L;
  long double level_exponent = sp.gamma;  // alpha^i * gamma
  for (unsigned i = 0; i <= plan.depth && product < universe; ++i) {
    const long double parts = std::exp(level_exponent * log_nu);
    product *= std::ceil(parts * (1.0L - 1e-15L));
    level_exponent *= sp.alpha;
  }

  const long double bound = partition_size_bound(n, sp);
  long double target = product;
  if (target > bound) {
    target = std::floor(bound);
    plan.capped_at_bound = true;
  }
  if (target >= universe) {
    target = universe;
    plan.universe_smaller_than_plan = true;
  }
  plan.target_parts = target < 1.0L ? 1 : static_cast<std::uint64_t>(target);
  settle_widths(plan, u);
  return plan;
}

PartitionPlan widen_plan(const PartitionPlan& plan, const UniverseParams& u) {
  PartitionPlan wider = plan;
  const Key universe = u.size();
  const unsigned bits = plan.index_bits + 1;
  wider.target_parts = bits >= u.bits ? universe : (std::uint64_t{1} << bits);
  wider.universe_smaller_than_plan = wider.target_parts == universe;
  settle_widths(wider, u);
  return wider;
}

std::uint64_t part_index(Key y, const PartitionPlan& plan, const UniverseParams& u) {
  if (!u.contains(y)) {
    throw std::domain_error("key " + std::to_string(y) + " outside universe of " +
                            std::to_string(u.bits) + " bits");
  }
  return y / plan.part_width;
}

double log_binomial_deviation_bound(double q, double a, std::uint64_t n) {
  if (!(q > 0.0 && q < 1.0) || !(a > 0.0 && a < 1.0)) {
    throw std::domain_error("binomial deviation bound needs q, a in (0, 1)");
  }
  const double per_trial = a * std::log(q / a) + (1.0 - a) * std::log((1.0 - q) / (1.0 - a));
  return static_cast<double>(n) * per_trial;
}

double binomial_deviation_bound(double q, double a, std::uint64_t n) {
  return std::exp(log_binomial_deviation_bound(q, a, n));
}

}  // namespace randpred
