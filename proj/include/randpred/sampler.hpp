#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randpred/partition.hpp"

namespace randpred {

using Rng = std::mt19937_64;

enum class DistKind { uniform, piecewise, spiky, zipf };

/// A family of test distributions over the universe.
///
/// Textual grammar (CLI `--dist`):
///   uniform
///   piecewise:p0,w0;p1,w1;...   piece j starts at fraction p_j of the
///                               universe and carries weight w_j
///   spiky:k,m[,w]               k evenly spaced spikes of width w keys
///                               (default 1) holding total mass m; the rest
///                               is uniform
///   zipf:s                      Zipf(s) over min(2^bits, 1024) equal cells,
///                               uniform inside each cell
struct DistSpec {
  struct Piece {
    double start = 0.0;  // fraction of the universe
    double weight = 0.0;
  };

  DistKind kind = DistKind::uniform;
  std::vector<Piece> pieces;
  std::uint64_t spikes = 1;
  double spike_mass = 0.0;
  std::uint64_t spike_width = 1;
  double zipf_s = 1.0;

  [[nodiscard]] static DistSpec parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  /// Throws std::invalid_argument when the parameters do not describe a
  /// distribution over u.
  void validate(const UniverseParams& u) const;
};

/// Explicit pmf over a sorted support.
struct DiscreteDist {
  std::vector<Key> support;
  std::vector<double> pmf;

  void validate() const;
};

/// Probability that a key drawn from `spec` is below x, for x in [0, 2^bits].
[[nodiscard]] double spec_cdf(const DistSpec& spec, const UniverseParams& u, Key x);

/// Discretizes `spec` onto `grid` evenly spaced support points; point j
/// carries the mass of [x_j, x_{j+1}). grid must divide into the universe and
/// be at most 2^20.
[[nodiscard]] DiscreteDist materialize(const DistSpec& spec, const UniverseParams& u,
                                       std::uint64_t grid);

/// Draws keys from a DistSpec without materializing it.
class KeySampler {
 public:
  KeySampler(DistSpec spec, UniverseParams u);

  Key operator()(Rng& rng) const;

  [[nodiscard]] const DistSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const UniverseParams& universe() const noexcept { return universe_; }

 private:
  struct Range {
    Key lo = 0;
    Key width = 1;
  };

  DistSpec spec_;
  UniverseParams universe_;
  std::vector<Range> ranges_;
  std::vector<double> weights_;  // cumulative, last entry 1
};

/// Draws a key from an explicit pmf.
[[nodiscard]] Key sample_key(const DiscreteDist& dist, Rng& rng);

/// Picks one of the stored keys uniformly. Throws std::invalid_argument on an
/// empty store.
[[nodiscard]] Key sample_uniform_deletion(std::span<const Key> stored, Rng& rng);

}  // namespace randpred
