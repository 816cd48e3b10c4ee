#include "randpred/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace randpred {

namespace {

using u128 = unsigned __int128;

Key scale_fraction(double fraction, const UniverseParams& u) {
  const long double x = static_cast<long double>(fraction) * static_cast<long double>(u.size());
  return static_cast<Key>(std::floor(x));
}

Key grid_point(std::uint64_t j, std::uint64_t grid, const UniverseParams& u) {
  return static_cast<Key>((u128{j} * u.size()) / grid);
}

double parse_double(std::string_view s) {
  std::string copy(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(copy, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + copy + "' in distribution");
  }
  if (used != copy.size()) throw std::invalid_argument("bad number '" + copy + "' in distribution");
  return v;
}

std::uint64_t parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad integer '" + std::string(s) + "' in distribution");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Every family is a mixture of uniform ranges.
struct Component {
  Key lo;
  Key width;
  double weight;
};

std::vector<Component> mixture(const DistSpec& spec, const UniverseParams& u) {
  const Key universe = u.size();
  std::vector<Component> parts;
  switch (spec.kind) {
    case DistKind::uniform:
      parts.push_back({0, universe, 1.0});
      break;
    case DistKind::piecewise: {
      double total = 0.0;
      for (const auto& p : spec.pieces) total += p.weight;
      for (std::size_t j = 0; j < spec.pieces.size(); ++j) {
        const Key lo = scale_fraction(spec.pieces[j].start, u);
        const Key hi = j + 1 < spec.pieces.size() ? scale_fraction(spec.pieces[j + 1].start, u)
                                                  : universe;
        parts.push_back({lo, hi - lo, spec.pieces[j].weight / total});
      }
      break;
    }
    case DistKind::spiky: {
      if (spec.spike_mass < 1.0) parts.push_back({0, universe, 1.0 - spec.spike_mass});
      const Key w = spec.spike_width;
      for (std::uint64_t j = 0; j < spec.spikes; ++j) {
        const Key center = static_cast<Key>((u128{2 * j + 1} * universe) / (2 * spec.spikes));
        Key lo = center >= w / 2 ? center - w / 2 : 0;
        lo = std::min(lo, universe - w);
        parts.push_back({lo, w, spec.spike_mass / static_cast<double>(spec.spikes)});
      }
      break;
    }
    case DistKind::zipf: {
      const std::uint64_t cells = std::min<std::uint64_t>(universe, 1024);
      double total = 0.0;
      for (std::uint64_t c = 0; c < cells; ++c) total += std::pow(static_cast<double>(c + 1), -spec.zipf_s);
      for (std::uint64_t c = 0; c < cells; ++c) {
        const Key lo = grid_point(c, cells, u);
        const Key hi = grid_point(c + 1, cells, u);
        parts.push_back({lo, hi - lo, std::pow(static_cast<double>(c + 1), -spec.zipf_s) / total});
      }
      break;
    }
  }
  return parts;
}

}  // namespace

DistSpec DistSpec::parse(std::string_view text) {
  DistSpec spec;
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (name == "uniform") {
    if (!args.empty()) throw std::invalid_argument("uniform takes no parameters");
    spec.kind = DistKind::uniform;
  } else if (name == "piecewise") {
    spec.kind = DistKind::piecewise;
    for (auto piece : split(args, ';')) {
      const auto fields = split(piece, ',');
      if (fields.size() != 2) throw std::invalid_argument("piecewise pieces are 'start,weight'");
      spec.pieces.push_back({parse_double(fields[0]), parse_double(fields[1])});
    }
  } else if (name == "spiky") {
    spec.kind = DistKind::spiky;
    const auto fields = split(args, ',');
    if (fields.size() != 2 && fields.size() != 3) throw std::invalid_argument("spiky takes 'k,m[,w]'");
    spec.spikes = parse_uint(fields[0]);
    spec.spike_mass = parse_double(fields[1]);
    if (fields.size() == 3) spec.spike_width = parse_uint(fields[2]);
  } else if (name == "zipf") {
    spec.kind = DistKind::zipf;
    spec.zipf_s = parse_double(args);
  } else {
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
  }
  return spec;
}

std::string DistSpec::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case DistKind::uniform:
      out << "uniform";
      break;
    case DistKind::piecewise:
      out << "piecewise:";
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        if (j) out << ';';
        out << pieces[j].start << ',' << pieces[j].weight;
      }
      break;
    case DistKind::spiky:
      out << "spiky:" << spikes << ',' << spike_mass;
      if (spike_width != 1) out << ',' << spike_width;
      break;
    case DistKind::zipf:
      out << "zipf:" << zipf_s;
      break;
  }
  return out.str();
}

void DistSpec::validate(const UniverseParams& u) const {
  u.validate();
  switch (kind) {
    case DistKind::uniform:
      break;
    case DistKind::piecewise: {
      if (pieces.empty()) throw std::invalid_argument("piecewise needs at least one piece");
      if (pieces.front().start != 0.0) throw std::invalid_argument("first piece must start at 0");
      double total = 0.0;
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        const auto& p = pieces[j];
        if (!(p.start >= 0.0 && p.start < 1.0)) throw std::invalid_argument("piece start must lie in [0, 1)");
        if (!(p.weight >= 0.0)) throw std::invalid_argument("piece weights must be non-negative");
        if (j > 0 && scale_fraction(p.start, u) <= scale_fraction(pieces[j - 1].start, u)) {
          throw std::invalid_argument("piece starts must be strictly increasing keys");
        }
        total += p.weight;
      }
      if (!(total > 0.0)) throw std::invalid_argument("piecewise weights sum to zero");
      break;
    }
    case DistKind::spiky:
      if (spikes == 0) throw std::invalid_argument("spiky needs at least one spike");
      if (!(spike_mass >= 0.0 && spike_mass <= 1.0)) throw std::invalid_argument("spike mass must lie in [0, 1]");
      if (spike_width == 0 || u128{spike_width} * spikes > u.size()) {
        throw std::invalid_argument("spikes do not fit in the universe");
      }
      break;
    case DistKind::zipf:
      if (!(zipf_s >= 0.0)) throw std::invalid_argument("zipf exponent must be non-negative");
      break;
  }
}

void DiscreteDist::validate() const {
  if (support.size() != pmf.size()) throw std::invalid_argument("support and pmf sizes differ");
  if (support.empty()) throw std::invalid_argument("empty support");
  double total = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (!(pmf[i] >= 0.0)) throw std::invalid_argument("negative probability");
    if (i > 0 && support[i] <= support[i - 1]) throw std::invalid_argument("support not strictly increasing");
    total += pmf[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");
}

double spec_cdf(const DistSpec& spec, const UniverseParams& u, Key x) {
  double mass = 0.0;
  for (const auto& c : mixture(spec, u)) {
    if (x <= c.lo) continue;
    const Key covered = std::min<Key>(x - c.lo, c.width);
    mass += c.weight * (static_cast<double>(covered) / static_cast<double>(c.width));
  }
  return mass;
}

DiscreteDist materialize(const DistSpec& spec, const UniverseParams& u, std::uint64_t grid) {
  spec.validate(u);
  if (grid == 0 || grid > (std::uint64_t{1} << 20) || grid > u.size()) {
    throw std::invalid_argument("grid must lie in [1, min(2^20, universe size)]");
  }
  DiscreteDist dist;
  dist.support.resize(grid);
  dist.pmf.resize(grid);
  double prev = 0.0;
  for (std::uint64_t j = 0; j < grid; ++j) {
    dist.support[j] = grid_point(j, grid, u);
    const double next = j + 1 == grid ? 1.0 : spec_cdf(spec, u, grid_point(j + 1, grid, u));
    dist.pmf[j] = std::max(0.0, next - prev);
    prev = next;
  }
  const double total = std::accumulate(dist.pmf.begin(), dist.pmf.end(), 0.0);
  for (auto& p : dist.pmf) p /= total;
  return dist;
}

KeySampler::KeySampler(DistSpec spec, UniverseParams u) : spec_(std::move(spec)), universe_(u) {
  spec_.validate(universe_);
  double running = 0.0;
  for (const auto& c : mixture(spec_, universe_)) {
    if (c.weight <= 0.0) continue;
    running += c.weight;
    ranges_.push_back({c.lo, c.width});
    weights_.push_back(running);
  }
  for (auto& w : weights_) w /= running;
  weights_.back() = 1.0;
}

Key KeySampler::operator()(Rng& rng) const {
  std::size_t pick = 0;
  if (ranges_.size() > 1) {
    const double r = std::generate_canonical<double, 53>(rng);
    pick = static_cast<std::size_t>(std::upper_bound(weights_.begin(), weights_.end(), r) - weights_.begin());
    pick = std::min(pick, ranges_.size() - 1);
  }
  const Range& range = ranges_[pick];
  if (range.width == 1) return range.lo;
  std::uniform_int_distribution<Key> within(0, range.width - 1);
  return range.lo + within(rng);
}

Key sample_key(const DiscreteDist& dist, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(dist.pmf.begin(), dist.pmf.end());
  return dist.support[pick(rng)];
}

Key sample_uniform_deletion(std::span<const Key> stored, Rng& rng) {
  if (stored.empty()) throw std::invalid_argument("cannot pick a deletion from an empty store");
  std::uniform_int_distribution<std::size_t> pick(0, stored.size() - 1);
  return stored[pick(rng)];
}

}  // namespace randpred
