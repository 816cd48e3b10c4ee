#include "randpred/static_pred.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace randpred {

KappaChoice KappaChoice::parse(std::string_view text) {
  KappaChoice choice;
  if (text == "trilog") {
    choice.mode = KappaMode::trilog;
  } else if (text == "linspace") {
    choice.mode = KappaMode::linspace;
  } else if (text == "const") {
    choice.mode = KappaMode::constant;
  } else if (text.starts_with("const:")) {
    choice.mode = KappaMode::constant;
    const std::string value(text.substr(6));
    std::size_t used = 0;
    try {
      choice.delta = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || !(choice.delta > 0.0)) {
      throw std::invalid_argument("const kappa mode needs a positive delta, got '" + value + "'");
    }
  } else {
    throw std::invalid_argument("unknown kappa mode '" + std::string(text) + "'");
  }
  return choice;
}

std::string KappaChoice::to_string() const {
  switch (mode) {
    case KappaMode::constant: {
      std::string d = std::to_string(delta);
      d.erase(d.find_last_not_of('0') + 1);
      if (d.back() == '.') d.pop_back();
      return "const:" + d;
    }
    case KappaMode::trilog:
      return "trilog";
    case KappaMode::linspace:
      return "linspace";
  }
  return "?";
}

unsigned KappaChoice::kappa_for(std::uint64_t keys) const {
  const double lg = keys > 1 ? std::log2(static_cast<double>(keys)) : 0.0;
  double kappa = 1.0;
  switch (mode) {
    case KappaMode::constant:
      kappa = std::ceil(delta * lg);
      break;
    case KappaMode::trilog:
      kappa = lg > 2.0 ? std::ceil(lg / std::log2(lg)) : 1.0;
      break;
    case KappaMode::linspace:
      kappa = 1.0;
      break;
  }
  return kappa < 1.0 ? 1u : static_cast<unsigned>(kappa);
}

StaticPredIndex::StaticPredIndex(std::span<const std::uint64_t> sorted_keys, unsigned width,
                                 unsigned kappa)
    : key_count_(sorted_keys.size()), width_(width), kappa_(kappa) {
  if (width > 63) throw std::invalid_argument("static index width must be <= 63 bits");
  if (kappa == 0) throw std::invalid_argument("kappa must be positive");
  if (sorted_keys.size() >= kNone) throw std::invalid_argument("too many keys for a static index");
  for (std::size_t i = 0; i < sorted_keys.size(); ++i) {
    if (sorted_keys[i] >> width) throw std::invalid_argument("key does not fit in the index width");
    if (i > 0 && sorted_keys[i] <= sorted_keys[i - 1]) {
      throw std::invalid_argument("static index keys must be sorted and distinct");
    }
  }
  if (sorted_keys.empty()) return;

  payload_bits_ = static_cast<unsigned>(std::bit_width(sorted_keys.size()));
  const std::uint64_t extent = sorted_keys.back() + 1;
  entry_span_ = (extent + sorted_keys.size() - 1) / sorted_keys.size();
  rest_bits_ = static_cast<unsigned>(std::bit_width(entry_span_ - 1));
  unsigned padded = rest_bits_;
  if (rest_bits_ > kappa_) {
    padded = kappa_;
    while (padded < rest_bits_) padded *= 2;
  }

  std::vector<std::uint32_t> ranks(sorted_keys.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<std::uint32_t>(i);
  top_.resize((extent + entry_span_ - 1) / entry_span_);
  build_work_ += top_.size();
  std::vector<std::uint64_t> lows;
  std::size_t begin = 0;
  std::uint32_t before = kNone;
  std::uint64_t next_entry = 0;
  unsigned subtree_depth = 0;
  while (begin < sorted_keys.size()) {
    const std::uint64_t entry = sorted_keys[begin] / entry_span_;
    for (; next_entry <= entry; ++next_entry) top_[next_entry].before = before;
    std::size_t end = begin;
    lows.clear();
    while (end < sorted_keys.size() && sorted_keys[end] / entry_span_ == entry) {
      lows.push_back(sorted_keys[end++] - entry * entry_span_);
    }
    const unsigned depth_before = depth_;
    depth_ = 0;
    top_[entry].subtree = build(lows, std::span<const std::uint32_t>(ranks).subspan(begin, end - begin), padded, 1);
    subtree_depth = std::max(subtree_depth, depth_);
    depth_ = depth_before;
    before = ranks[end - 1];
    begin = end;
  }
  depth_ = 1 + subtree_depth;

  const auto pointer_bits = static_cast<std::uint64_t>(std::bit_width(nodes_.size()));
  std::uint64_t pointers = top_.size();
  for (const auto& node : nodes_) pointers += node.clusters.size() + (node.summary == kNone ? 0 : 1);
  space_bits_ += top_.size() * static_cast<std::uint64_t>(payload_bits_) + pointers * pointer_bits;
}

StaticPredIndex::StaticPredIndex(StaticPredIndex&& other) noexcept { *this = std::move(other); }

StaticPredIndex& StaticPredIndex::operator=(StaticPredIndex&& other) noexcept {
  if (this == &other) return *this;
  top_ = std::move(other.top_);
  nodes_ = std::move(other.nodes_);
  tables_ = std::move(other.tables_);
  key_count_ = std::exchange(other.key_count_, 0);
  width_ = other.width_;
  entry_span_ = other.entry_span_;
  rest_bits_ = other.rest_bits_;
  kappa_ = other.kappa_;
  payload_bits_ = other.payload_bits_;
  depth_ = other.depth_;
  space_bits_ = other.space_bits_;
  build_work_ = other.build_work_;
  total_probes_.store(other.total_probes_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  total_queries_.store(other.total_queries_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

std::uint32_t StaticPredIndex::build(std::span<const std::uint64_t> keys,
                                     std::span<const std::uint32_t> payload, unsigned width,
                                     unsigned level) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  ++build_work_;
  depth_ = std::max(depth_, level);
  {
    Node& node = nodes_.back();
    node.width = width;
    node.min_value = keys.front();
    node.max_value = keys.back();
    node.max_payload = payload.back();
  }
  space_bits_ += 2ull * width + payload_bits_;
  if (keys.size() == 1) return id;

  if (width <= kappa_) {
    const std::uint64_t points = std::uint64_t{1} << width;
    const std::size_t offset = tables_.size();
    if (offset + points > kMaxTableEntries) throw std::length_error("static index leaf tables too large");
    tables_.resize(offset + points, kNone);
    for (std::size_t j = 0; j < keys.size(); ++j) {
      const std::uint64_t end = j + 1 < keys.size() ? keys[j + 1] : points;
      std::fill(tables_.begin() + static_cast<std::ptrdiff_t>(offset + keys[j]),
                tables_.begin() + static_cast<std::ptrdiff_t>(offset + end), payload[j]);
    }
    nodes_[id].leaf = true;
    nodes_[id].table_offset = offset;
    space_bits_ += points * payload_bits_;
    build_work_ += points;
    return id;
  }

  const unsigned low_bits = width / 2;
  const unsigned high_bits = width - low_bits;
  const std::uint64_t low_mask = (std::uint64_t{1} << low_bits) - 1;

  std::vector<std::uint64_t> highs;
  std::vector<std::uint32_t> high_payload;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> children;
  std::vector<std::uint64_t> lows;
  std::size_t begin = 0;
  while (begin < keys.size()) {
    const std::uint64_t high = keys[begin] >> low_bits;
    std::size_t end = begin;
    lows.clear();
    while (end < keys.size() && (keys[end] >> low_bits) == high) lows.push_back(keys[end++] & low_mask);
    children.emplace_back(high, build(lows, payload.subspan(begin, end - begin), low_bits, level + 1));
    highs.push_back(high);
    high_payload.push_back(payload[end - 1]);
    begin = end;
  }
  const std::uint32_t summary = build(highs, high_payload, high_bits, level + 1);

  Node& node = nodes_[id];
  node.low_bits = low_bits;
  node.summary = summary;
  node.clusters.reserve(children.size());
  for (const auto& [high, child] : children) node.clusters.emplace(high, child);
  space_bits_ += children.size() * static_cast<std::uint64_t>(high_bits);
  return id;
}

std::uint32_t StaticPredIndex::query(std::uint32_t id, std::uint64_t y, unsigned& probes) const {
  while (true) {
    ++probes;
    const Node& node = nodes_[id];
    if (node.leaf) return tables_[node.table_offset + y];
    if (y < node.min_value) return kNone;
    if (y >= node.max_value) return node.max_payload;
    const std::uint64_t high = y >> node.low_bits;
    const std::uint64_t low = y & ((std::uint64_t{1} << node.low_bits) - 1);
    const auto it = node.clusters.find(high);
    if (it != node.clusters.end() && low >= nodes_[it->second].min_value) {
      id = it->second;
      y = low;
    } else {
      // y >= min, so a smaller non-empty cluster exists.
      id = node.summary;
      y = high - 1;
    }
  }
}

std::size_t StaticPredIndex::pred(std::uint64_t y, unsigned* probes) const {
  if (key_count_ == 0) return npos;
  if (width_ < 64 && (y >> width_) != 0) throw std::out_of_range("query outside the index universe");
  unsigned visited = 1;
  std::uint32_t payload = static_cast<std::uint32_t>(key_count_ - 1);
  const std::uint64_t at = y / entry_span_;
  if (at < top_.size()) {
    const TopEntry& entry = top_[at];
    payload = entry.before;
    if (entry.subtree != kNone) {
      const std::uint32_t found = query(entry.subtree, y - at * entry_span_, visited);
      if (found != kNone) payload = found;
    }
  }
  total_probes_.fetch_add(visited, std::memory_order_relaxed);
  total_queries_.fetch_add(1, std::memory_order_relaxed);
  if (probes != nullptr) *probes = visited;
  return payload == kNone ? npos : payload;
}

}  // namespace randpred
