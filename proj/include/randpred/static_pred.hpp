#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace randpred {

/// How the static index chooses kappa from the number of indexed keys k.
///   constant  kappa = ceil(delta * log2 k)
///   trilog    kappa = ceil(log2 k / log2 log2 k)
///   linspace  kappa = 1
enum class KappaMode { constant, trilog, linspace };

struct KappaChoice {
  KappaMode mode = KappaMode::constant;
  double delta = 1.0;

  /// Accepts "const:<delta>", "const", "trilog", "linspace".
  [[nodiscard]] static KappaChoice parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] unsigned kappa_for(std::uint64_t keys) const;
};

/// Static predecessor index over distinct keys of a 2^width universe.
///
/// A direct table of k equal-width entries splits [0, largest key]; y lands
/// in entry y / ceil((largest key + 1) / k), or the last entry beyond it. Keys sharing an entry go into a van Emde Boas
/// style subtree over their offsets within the entry, whose width is padded to kappa * 2^d so that halving ends
/// exactly at kappa-bit leaves; a leaf stores the answer for each of its 2^kappa
/// points. Inner nodes find clusters through a hash of the high half and keep
/// a summary over the non-empty high halves. Nodes holding one key answer from
/// their min/max alone. A query reads one table entry and then walks a single
/// root-to-leaf path of its subtree.
class StaticPredIndex {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  static constexpr std::size_t kMaxTableEntries = std::size_t{1} << 28;
  /// space_bits() <= kSpaceConstant * keys * 2^kappa * max(width, 1).
  static constexpr double kSpaceConstant = 8.0;

  StaticPredIndex() = default;
  /// Throws std::invalid_argument for unsorted or duplicate keys, keys that
  /// do not fit in `width` bits, width > 63 or kappa == 0, and
  /// std::length_error when the leaf tables would exceed kMaxTableEntries.
  StaticPredIndex(std::span<const std::uint64_t> sorted_keys, unsigned width, unsigned kappa);

  StaticPredIndex(const StaticPredIndex&) = delete;
  StaticPredIndex& operator=(const StaticPredIndex&) = delete;
  StaticPredIndex(StaticPredIndex&& other) noexcept;
  StaticPredIndex& operator=(StaticPredIndex&& other) noexcept;

  /// Rank of the largest stored key <= y, or npos. When `probes` is given it
  /// receives the number of table entries and nodes visited.
  [[nodiscard]] std::size_t pred(std::uint64_t y, unsigned* probes = nullptr) const;

  [[nodiscard]] std::size_t size() const noexcept { return key_count_; }
  [[nodiscard]] unsigned width() const noexcept { return width_; }
  [[nodiscard]] unsigned kappa() const noexcept { return kappa_; }
  /// Modelled storage: top table, min/max words, hash entries and leaf
  /// tables, each entry charged its minimal bit width.
  [[nodiscard]] std::uint64_t space_bits() const noexcept { return space_bits_; }
  /// Table entries written plus nodes created during construction.
  [[nodiscard]] std::uint64_t build_work() const noexcept { return build_work_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Longest query path, counting the top table as one level.
  [[nodiscard]] unsigned depth() const noexcept { return depth_; }

  /// Cumulative probe tally over all pred() calls on this index.
  [[nodiscard]] std::uint64_t total_probes() const noexcept {
    return total_probes_.load(std::memory_order_relaxed);
  }
  [[nodiscard]] std::uint64_t total_queries() const noexcept {
    return total_queries_.load(std::memory_order_relaxed);
  }
  void reset_tallies() noexcept {
    total_probes_.store(0, std::memory_order_relaxed);
    total_queries_.store(0, std::memory_order_relaxed);
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    unsigned width = 0;
    unsigned low_bits = 0;  // inner nodes only
    bool leaf = false;
    std::uint64_t min_value = 0;
    std::uint64_t max_value = 0;
    std::uint32_t max_payload = 0;
    std::uint32_t summary = kNone;
    std::size_t table_offset = 0;  // leaves only
    std::unordered_map<std::uint64_t, std::uint32_t> clusters;
  };

  std::uint32_t build(std::span<const std::uint64_t> keys, std::span<const std::uint32_t> payload,
                      unsigned width, unsigned level);
  std::uint32_t query(std::uint32_t node, std::uint64_t y, unsigned& probes) const;

  struct TopEntry {
    std::uint32_t subtree = kNone;
    std::uint32_t before = kNone;  // rank of the largest key in an earlier entry
  };

  std::vector<TopEntry> top_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> tables_;
  std::size_t key_count_ = 0;
  unsigned width_ = 0;
  std::uint64_t entry_span_ = 1;
  unsigned rest_bits_ = 0;
  unsigned kappa_ = 1;
  unsigned payload_bits_ = 1;
  unsigned depth_ = 0;
  std::uint64_t space_bits_ = 0;
  std::uint64_t build_work_ = 0;
  mutable std::atomic<std::uint64_t> total_probes_{0};
  mutable std::atomic<std::uint64_t> total_queries_{0};
};

}  // namespace randpred
