#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randpred/engine.hpp"
#include "randpred/sampler.hpp"

namespace randpred {

/// Relative weights of insert, delete, predecessor and member operations.
struct OpMix {
  double insert = 1.0;
  double erase = 1.0;
  double pred = 1.0;
  double member = 1.0;

  /// Parses "i:d:p:m".
  [[nodiscard]] static OpMix parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
};

enum class OpKind : char { insert = 'I', erase = 'D', pred = 'P', member = 'M' };

struct Op {
  OpKind kind;
  Key key;
  friend bool operator==(const Op&, const Op&) = default;
};

/// Replayable operation sequence.
///
/// File format: one operation per line, `I <key>`, `D <key>`, `P <key>` or
/// `M <key>` with the key in decimal. Lines starting with '#' are comments;
/// the writer puts the generation metadata there.
struct Workload {
  std::vector<Op> ops;
  std::uint64_t seed = 0;
  std::string dist;
  std::uint64_t n = 0;
  double c_min = 1.0;
  double c_max = 2.0;

  void write(std::ostream& out) const;
  /// Throws std::invalid_argument on a malformed line.
  [[nodiscard]] static Workload read(std::istream& in);
};

struct WorkloadParams {
  std::uint64_t length = 0;
  OpMix mix;
  std::uint64_t n = 0;
  double c_min = 1.0;
  double c_max = 2.0;
  std::uint64_t seed = 1;
};

/// Generates `params.length` operations starting from the stored set
/// `initial`. Inserts are fresh draws from `inserts` (an insert that finds no
/// fresh key in 64 draws becomes a predecessor query), deletes pick a stored
/// key uniformly, and updates that would leave [c_min n, c_max n) switch to
/// the opposite update. Throws std::invalid_argument when the mix cannot
/// respect the band.
[[nodiscard]] Workload gen_workload(const WorkloadParams& params, std::span<const Key> initial,
                                    const KeySampler& inserts);

struct RunOptions {
  bool check_invariants = false;
  bool measure_latency = false;
  std::size_t max_reported_mismatches = 8;
};

struct LatencySummary {
  double p50_ns = 0.0;
  double p90_ns = 0.0;
  double p99_ns = 0.0;
  double mean_ns = 0.0;
};

struct StatsReport {
  std::uint64_t ops = 0;
  std::uint64_t inserts = 0;
  std::uint64_t erases = 0;
  std::uint64_t preds = 0;
  std::uint64_t members = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t refused = 0;  // band refusals, mirrored by the oracle
  std::vector<std::string> mismatch_examples;

  std::uint64_t max_load_seen = 0;
  std::uint64_t min_load_seen = 0;
  std::map<std::uint32_t, std::uint64_t> load_histogram;  // final load -> buckets
  std::map<unsigned, std::uint64_t> probe_histogram;      // static probes -> queries
  double mean_probes = 0.0;

  EngineStats engine;
  std::optional<LatencySummary> latency;
};

/// Replays `workload` against `engine` and a sorted-list oracle seeded with
/// the engine's current contents.
[[nodiscard]] StatsReport run(Engine& engine, const Workload& workload, const RunOptions& options = {});

/// One (config, distributions, workload shape) experiment, repeated per seed.
struct TrialSpec {
  EngineConfig cfg;
  DistSpec calibration_dist;
  DistSpec operation_dist;
  std::uint64_t ops = 0;
  OpMix mix;
  RunOptions options;
};

struct TrialResult {
  std::uint64_t seed = 0;
  StatsReport report;
  std::string error;  // non-empty when the trial could not run
};

/// Builds the engine from the calibration distribution with the trial seed,
/// generates the workload and replays it. Exceptions become TrialResult::error.
[[nodiscard]] TrialResult run_trial(const TrialSpec& spec, std::uint64_t seed);

/// Runs one trial per seed. The serial version is the reference; the default
/// version spreads trials over OpenMP threads and returns identical results
/// in seed order.
[[nodiscard]] std::vector<TrialResult> run_trials(const TrialSpec& spec, std::span<const std::uint64_t> seeds);
[[nodiscard]] std::vector<TrialResult> run_trials_serial(const TrialSpec& spec,
                                                         std::span<const std::uint64_t> seeds);

/// Derives the engine key source for a trial seed.
[[nodiscard]] KeySource make_source(const KeySampler& sampler, std::uint64_t seed);

struct ProbeRow {
  std::uint64_t n = 0;
  std::string mode;
  unsigned kappa = 0;
  std::uint64_t seed = 0;
  std::uint64_t keys = 0;
  unsigned index_bits = 0;
  double mean_probes = 0.0;
  std::uint64_t max_load = 0;
  std::uint64_t min_load = 0;
  std::uint64_t space_bits = 0;
  std::string error;
};

/// Builds one engine per (n, mode, seed) and averages static probes over
/// `queries` keys drawn from `dist`.
[[nodiscard]] std::vector<ProbeRow> probe_sweep(const EngineConfig& base, const DistSpec& dist,
                                                std::span<const std::uint64_t> ns,
                                                std::span<const KappaChoice> modes,
                                                std::span<const std::uint64_t> seeds,
                                                std::uint64_t queries);

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows);
void write_loads_csv(std::ostream& out, const TrialSpec& spec, std::span<const TrialResult> results);
void write_verify_csv(std::ostream& out, const TrialSpec& spec, std::span<const TrialResult> results);

}  // namespace randpred
