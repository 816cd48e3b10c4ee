#include "randpred/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "randpred/errors.hpp"
#include "randpred/oracle.hpp"

namespace randpred {

namespace {

constexpr unsigned kFreshKeyAttempts = 64;

Rng seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

// Stored-key mirror with O(1) uniform sampling and removal.
class StoredMirror {
 public:
  explicit StoredMirror(std::span<const Key> initial) : keys_(initial.begin(), initial.end()) {
    position_.reserve(keys_.size() * 2);
    for (std::size_t i = 0; i < keys_.size(); ++i) position_.emplace(keys_[i], i);
  }
  [[nodiscard]] bool contains(Key k) const { return position_.contains(k); }
  [[nodiscard]] std::size_t size() const { return keys_.size(); }
  [[nodiscard]] std::span<const Key> keys() const { return keys_; }
  void add(Key k) {
    position_.emplace(k, keys_.size());
    keys_.push_back(k);
  }
  void remove(Key k) {
    const auto it = position_.find(k);
    const std::size_t at = it->second;
    position_.erase(it);
    if (at + 1 != keys_.size()) {
      keys_[at] = keys_.back();
      position_[keys_[at]] = at;
    }
    keys_.pop_back();
  }

 private:
  std::vector<Key> keys_;
  std::unordered_map<Key, std::size_t> position_;
};

bool insert_allowed(std::size_t size, std::uint64_t n, double c_max) {
  return static_cast<double>(size + 1) < c_max * static_cast<double>(n);
}

bool erase_allowed(std::size_t size, std::uint64_t n, double c_min) {
  return size > 0 && static_cast<double>(size - 1) >= c_min * static_cast<double>(n);
}

std::string describe(const std::optional<Key>& k) { return k ? std::to_string(*k) : "none"; }

double percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto at = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[at];
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

}  // namespace

OpMix OpMix::parse(std::string_view text) {
  OpMix mix;
  double* fields[] = {&mix.insert, &mix.erase, &mix.pred, &mix.member};
  std::size_t start = 0;
  for (int f = 0; f < 4; ++f) {
    const auto colon = text.find(':', start);
    if ((f < 3) == (colon == std::string_view::npos)) throw std::invalid_argument("mix must be 'i:d:p:m'");
    const std::string part(text.substr(start, f < 3 ? colon - start : std::string_view::npos));
    std::size_t used = 0;
    try {
      *fields[f] = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !(*fields[f] >= 0.0)) {
      throw std::invalid_argument("bad mix weight '" + part + "'");
    }
    start = colon + 1;
  }
  if (mix.insert + mix.erase + mix.pred + mix.member <= 0.0) {
    throw std::invalid_argument("mix weights sum to zero");
  }
  return mix;
}

std::string OpMix::to_string() const {
  std::ostringstream out;
  out << insert << ':' << erase << ':' << pred << ':' << member;
  return out.str();
}

void Workload::write(std::ostream& out) const {
  out << "# randpred workload seed=" << seed << " dist=" << dist << " n=" << n << " band=" << c_min << ':'
      << c_max << " ops=" << ops.size() << '\n';
  for (const Op& op : ops) out << static_cast<char>(op.kind) << ' ' << op.key << '\n';
}

Workload Workload::read(std::istream& in) {
  Workload w;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto bad = [&] { return std::invalid_argument("workload line " + std::to_string(line_no) + ": '" + line + "'"); };
    if (line.size() < 3 || line[1] != ' ') throw bad();
    Op op{};
    switch (line[0]) {
      case 'I': op.kind = OpKind::insert; break;
      case 'D': op.kind = OpKind::erase; break;
      case 'P': op.kind = OpKind::pred; break;
      case 'M': op.kind = OpKind::member; break;
      default: throw bad();
    }
    const std::string digits = line.substr(2);
    if (digits.find_first_not_of("0123456789") != std::string::npos) throw bad();
    try {
      op.key = std::stoull(digits);
    } catch (const std::exception&) {
      throw bad();
    }
    w.ops.push_back(op);
  }
  return w;
}

Workload gen_workload(const WorkloadParams& params, std::span<const Key> initial, const KeySampler& inserts) {
  const OpMix& mix = params.mix;
  const double total = mix.insert + mix.erase + mix.pred + mix.member;
  if (!(total > 0.0)) throw std::invalid_argument("mix weights sum to zero");
  const double n = static_cast<double>(params.n);
  if (static_cast<double>(initial.size()) < params.c_min * n ||
      static_cast<double>(initial.size()) >= params.c_max * n) {
    throw std::invalid_argument("initial store lies outside the load band");
  }
  const double cut_insert = mix.insert / total;
  const double cut_erase = cut_insert + mix.erase / total;
  const double cut_pred = cut_erase + mix.pred / total;

  Workload w;
  w.seed = params.seed;
  w.dist = inserts.spec().to_string();
  w.n = params.n;
  w.c_min = params.c_min;
  w.c_max = params.c_max;
  w.ops.reserve(params.length);

  Rng rng = seeded_rng(params.seed, 0x3017);
  StoredMirror stored(initial);
  for (std::uint64_t t = 0; t < params.length; ++t) {
    const double r = std::generate_canonical<double, 53>(rng);
    OpKind kind = r < cut_insert ? OpKind::insert
                  : r < cut_erase ? OpKind::erase
                  : r < cut_pred  ? OpKind::pred
                                  : OpKind::member;
    if (kind == OpKind::insert && !insert_allowed(stored.size(), params.n, params.c_max)) {
      if (mix.erase <= 0.0) throw std::invalid_argument("infeasible mix: inserts hit c_max * n with no deletes");
      kind = OpKind::erase;
    } else if (kind == OpKind::erase && !erase_allowed(stored.size(), params.n, params.c_min)) {
      if (mix.insert <= 0.0) throw std::invalid_argument("infeasible mix: deletes hit c_min * n with no inserts");
      kind = OpKind::insert;
    }

    switch (kind) {
      case OpKind::insert: {
        Key k = inserts(rng);
        unsigned attempts = 1;
        while (stored.contains(k) && attempts < kFreshKeyAttempts) {
          k = inserts(rng);
          ++attempts;
        }
        if (stored.contains(k)) {
          w.ops.push_back({OpKind::pred, k});
        } else {
          stored.add(k);
          w.ops.push_back({OpKind::insert, k});
        }
        break;
      }
      case OpKind::erase: {
        const Key k = sample_uniform_deletion(stored.keys(), rng);
        stored.remove(k);
        w.ops.push_back({OpKind::erase, k});
        break;
      }
      case OpKind::pred:
        w.ops.push_back({OpKind::pred, inserts(rng)});
        break;
      case OpKind::member: {
        const bool hit = stored.size() > 0 && (rng() & 1) != 0;
        w.ops.push_back({OpKind::member, hit ? sample_uniform_deletion(stored.keys(), rng) : inserts(rng)});
        break;
      }
    }
  }
  return w;
}

StatsReport run(Engine& engine, const Workload& workload, const RunOptions& options) {
  enum class Outcome { ok, duplicate, absent, band };
  auto outcome_name = [](Outcome o) {
    switch (o) {
      case Outcome::ok: return "ok";
      case Outcome::duplicate: return "duplicate";
      case Outcome::absent: return "absent";
      case Outcome::band: return "band";
    }
    return "?";
  };

  const EngineConfig& cfg = engine.config();
  OracleSet oracle(engine.stored_keys());
  const auto reps = engine.representatives();
  auto bucket_of = [&](Key k) {
    return static_cast<std::size_t>(std::upper_bound(reps.begin(), reps.end(), k) - reps.begin()) - 1;
  };

  StatsReport report;
  const auto loads = engine.loads();
  report.max_load_seen = *std::max_element(loads.begin(), loads.end());
  report.min_load_seen = *std::min_element(loads.begin(), loads.end());

  std::vector<double> latencies;
  if (options.measure_latency) latencies.reserve(workload.ops.size());
  std::uint64_t probe_sum = 0;

  auto mismatch = [&](std::size_t at, const Op& op, const std::string& engine_side, const std::string& oracle_side) {
    ++report.mismatches;
    if (report.mismatch_examples.size() < options.max_reported_mismatches) {
      std::ostringstream msg;
      msg << "op " << at << " " << static_cast<char>(op.kind) << ' ' << op.key << ": engine " << engine_side
          << ", oracle " << oracle_side;
      report.mismatch_examples.push_back(msg.str());
    }
  };

  for (std::size_t at = 0; at < workload.ops.size(); ++at) {
    const Op& op = workload.ops[at];
    ++report.ops;
    if (!cfg.universe.contains(op.key)) throw std::invalid_argument("workload key outside the universe");
    const auto start = std::chrono::steady_clock::now();
    switch (op.kind) {
      case OpKind::insert: {
        ++report.inserts;
        Outcome got = Outcome::ok;
        try {
          engine.insert(op.key);
        } catch (const DuplicateKey&) {
          got = Outcome::duplicate;
        } catch (const BandViolation&) {
          got = Outcome::band;
        }
        Outcome want = Outcome::ok;
        if (oracle.contains(op.key)) {
          want = Outcome::duplicate;
        } else if (!insert_allowed(oracle.size(), cfg.n, cfg.smooth.c_max)) {
          want = Outcome::band;
        } else {
          oracle.insert(op.key);
        }
        if (got != want) mismatch(at, op, outcome_name(got), outcome_name(want));
        if (got == Outcome::band) ++report.refused;
        if (got == Outcome::ok) {
          report.max_load_seen = std::max<std::uint64_t>(report.max_load_seen, loads[bucket_of(op.key)]);
        }
        break;
      }
      case OpKind::erase: {
        ++report.erases;
        Outcome got = Outcome::ok;
        try {
          engine.erase(op.key);
        } catch (const AbsentKey&) {
          got = Outcome::absent;
        } catch (const BandViolation&) {
          got = Outcome::band;
        }
        Outcome want = Outcome::ok;
        if (!oracle.contains(op.key)) {
          want = Outcome::absent;
        } else if (!erase_allowed(oracle.size(), cfg.n, cfg.c_min)) {
          want = Outcome::band;
        } else {
          oracle.erase(op.key);
        }
        if (got != want) mismatch(at, op, outcome_name(got), outcome_name(want));
        if (got == Outcome::band) ++report.refused;
        if (got == Outcome::ok) {
          report.min_load_seen = std::min<std::uint64_t>(report.min_load_seen, loads[bucket_of(op.key)]);
        }
        break;
      }
      case OpKind::pred: {
        ++report.preds;
        const std::uint64_t before = engine.index().total_probes();
        const auto got = engine.pred(op.key);
        const auto probes = static_cast<unsigned>(engine.index().total_probes() - before);
        ++report.probe_histogram[probes];
        probe_sum += probes;
        const auto want = oracle.pred(op.key);
        if (got != want) mismatch(at, op, describe(got), describe(want));
        break;
      }
      case OpKind::member: {
        ++report.members;
        const bool got = engine.member(op.key);
        const bool want = oracle.contains(op.key);
        if (got != want) mismatch(at, op, got ? "true" : "false", want ? "true" : "false");
        break;
      }
    }
    if (options.measure_latency) {
      latencies.push_back(
          std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - start).count());
    }
    if (options.check_invariants) engine.check_invariants();
  }

  if (engine.size() != oracle.size()) {
    mismatch(workload.ops.size(), Op{OpKind::member, 0}, "size " + std::to_string(engine.size()),
             "size " + std::to_string(oracle.size()));
  }
  for (std::uint32_t load : engine.loads()) ++report.load_histogram[load];
  report.mean_probes = report.preds ? static_cast<double>(probe_sum) / static_cast<double>(report.preds) : 0.0;
  report.engine = engine.stats();
  if (options.measure_latency && !latencies.empty()) {
    LatencySummary lat;
    double sum = 0.0;
    for (double v : latencies) sum += v;
    lat.mean_ns = sum / static_cast<double>(latencies.size());
    std::sort(latencies.begin(), latencies.end());
    lat.p50_ns = percentile(latencies, 0.50);
    lat.p90_ns = percentile(latencies, 0.90);
    lat.p99_ns = percentile(latencies, 0.99);
    report.latency = lat;
  }
  return report;
}

KeySource make_source(const KeySampler& sampler, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seeded_rng(seed, 0x5eed));
  return [sampler, rng]() { return sampler(*rng); };
}

TrialResult run_trial(const TrialSpec& spec, std::uint64_t seed) {
  TrialResult result;
  result.seed = seed;
  try {
    EngineConfig cfg = spec.cfg;
    cfg.seed = seed;
    const KeySampler calibration(spec.calibration_dist, cfg.universe);
    const KeySampler operations(spec.operation_dist, cfg.universe);
    Engine engine = Engine::preprocess(cfg, make_source(calibration, seed));
    WorkloadParams params;
    params.length = spec.ops;
    params.mix = spec.mix;
    params.n = cfg.n;
    params.c_min = cfg.c_min;
    params.c_max = cfg.smooth.c_max;
    params.seed = seed;
    const Workload workload = gen_workload(params, engine.stored_keys(), operations);
    result.report = run(engine, workload, spec.options);
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

std::vector<TrialResult> run_trials_serial(const TrialSpec& spec, std::span<const std::uint64_t> seeds) {
  std::vector<TrialResult> results;
  results.reserve(seeds.size());
  for (std::uint64_t seed : seeds) results.push_back(run_trial(spec, seed));
  return results;
}

std::vector<TrialResult> run_trials(const TrialSpec& spec, std::span<const std::uint64_t> seeds) {
  std::vector<TrialResult> results(seeds.size());
  const auto count = static_cast<std::ptrdiff_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    results[static_cast<std::size_t>(i)] = run_trial(spec, seeds[static_cast<std::size_t>(i)]);
  }
  return results;
}

std::vector<ProbeRow> probe_sweep(const EngineConfig& base, const DistSpec& dist, std::span<const std::uint64_t> ns,
                                  std::span<const KappaChoice> modes, std::span<const std::uint64_t> seeds,
                                  std::uint64_t queries) {
  struct Cell {
    std::uint64_t n;
    KappaChoice mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::uint64_t n : ns) {
    for (const auto& mode : modes) {
      for (std::uint64_t seed : seeds) cells.push_back({n, mode, seed});
    }
  }
  std::vector<ProbeRow> rows(cells.size());
  const auto count = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < count; ++c) {
    const Cell& cell = cells[static_cast<std::size_t>(c)];
    ProbeRow& row = rows[static_cast<std::size_t>(c)];
    row.n = cell.n;
    row.mode = cell.mode.to_string();
    row.seed = cell.seed;
    try {
      EngineConfig cfg = base;
      cfg.n = cell.n;
      cfg.kappa = cell.mode;
      cfg.seed = cell.seed;
      const KeySampler sampler(dist, cfg.universe);
      const Engine engine = Engine::preprocess(cfg, make_source(sampler, cell.seed));
      Rng rng = seeded_rng(cell.seed, 0x9e3779b9);
      std::uint64_t total = 0;
      for (std::uint64_t q = 0; q < queries; ++q) {
        unsigned probes = 0;
        (void)engine.find_bucket(sampler(rng), &probes);
        total += probes;
      }
      const EngineStats stats = engine.stats();
      row.kappa = stats.kappa;
      row.keys = engine.index().size();
      row.index_bits = stats.index_bits;
      row.mean_probes = queries ? static_cast<double>(total) / static_cast<double>(queries) : 0.0;
      row.max_load = stats.max_load;
      row.min_load = stats.min_load;
      row.space_bits = stats.index_space_bits;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows) {
  out << "n,mode,kappa,seed,keys,index_bits,mean_probes,max_load,min_load,space_bits,error\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.n << ',' << r.mode << ',' << r.kappa << ',' << r.seed << ',' << r.keys << ',' << r.index_bits << ','
        << r.mean_probes << ',' << r.max_load << ',' << r.min_load << ',' << r.space_bits << ',' << quoted(r.error)
        << '\n';
  }
}

void write_loads_csv(std::ostream& out, const TrialSpec& spec, std::span<const TrialResult> results) {
  out << "seed,n,bits,dist,buckets,capacity,ops,max_load,min_load,max_load_seen,min_load_seen,"
         "max_over_log2n,min_over_log2n,overflow_events,empty_events,b1_touches,b2_touches,touch_rate,"
         "mismatches,error\n";
  out << std::fixed << std::setprecision(6);
  const double lg = std::log2(static_cast<double>(spec.cfg.n));
  for (const auto& t : results) {
    const auto& r = t.report;
    const auto& e = r.engine;
    const double touches = static_cast<double>(e.counters.b1_touches + e.counters.b2_touches);
    out << t.seed << ',' << spec.cfg.n << ',' << spec.cfg.universe.bits << ','
        << quoted(spec.operation_dist.to_string()) << ',' << e.buckets << ',' << e.capacity << ',' << r.ops << ','
        << e.max_load << ',' << e.min_load << ',' << r.max_load_seen << ',' << r.min_load_seen << ','
        << static_cast<double>(r.max_load_seen) / lg << ',' << static_cast<double>(r.min_load_seen) / lg << ','
        << e.counters.overflow_events << ',' << e.counters.empty_events << ',' << e.counters.b1_touches << ','
        << e.counters.b2_touches << ',' << (r.ops ? touches / static_cast<double>(r.ops) : 0.0) << ','
        << r.mismatches << ',' << quoted(t.error) << '\n';
  }
}

void write_verify_csv(std::ostream& out, const TrialSpec& spec, std::span<const TrialResult> results) {
  out << "seed,n,bits,calibration_dist,dist,ops,inserts,erases,preds,members,refused,mismatches,"
         "overflow_events,empty_events,transfer_events,b1_fallbacks,b1_touches,b2_touches,error\n";
  for (const auto& t : results) {
    const auto& r = t.report;
    const auto& c = r.engine.counters;
    out << t.seed << ',' << spec.cfg.n << ',' << spec.cfg.universe.bits << ','
        << quoted(spec.calibration_dist.to_string()) << ',' << quoted(spec.operation_dist.to_string()) << ','
        << r.ops << ',' << r.inserts << ',' << r.erases << ',' << r.preds << ',' << r.members << ',' << r.refused
        << ',' << r.mismatches << ',' << c.overflow_events << ',' << c.empty_events << ',' << c.transfer_events
        << ',' << c.b1_fallbacks << ',' << c.b1_touches << ',' << c.b2_touches << ',' << quoted(t.error) << '\n';
  }
}

}  // namespace randpred
