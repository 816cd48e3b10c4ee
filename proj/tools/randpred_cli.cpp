#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "randpred/harness.hpp"
#include "randpred/smoothness.hpp"

namespace {

using namespace randpred;

struct CommonFlags {
  std::uint64_t n = std::uint64_t{1} << 14;
  unsigned bits = 32;
  double alpha = 0.5;
  double gamma = 1.0;
  double c4 = 8.0;
  double c_cap = 0.0;
  std::string kappa_mode = "const:1";
  std::string dist = "uniform";
  std::string calib_dist;
  std::uint64_t seed = 1;
  unsigned seeds = 1;
  std::uint64_t ops = 100000;
  std::string mix = "1:1:1:1";
  std::string band = "1:2";
  std::string csv;
  bool keep_calibration = false;
  bool check = false;
};

void add_engine_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--n", f.n, "calibration size n");
  cmd->add_option("--bits", f.bits, "key width b (universe 2^b)");
  cmd->add_option("--alpha", f.alpha, "partition shrink exponent alpha in (0,1)");
  cmd->add_option("--gamma", f.gamma, "partition window exponent gamma");
  cmd->add_option("--c4", f.c4, "representative spacing factor");
  cmd->add_option("--c-cap", f.c_cap, "bucket capacity factor (0 = 4*c4)");
  cmd->add_option("--kappa-mode", f.kappa_mode, "const[:delta] | trilog | linspace");
  cmd->add_option("--dist", f.dist, "operation distribution");
  cmd->add_option("--calib-dist", f.calib_dist, "calibration distribution (default: --dist)");
  cmd->add_option("--seed", f.seed, "first seed");
  cmd->add_option("--seeds", f.seeds, "number of consecutive seeds");
  cmd->add_option("--band", f.band, "load band cmin:cmax");
  cmd->add_option("--csv", f.csv, "write CSV rows to this path");
  cmd->add_flag("--keep-calibration", f.keep_calibration, "keep calibration keys as initial contents");
}

void add_workload_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--ops", f.ops, "operations per trial");
  cmd->add_option("--mix", f.mix, "op weights i:d:p:m");
  cmd->add_flag("--check", f.check, "check engine invariants after every op");
}

std::pair<double, double> parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("band must be cmin:cmax");
  return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

EngineConfig make_config(const CommonFlags& f) {
  EngineConfig cfg;
  cfg.n = f.n;
  cfg.universe.bits = f.bits;
  cfg.smooth.alpha = f.alpha;
  cfg.smooth.gamma = f.gamma;
  cfg.c4 = f.c4;
  cfg.c_cap = f.c_cap;
  cfg.kappa = KappaChoice::parse(f.kappa_mode);
  const auto [c_min, c_max] = parse_band(f.band);
  cfg.c_min = c_min;
  cfg.smooth.c_max = c_max;
  cfg.seed = f.seed;
  cfg.keep_calibration = f.keep_calibration;
  cfg.validate();
  return cfg;
}

TrialSpec make_trial(const CommonFlags& f) {
  TrialSpec spec;
  spec.cfg = make_config(f);
  spec.operation_dist = DistSpec::parse(f.dist);
  spec.calibration_dist = f.calib_dist.empty() ? spec.operation_dist : DistSpec::parse(f.calib_dist);
  spec.operation_dist.validate(spec.cfg.universe);
  spec.calibration_dist.validate(spec.cfg.universe);
  spec.ops = f.ops;
  spec.mix = OpMix::parse(f.mix);
  spec.options.check_invariants = f.check;
  return spec;
}

std::vector<std::uint64_t> seed_list(const CommonFlags& f) {
  std::vector<std::uint64_t> seeds(f.seeds);
  std::iota(seeds.begin(), seeds.end(), f.seed);
  return seeds;
}

template <typename Writer>
void emit_csv(const std::string& path, Writer&& write) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write(out);
}

void print_report(const TrialResult& t) {
  const auto& r = t.report;
  const auto& c = r.engine.counters;
  std::cout << "seed " << t.seed;
  if (!t.error.empty()) {
    std::cout << " error: " << t.error << '\n';
    return;
  }
  std::cout << " ops " << r.ops << " (I " << r.inserts << " D " << r.erases << " P " << r.preds << " M "
            << r.members << ") refused " << r.refused << " mismatches " << r.mismatches << '\n'
            << "  stored " << r.engine.stored << " buckets " << r.engine.buckets << " capacity "
            << r.engine.capacity << " load max/min " << r.max_load_seen << '/' << r.min_load_seen
            << " mean probes " << std::fixed << std::setprecision(3) << r.mean_probes << '\n'
            << "  overflow " << c.overflow_events << " empty " << c.empty_events << " transfer "
            << c.transfer_events << " b1 " << c.b1_touches << " b2 " << c.b2_touches << '\n';
  std::cout.unsetf(std::ios::floatfield);
  for (const auto& m : r.mismatch_examples) std::cout << "  mismatch " << m << '\n';
  if (r.latency) {
    std::cout << "  latency ns p50 " << r.latency->p50_ns << " p90 " << r.latency->p90_ns << " p99 "
              << r.latency->p99_ns << " mean " << r.latency->mean_ns << '\n';
  }
}

int cmd_verify(const CommonFlags& f, const std::string& workload_in, const std::string& workload_out) {
  const TrialSpec spec = make_trial(f);
  std::vector<TrialResult> results;
  if (!workload_in.empty() || !workload_out.empty()) {
    TrialResult t;
    t.seed = f.seed;
    const KeySampler calibration(spec.calibration_dist, spec.cfg.universe);
    Engine engine = Engine::preprocess(spec.cfg, make_source(calibration, f.seed));
    Workload w;
    if (!workload_in.empty()) {
      std::ifstream in(workload_in);
      if (!in) throw std::runtime_error("cannot open " + workload_in);
      w = Workload::read(in);
    } else {
      WorkloadParams p{spec.ops, spec.mix, spec.cfg.n, spec.cfg.c_min, spec.cfg.smooth.c_max, f.seed};
      w = gen_workload(p, engine.stored_keys(), KeySampler(spec.operation_dist, spec.cfg.universe));
    }
    if (!workload_out.empty()) {
      std::ofstream out(workload_out);
      if (!out) throw std::runtime_error("cannot open " + workload_out);
      w.write(out);
    }
    t.report = run(engine, w, spec.options);
    results.push_back(std::move(t));
  } else {
    const auto seeds = seed_list(f);
    results = run_trials(spec, seeds);
  }
  emit_csv(f.csv, [&](std::ostream& out) { write_verify_csv(out, spec, results); });
  bool failed = false;
  for (const auto& t : results) {
    print_report(t);
    failed = failed || !t.error.empty() || t.report.mismatches > 0;
  }
  std::cout << (failed ? "FAIL" : "OK") << '\n';
  return failed ? 1 : 0;
}

int cmd_loads(CommonFlags f) {
  if (f.ops == 0) f.ops = f.n;
  TrialSpec spec = make_trial(f);
  const auto seeds = seed_list(f);
  const auto results = run_trials(spec, seeds);
  emit_csv(f.csv, [&](std::ostream& out) { write_loads_csv(out, spec, results); });
  if (f.csv.empty()) write_loads_csv(std::cout, spec, results);
  for (const auto& t : results) {
    if (!t.error.empty() || t.report.mismatches > 0) return 1;
  }
  return 0;
}

std::vector<std::uint64_t> parse_n_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw std::invalid_argument("empty n list");
  return out;
}

int cmd_probes(const CommonFlags& f, const std::string& n_list, const std::vector<std::string>& modes,
               std::uint64_t queries) {
  const EngineConfig base = make_config(f);
  const DistSpec dist = DistSpec::parse(f.dist);
  std::vector<KappaChoice> choices;
  for (const auto& m : modes) choices.push_back(KappaChoice::parse(m));
  if (choices.empty()) choices.push_back(base.kappa);
  const auto ns = parse_n_list(n_list);
  const auto seeds = seed_list(f);
  const auto rows = probe_sweep(base, dist, ns, choices, seeds, queries);
  emit_csv(f.csv, [&](std::ostream& out) { write_probe_csv(out, rows); });
  if (f.csv.empty()) write_probe_csv(std::cout, rows);
  for (const auto& r : rows) {
    if (!r.error.empty()) return 1;
  }
  return 0;
}

int cmd_smoothness(const CommonFlags& f, std::size_t grid, const std::string& n_list) {
  UniverseParams u;
  u.bits = f.bits;
  u.validate();
  const DistSpec spec = DistSpec::parse(f.dist);
  spec.validate(u);
  const DiscreteDist dist = materialize(spec, u, grid);
  const auto ns = parse_n_list(n_list);
  const double beta = estimate_beta(dist, f.gamma, f.alpha, ns);
  std::cout << "dist " << spec.to_string() << " support " << dist.support.size() << " beta " << std::fixed
            << std::setprecision(6) << beta << '\n';
  emit_csv(f.csv, [&](std::ostream& out) {
    out << "dist,bits,grid,alpha,gamma,beta\n"
        << std::fixed << std::setprecision(6) << '"' << spec.to_string() << "\"," << f.bits << ',' << grid << ','
        << f.alpha << ',' << f.gamma << ',' << beta << '\n';
  });
  return 0;
}

int cmd_bench(CommonFlags f) {
  TrialSpec spec = make_trial(f);
  spec.options.measure_latency = true;
  const auto seeds = seed_list(f);
  const auto results = run_trials_serial(spec, seeds);
  bool failed = false;
  for (const auto& t : results) {
    print_report(t);
    failed = failed || !t.error.empty() || t.report.mismatches > 0;
  }
  emit_csv(f.csv, [&](std::ostream& out) {
    out << "seed,ops,p50_ns,p90_ns,p99_ns,mean_ns\n" << std::fixed << std::setprecision(1);
    for (const auto& t : results) {
      if (!t.report.latency) continue;
      const auto& l = *t.report.latency;
      out << t.seed << ',' << t.report.ops << ',' << l.p50_ns << ',' << l.p90_ns << ',' << l.p99_ns << ','
          << l.mean_ns << '\n';
    }
  });
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic predecessor search over smooth key distributions"};
  app.require_subcommand(1);

  CommonFlags verify_flags, loads_flags, probe_flags, smooth_flags, bench_flags;
  std::string workload_in, workload_out;
  auto* verify = app.add_subcommand("verify", "replay workloads against the oracle; exit 1 on any mismatch");
  add_engine_flags(verify, verify_flags);
  add_workload_flags(verify, verify_flags);
  verify->add_option("--workload", workload_in, "replay this workload file instead of generating one");
  verify->add_option("--workload-out", workload_out, "write the generated workload to this file");

  loads_flags.ops = 0;
  loads_flags.mix = "1:1:0:0";
  auto* loads = app.add_subcommand("loads", "bucket load and touch statistics after n update steps");
  add_engine_flags(loads, loads_flags);
  add_workload_flags(loads, loads_flags);

  std::string probe_ns = "1024,4096,16384,65536,262144";
  std::vector<std::string> probe_modes;
  std::uint64_t probe_queries = 100000;
  auto* probes = app.add_subcommand("probes", "static index probe and space sweep over n and kappa modes");
  add_engine_flags(probes, probe_flags);
  probes->add_option("--n-list", probe_ns, "comma separated n values");
  probes->add_option("--modes", probe_modes, "kappa modes (default: --kappa-mode)");
  probes->add_option("--queries", probe_queries, "queries per row");

  std::size_t grid = 256;
  std::string smooth_ns = "256";
  smooth_flags.bits = 8;
  smooth_flags.gamma = 0.5;
  auto* smooth = app.add_subcommand("smoothness", "brute-force smoothness estimate of a distribution");
  smooth->add_option("--bits", smooth_flags.bits, "key width b");
  smooth->add_option("--dist", smooth_flags.dist, "distribution");
  smooth->add_option("--alpha", smooth_flags.alpha, "mass exponent alpha");
  smooth->add_option("--gamma", smooth_flags.gamma, "window exponent gamma");
  smooth->add_option("--grid", grid, "support points (at most 512)");
  smooth->add_option("--n-list", smooth_ns, "comma separated n values");
  smooth->add_option("--csv", smooth_flags.csv, "write a CSV row to this path");

  auto* bench = app.add_subcommand("bench", "per-operation wall-clock latency");
  add_engine_flags(bench, bench_flags);
  add_workload_flags(bench, bench_flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (verify->parsed()) return cmd_verify(verify_flags, workload_in, workload_out);
    if (loads->parsed()) return cmd_loads(loads_flags);
    if (probes->parsed()) return cmd_probes(probe_flags, probe_ns, probe_modes, probe_queries);
    if (smooth->parsed()) return cmd_smoothness(smooth_flags, grid, smooth_ns);
    if (bench->parsed()) return cmd_bench(bench_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
