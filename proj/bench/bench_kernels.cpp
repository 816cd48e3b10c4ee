#include <chrono>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <vector>

#include <omp.h>

#include "randpred/harness.hpp"
#include "randpred/smoothness.hpp"

namespace {

using namespace randpred;
using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& f, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - start).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::cout << std::left << std::setw(16) << name << " serial " << std::right << std::setw(10) << std::fixed
            << std::setprecision(2) << serial << " ms  openmp " << std::setw(10) << parallel << " ms  speedup "
            << std::setprecision(2) << serial / parallel << "x  " << (same ? "match" : "MISMATCH") << '\n';
}

}  // namespace

int main() {
  std::cout << "threads " << omp_get_max_threads() << '\n';

  UniverseParams u;
  u.bits = 12;
  const DiscreteDist dist = materialize(DistSpec::parse("piecewise:0,3;0.5,1"), u, 384);
  const std::vector<std::uint64_t> ns{256, 4096, 65536};
  double beta_serial = 0.0;
  double beta_parallel = 0.0;
  const double t_beta_serial = time_ms([&] { beta_serial = estimate_beta_serial(dist, SmoothnessFunctions::power(1.0, 0.5), ns); }, 3);
  const double t_beta_parallel = time_ms([&] { beta_parallel = estimate_beta(dist, 1.0, 0.5, ns); }, 3);
  report("estimate_beta", t_beta_serial, t_beta_parallel, beta_serial == beta_parallel);

  TrialSpec spec;
  spec.cfg.n = std::uint64_t{1} << 14;
  spec.operation_dist = DistSpec::parse("uniform");
  spec.calibration_dist = spec.operation_dist;
  spec.ops = 100000;
  std::vector<std::uint64_t> seeds(8);
  std::iota(seeds.begin(), seeds.end(), 1);
  std::vector<TrialResult> serial;
  std::vector<TrialResult> parallel;
  const double t_trials_serial = time_ms([&] { serial = run_trials_serial(spec, seeds); }, 1);
  const double t_trials_parallel = time_ms([&] { parallel = run_trials(spec, seeds); }, 1);
  bool same = serial.size() == parallel.size();
  for (std::size_t i = 0; same && i < serial.size(); ++i) {
    same = serial[i].report.mismatches == parallel[i].report.mismatches &&
           serial[i].report.max_load_seen == parallel[i].report.max_load_seen &&
           serial[i].report.engine.counters.b1_touches == parallel[i].report.engine.counters.b1_touches;
  }
  report("trial batch", t_trials_serial, t_trials_parallel, same);
  return same && beta_serial == beta_parallel ? 0 : 1;
}
