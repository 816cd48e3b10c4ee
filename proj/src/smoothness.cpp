#include "randpred/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace randpred {

namespace {

struct Prepared {
  std::vector<double> x;       // support as reals
  std::vector<double> prefix;  // prefix[i] = mass of support[0..i)
};

Prepared prepare(const DiscreteDist& dist) {
  dist.validate();
  if (dist.support.size() > kMaxSmoothnessSupport) {
    throw std::invalid_argument("smoothness check supports at most 512 support points");
  }
  Prepared p;
  p.x.reserve(dist.support.size());
  for (Key k : dist.support) p.x.push_back(static_cast<double>(k));
  p.prefix.assign(dist.pmf.size() + 1, 0.0);
  for (std::size_t i = 0; i < dist.pmf.size(); ++i) p.prefix[i + 1] = p.prefix[i] + dist.pmf[i];
  return p;
}

// Largest conditional window mass over triples whose left end is `a`.
double worst_window_from(const Prepared& p, std::size_t a, double f1) {
  const std::size_t size = p.x.size();
  double worst = 0.0;
  for (std::size_t c = a + 2; c < size; ++c) {
    const double cond = p.prefix[c + 1] - p.prefix[a];
    if (cond <= 0.0) continue;
    const double width = (p.x[c] - p.x[a]) / f1;
    std::size_t first = a;  // first support index inside [c2 - width, c2)
    for (std::size_t b = a + 1; b < c; ++b) {
      const double lo = p.x[b] - width;
      while (first < b && p.x[first] < lo) ++first;
      const double mass = p.prefix[b] - p.prefix[first];
      worst = std::max(worst, mass / cond);
    }
  }
  return worst;
}

}  // namespace

SmoothnessFunctions SmoothnessFunctions::power(double gamma, double alpha) {
  return {[gamma](double n) { return std::pow(n, gamma); },
          [alpha](double n) { return std::pow(n, alpha); }};
}

double estimate_beta_serial(const DiscreteDist& dist, const SmoothnessFunctions& f,
                            std::span<const std::uint64_t> n_list) {
  const Prepared p = prepare(dist);
  double beta = 0.0;
  for (std::uint64_t n : n_list) {
    const double nn = static_cast<double>(n);
    const double f1 = f.f1(nn);
    double worst = 0.0;
    for (std::size_t a = 0; a < p.x.size(); ++a) worst = std::max(worst, worst_window_from(p, a, f1));
    beta = std::max(beta, worst * nn / f.f2(nn));
  }
  return beta;
}

double estimate_beta(const DiscreteDist& dist, const SmoothnessFunctions& f,
                     std::span<const std::uint64_t> n_list) {
  const Prepared p = prepare(dist);
  const auto size = static_cast<std::ptrdiff_t>(p.x.size());
  double beta = 0.0;
  for (std::uint64_t n : n_list) {
    const double nn = static_cast<double>(n);
    const double f1 = f.f1(nn);
    double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 4)
    for (std::ptrdiff_t a = 0; a < size; ++a) {
      worst = std::max(worst, worst_window_from(p, static_cast<std::size_t>(a), f1));
    }
    beta = std::max(beta, worst * nn / f.f2(nn));
  }
  return beta;
}

}  // namespace randpred
