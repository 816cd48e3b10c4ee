#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "randpred/sampler.hpp"
#include "randpred/smoothness.hpp"

using namespace randpred;

namespace {

UniverseParams bits(unsigned b) {
  UniverseParams u;
  u.bits = b;
  return u;
}

// Direct enumeration of the smoothness definition: every triple, every
// support point tested against the window and the conditioning range.
double beta_oracle(const DiscreteDist& d, double gamma, double alpha, double n) {
  const std::size_t size = d.support.size();
  double worst = 0.0;
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = a + 1; b < size; ++b) {
      for (std::size_t c = b + 1; c < size; ++c) {
        const double x1 = static_cast<double>(d.support[a]);
        const double x2 = static_cast<double>(d.support[b]);
        const double x3 = static_cast<double>(d.support[c]);
        const double lo = x2 - (x3 - x1) / std::pow(n, gamma);
        double cond = 0.0;
        double window = 0.0;
        for (std::size_t i = a; i <= c; ++i) {
          const double x = static_cast<double>(d.support[i]);
          cond += d.pmf[i];
          if (x >= lo && x < x2) window += d.pmf[i];
        }
        if (cond > 0.0) worst = std::max(worst, window / cond);
      }
    }
  }
  return worst * n / std::pow(n, alpha);
}

DiscreteDist random_dist(std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  DiscreteDist d;
  Key x = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    x += 1 + rng() % 7;
    d.support.push_back(x);
    const double w = (rng() % 4 == 0) ? 0.0 : std::generate_canonical<double, 53>(rng);
    d.pmf.push_back(w);
    total += w;
  }
  for (double& p : d.pmf) p /= total;
  return d;
}

}  // namespace

TEST_CASE("distribution grammar round trips") {
  for (const char* text : {"uniform", "piecewise:0,0.9;0.5,0.1", "spiky:4,0.5", "spiky:1,0.9,2048", "zipf:1.2"}) {
    CAPTURE(text);
    const DistSpec spec = DistSpec::parse(text);
    CHECK(DistSpec::parse(spec.to_string()).to_string() == spec.to_string());
  }
  CHECK(DistSpec::parse("spiky:3,0.25").spikes == 3);
  CHECK(DistSpec::parse("piecewise:0,1;0.25,3").pieces.size() == 2);
  for (const char* bad : {"", "normal", "uniform:1", "spiky:1", "spiky:a,0.5", "piecewise:0", "zipf:"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS((void)DistSpec::parse(bad), std::invalid_argument);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS((DistSpec::parse("spiky:0,0.5").validate(bits(8))));
  CHECK_THROWS((DistSpec::parse("spiky:1,1.5").validate(bits(8))));
  CHECK_THROWS((DistSpec::parse("spiky:4,0.5,128").validate(bits(8))));
  CHECK_THROWS((DistSpec::parse("piecewise:0.5,1").validate(bits(8))));
  CHECK_THROWS((DistSpec::parse("piecewise:0,1;0,1").validate(bits(8))));
  CHECK_THROWS((DistSpec::parse("zipf:-1").validate(bits(8))));
  CHECK_NOTHROW(DistSpec::parse("piecewise:0,0.9;0.5,0.1").validate(bits(8)));
}

TEST_CASE("materialize uniform gives equal mass") {
  const DiscreteDist d = materialize(DistSpec::parse("uniform"), bits(8), 256);
  REQUIRE(d.support.size() == 256);
  for (std::size_t i = 0; i < 256; ++i) {
    CHECK(d.support[i] == i);
    CHECK(d.pmf[i] == doctest::Approx(1.0 / 256).epsilon(1e-12));
  }
}

TEST_CASE("materialize single spike of full mass is a point mass") {
  const DiscreteDist d = materialize(DistSpec::parse("spiky:1,1.0"), bits(8), 256);
  double total = 0.0;
  int nonzero = 0;
  for (std::size_t i = 0; i < d.pmf.size(); ++i) {
    total += d.pmf[i];
    if (d.pmf[i] > 0.0) {
      ++nonzero;
      CHECK(d.support[i] == 128);
      CHECK(d.pmf[i] == doctest::Approx(1.0));
    }
  }
  CHECK(nonzero == 1);
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("materialize piecewise splits mass by weight") {
  const DiscreteDist d = materialize(DistSpec::parse("piecewise:0,0.9;0.5,0.1"), bits(8), 256);
  for (std::size_t i = 0; i < 128; ++i) CHECK(d.pmf[i] == doctest::Approx(0.9 / 128).epsilon(1e-12));
  for (std::size_t i = 128; i < 256; ++i) CHECK(d.pmf[i] == doctest::Approx(0.1 / 128).epsilon(1e-12));
}

TEST_CASE("materialize on a coarse grid keeps total mass") {
  for (const char* text : {"uniform", "zipf:1.1", "spiky:5,0.3,7", "piecewise:0,1;0.3,2;0.9,0.5"}) {
    const DiscreteDist d = materialize(DistSpec::parse(text), bits(20), 1000);
    CHECK_NOTHROW(d.validate());
    double total = 0.0;
    for (double p : d.pmf) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS((void)materialize(DistSpec::parse("uniform"), bits(8), 512));
  CHECK_THROWS((void)materialize(DistSpec::parse("uniform"), bits(30), (1u << 20) + 1));
}

TEST_CASE("distribution cdf agrees with materialized mass") {
  const auto u = bits(10);
  for (const char* text : {"zipf:1.3", "spiky:3,0.6,5", "piecewise:0,2;0.75,1"}) {
    const DistSpec spec = DistSpec::parse(text);
    const DiscreteDist d = materialize(spec, u, 1024);
    double running = 0.0;
    for (std::size_t i = 0; i < d.pmf.size(); ++i) {
      CHECK(spec_cdf(spec, u, d.support[i]) == doctest::Approx(running).epsilon(1e-9));
      running += d.pmf[i];
    }
    CHECK(spec_cdf(spec, u, u.size()) == doctest::Approx(1.0));
  }
}

TEST_CASE("point mass sampler always returns the spike") {
  const KeySampler sampler(DistSpec::parse("spiky:1,1.0"), bits(16));
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) CHECK(sampler(rng) == 32768);
  const DiscreteDist d = materialize(DistSpec::parse("spiky:1,1.0"), bits(8), 256);
  for (int i = 0; i < 1000; ++i) CHECK(sample_key(d, rng) == 128);
}

TEST_CASE("uniform sampler frequencies stay within five sigma") {
  const KeySampler sampler(DistSpec::parse("uniform"), bits(8));
  Rng rng(2024);
  std::vector<std::uint64_t> counts(256, 0);
  const std::uint64_t draws = 1000000;
  for (std::uint64_t i = 0; i < draws; ++i) ++counts[sampler(rng)];
  const double p = 1.0 / 256;
  const double mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (std::uint64_t c : counts) CHECK(std::abs(static_cast<double>(c) - mean) <= 5 * sigma);
}

TEST_CASE("explicit pmf sampler follows the pmf") {
  const DiscreteDist d = materialize(DistSpec::parse("piecewise:0,0.9;0.5,0.1"), bits(8), 256);
  Rng rng(5);
  std::uint64_t low = 0;
  const std::uint64_t draws = 200000;
  for (std::uint64_t i = 0; i < draws; ++i) low += sample_key(d, rng) < 128;
  const double sigma = std::sqrt(draws * 0.9 * 0.1);
  CHECK(std::abs(static_cast<double>(low) - 0.9 * draws) <= 5 * sigma);
}

TEST_CASE("samplers are deterministic per seed") {
  for (const char* text : {"uniform", "zipf:1.5", "spiky:8,0.5,3", "piecewise:0,1;0.5,4"}) {
    const KeySampler sampler(DistSpec::parse(text), bits(32));
    Rng a(77);
    Rng b(77);
    for (int i = 0; i < 1000; ++i) REQUIRE(sampler(a) == sampler(b));
  }
}

TEST_CASE("sampled keys stay inside the universe and the distribution support") {
  const auto u = bits(12);
  const KeySampler sampler(DistSpec::parse("piecewise:0,0;0.5,1"), u);
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Key k = sampler(rng);
    REQUIRE(k >= 2048);
    REQUIRE(k < 4096);
  }
}

TEST_CASE("uniform deletion sampler") {
  Rng rng(11);
  const std::vector<Key> one{5};
  CHECK(sample_uniform_deletion(one, rng) == 5);
  const std::vector<Key> two{1, 2};
  std::map<Key, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[sample_uniform_deletion(two, rng)];
  const double sigma = std::sqrt(10000 * 0.25);
  CHECK(std::abs(counts[1] - 5000) <= 5 * sigma);
  CHECK(std::abs(counts[2] - 5000) <= 5 * sigma);
  CHECK_THROWS_AS((void)sample_uniform_deletion(std::vector<Key>{}, rng), std::invalid_argument);
}

TEST_CASE("smoothness of the uniform distribution over 256 keys") {
  const DiscreteDist d = materialize(DistSpec::parse("uniform"), bits(8), 256);
  const std::vector<std::uint64_t> ns{256};
  const double beta = estimate_beta(d, 0.5, 0.5, ns);
  CHECK(beta <= 2.0);
  CHECK(beta > 0.5);
}

TEST_CASE("smoothness of a point mass is n over f2") {
  const DiscreteDist d = materialize(DistSpec::parse("spiky:1,1.0"), bits(8), 256);
  const std::vector<std::uint64_t> ns{256};
  CHECK(estimate_beta(d, 0.5, 0.5, ns) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("any distribution is smooth for a linear mass function") {
  const SmoothnessFunctions linear{[](double n) { return std::sqrt(n); }, [](double n) { return n; }};
  const std::vector<std::uint64_t> ns{64, 256, 4096};
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    CHECK(estimate_beta(random_dist(96, seed), linear, ns) <= 1.0 + 1e-12);
  }
  CHECK(estimate_beta(materialize(DistSpec::parse("spiky:1,1.0"), bits(8), 256), linear, ns) ==
        doctest::Approx(1.0));
}

TEST_CASE("smoothness estimate matches direct enumeration") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const DiscreteDist d = random_dist(28, seed);
    for (double n : {16.0, 300.0}) {
      const std::vector<std::uint64_t> ns{static_cast<std::uint64_t>(n)};
      CAPTURE(seed);
      CAPTURE(n);
      CHECK(estimate_beta_serial(d, SmoothnessFunctions::power(0.7, 0.4), ns) ==
            doctest::Approx(beta_oracle(d, 0.7, 0.4, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("smoothness estimate is monotone in the mass function") {
  const DiscreteDist d = random_dist(64, 99);
  const std::vector<std::uint64_t> ns{512};
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double beta = estimate_beta(d, 1.0, alpha, ns);
    CHECK(beta <= prev);
    prev = beta;
  }
}

TEST_CASE("parallel smoothness estimate equals the serial reference") {
  const std::vector<std::uint64_t> ns{64, 1024, 65536};
  for (const char* text : {"uniform", "zipf:1.1", "spiky:3,0.4,2", "piecewise:0,5;0.2,1;0.9,3"}) {
    const DiscreteDist d = materialize(DistSpec::parse(text), bits(16), 300);
    const auto f = SmoothnessFunctions::power(1.0, 0.5);
    CHECK(estimate_beta(d, f, ns) == estimate_beta_serial(d, f, ns));
  }
}

TEST_CASE("smoothness estimate rejects large supports") {
  const DiscreteDist d = materialize(DistSpec::parse("uniform"), bits(10), 1024);
  const std::vector<std::uint64_t> ns{256};
  CHECK_THROWS_AS((void)estimate_beta(d, 1.0, 0.5, ns), std::invalid_argument);
}

TEST_CASE("uniform smoothness stays below two when windows shrink with the mass bound") {
  for (std::uint64_t grid : {64u, 200u, 256u}) {
    const DiscreteDist d = materialize(DistSpec::parse("uniform"), bits(8), grid);
    for (double gamma : {0.5, 1.0, 2.0}) {
      const std::vector<std::uint64_t> ns{16, 256};
      CAPTURE(grid);
      CAPTURE(gamma);
      CHECK(estimate_beta(d, gamma, 0.5, ns) <= 2.0);
    }
  }
}

TEST_CASE("uniform smoothness with wide windows approaches n over f1 f2") {
  const DiscreteDist d = materialize(DistSpec::parse("uniform"), bits(8), 256);
  const std::vector<std::uint64_t> ns{256};
  const double beta = estimate_beta(d, 0.25, 0.5, ns);
  CHECK(beta <= 4.0 + 1e-9);
  CHECK(beta >= 3.9);
}
