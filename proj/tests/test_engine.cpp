#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "randpred/engine.hpp"
#include "randpred/errors.hpp"
#include "randpred/harness.hpp"
#include "randpred/oracle.hpp"

using namespace randpred;

namespace {

// Sixteen keys whose fifth and tenth order statistics are 50 and 120, so the
// representatives come out as {0, 50, 120, 256}.
const std::vector<Key> kCrafted{10, 20, 30, 40, 50, 60, 70, 80, 90, 120, 130, 140, 150, 160, 170, 180};

EngineConfig crafted_config(double c_cap = 0.0) {
  EngineConfig cfg;
  cfg.n = 16;
  cfg.universe.bits = 8;
  cfg.c4 = 1.25;
  cfg.c_min = 0.25;
  cfg.c_cap = c_cap;
  cfg.smooth.gamma = 0.25;
  cfg.debug_checks = true;
  return cfg;
}

Engine crafted(double c_cap = 0.0) { return Engine::from_calibration(crafted_config(c_cap), kCrafted, nullptr); }

std::vector<std::size_t> b1_contents(const Engine& e) {
  std::vector<std::size_t> out;
  e.nonempty_set().for_each([&](Key k) { out.push_back(static_cast<std::size_t>(k)); });
  return out;
}

}  // namespace

TEST_CASE("bucket count follows the spacing formula") {
  EngineConfig cfg;
  cfg.n = 1024;
  cfg.c4 = 2.0;
  CHECK(cfg.spacing() == doctest::Approx(20.0));
  CHECK(cfg.bucket_count() == 51);
  CHECK(cfg.bucket_capacity() == 80);
  cfg.c_cap = 3.0;
  CHECK(cfg.bucket_capacity() == 30);
}

TEST_CASE("config validation") {
  EngineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.c4 = 0.5;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.c_min = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.c_min = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.n = 64;
  cfg.c4 = 8.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.universe.bits = 10;
  cfg.n = 1024;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("crafted representatives") {
  const Engine e = crafted();
  const auto reps = e.representatives();
  CHECK(std::vector<Key>(reps.begin(), reps.end()) == std::vector<Key>{0, 50, 120, 256});
  const auto reduced = e.reduced_representatives();
  CHECK(std::is_sorted(reduced.begin(), reduced.end()));
  CHECK(std::adjacent_find(reduced.begin(), reduced.end()) == reduced.end());
  CHECK(e.phase() == Phase::operational);
  CHECK(e.size() == 16);
}

TEST_CASE("find bucket examples") {
  const Engine e = crafted();
  CHECK(e.find_bucket(65) == 1);
  CHECK(e.find_bucket(50) == 1);
  CHECK(e.find_bucket(49) == 0);
  CHECK(e.find_bucket(0) == 0);
  CHECK(e.find_bucket(255) == 2);
  CHECK(e.find_bucket(120) == 2);
  // 119 and 120 share a part, so the part lookup lands on bucket 2 and the
  // representative comparison moves it back.
  REQUIRE(e.plan().part_width >= 2);
  REQUIRE(part_index(119, e.plan(), e.config().universe) == part_index(120, e.plan(), e.config().universe));
  CHECK(e.find_bucket(119) == 1);
}

TEST_CASE("find bucket agrees with the representative intervals everywhere") {
  const Engine e = crafted();
  const auto reps = e.representatives();
  for (Key y = 0; y < 256; ++y) {
    const std::size_t i = e.find_bucket(y);
    REQUIRE(reps[i] <= y);
    REQUIRE(y < reps[i + 1]);
  }
}

TEST_CASE("predecessor examples") {
  Engine e = crafted();
  for (Key k : {30, 40, 50, 70, 80, 90, 120, 140, 150, 160, 170, 180}) e.erase(k);
  REQUIRE(e.stored_keys() == std::vector<Key>{10, 20, 60, 130});
  CHECK(e.pred(65) == 60);
  CHECK(e.pred(55) == 20);
  CHECK(e.counters().b1_fallbacks == 0);
  CHECK_FALSE(e.pred(5).has_value());
  CHECK(e.pred(255) == 130);
  CHECK(e.pred(129) == 60);

  e.insert(200);
  e.erase(60);
  CHECK(e.loads()[1] == 0);
  CHECK(e.pred(125) == 20);
  CHECK(e.pred(119) == 20);
  CHECK(e.counters().b1_fallbacks == 1);
}

TEST_CASE("insert into an empty bucket adds it to the non-empty set") {
  Engine e = crafted();
  for (Key k : {120, 130, 140, 150, 160, 170, 180}) e.erase(k);
  CHECK(b1_contents(e) == std::vector<std::size_t>{0, 1});
  CHECK(e.loads()[2] == 0);
  e.insert(200);
  CHECK(b1_contents(e) == std::vector<std::size_t>{0, 1, 2});
  CHECK(e.loads()[2] == 1);
}

TEST_CASE("delete of the last key in a bucket empties it") {
  Engine e = crafted();
  for (Key k : {120, 130, 140, 150, 160, 170}) e.erase(k);
  const auto before = e.counters().empty_events;
  e.erase(180);
  CHECK(e.counters().empty_events == before + 1);
  CHECK(b1_contents(e) == std::vector<std::size_t>{0, 1});
  CHECK(e.pred(250) == 90);
  CHECK(e.pred(130) == 90);
}

TEST_CASE("full bucket sends inserts to the overflow set") {
  Engine e = crafted(0.5);
  REQUIRE(e.config().bucket_capacity() == 2);
  const auto before = e.counters().overflow_events;
  e.insert(100);
  CHECK(e.counters().overflow_events == before + 1);
  CHECK(e.overflow_set().contains(100));
  CHECK(e.member(100));
  CHECK(e.loads()[1] == 6);
  CHECK(e.bucket(1).size() == 2);
  CHECK(e.pred(105) == 100);
  CHECK(e.pred(99) == 90);
}

TEST_CASE("delete from an overflown bucket pulls a key back") {
  Engine e = crafted(0.5);
  const auto in_bucket = e.bucket(1).keys();
  REQUIRE(in_bucket.size() == 2);
  const Key victim = in_bucket.front();
  const auto overflow_before = e.overflow_set().size();
  const auto transfers = e.counters().transfer_events;
  e.erase(victim);
  CHECK(e.counters().transfer_events == transfers + 1);
  CHECK(e.overflow_set().size() == overflow_before - 1);
  CHECK(e.bucket(1).size() == 2);
  CHECK_FALSE(e.member(victim));
}

TEST_CASE("delete of an overflow key") {
  Engine e = crafted(0.5);
  e.insert(100);
  e.erase(100);
  CHECK_FALSE(e.member(100));
  CHECK_FALSE(e.overflow_set().contains(100));
}

TEST_CASE("absent and duplicate keys") {
  Engine e = crafted();
  CHECK_THROWS_AS(e.erase(11), AbsentKey);
  CHECK_THROWS_AS(e.insert(10), DuplicateKey);
  CHECK(e.member(10));
  CHECK_FALSE(e.member(11));
}

TEST_CASE("load band edges") {
  Engine e = crafted();
  Key next = 181;
  while (e.size() < 31) e.insert(next++);
  CHECK_THROWS_AS(e.insert(next), BandViolation);
  CHECK(e.size() == 31);

  Engine f = crafted();
  for (Key k : {30, 40, 50, 70, 80, 90, 120, 140, 150, 160, 170, 180}) f.erase(k);
  CHECK(f.size() == 4);
  CHECK_THROWS_AS(f.erase(10), BandViolation);
  CHECK(f.member(10));
}

TEST_CASE("colliding representatives fail after the retries") {
  EngineConfig cfg;
  cfg.n = 1024;
  cfg.universe.bits = 20;
  cfg.c4 = 2.0;
  CHECK_THROWS_AS((void)Engine::preprocess(cfg, [] { return Key{4242}; }), SmoothnessViolation);
}

TEST_CASE("exhausted source during re-insertion") {
  EngineConfig cfg;
  cfg.n = 256;
  cfg.universe.bits = 16;
  cfg.c4 = 1.0;
  std::vector<Key> calibration(256);
  for (Key i = 0; i < 256; ++i) calibration[i] = i * 200 + 7;
  const KeySource stuck = [] { return Key{9}; };
  CHECK_THROWS_AS((void)Engine::from_calibration(cfg, calibration, &stuck), SourceExhausted);
}

TEST_CASE("re-insertion refills n fresh keys and resets counters") {
  EngineConfig cfg;
  cfg.n = 4096;
  cfg.universe.bits = 32;
  const KeySampler sampler(DistSpec::parse("uniform"), cfg.universe);
  const Engine e = Engine::preprocess(cfg, make_source(sampler, 3));
  CHECK(e.size() == 4096);
  const EngineCounters c = e.counters();
  CHECK(c.b1_touches == 0);
  CHECK(c.b2_touches == 0);
  CHECK(c.static_queries == 0);
  CHECK_NOTHROW(e.check_invariants());

  cfg.keep_calibration = true;
  const Engine kept = Engine::preprocess(cfg, make_source(sampler, 3));
  CHECK(kept.size() <= 4096);
  CHECK(kept.size() >= 4090);
}

TEST_CASE("uniform re-insertion fills every bucket") {
  EngineConfig cfg;
  cfg.n = std::uint64_t{1} << 16;
  const KeySampler sampler(DistSpec::parse("uniform"), cfg.universe);
  int all_full = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Engine e = Engine::preprocess(cfg, make_source(sampler, seed));
    all_full += e.nonempty_set().size() == e.loads().size();
  }
  CHECK(all_full >= 99);
}

TEST_CASE("exhaustive oracle equivalence on a small universe") {
  for (const char* dist : {"uniform", "piecewise:0,5;0.5,1", "zipf:1.1", "spiky:2,0.7,64"}) {
    EngineConfig cfg;
    cfg.n = 512;
    cfg.universe.bits = 12;
    cfg.c4 = 2.0;
    cfg.c_cap = 1.0;
    cfg.c_min = 0.5;
    cfg.debug_checks = true;
    const KeySampler sampler(DistSpec::parse(dist), cfg.universe);
    const KeySampler uniform(DistSpec::parse("uniform"), cfg.universe);
    Engine e = Engine::preprocess(cfg, make_source(uniform, 5));
    OracleSet oracle(e.stored_keys());
    std::mt19937_64 rng(6);
    for (int step = 0; step < 4000; ++step) {
      const Key k = (rng() & 1) ? sampler(rng) : uniform(rng);
      if (rng() & 1) {
        if (!oracle.contains(k) && oracle.size() + 1 < 1024) {
          e.insert(k);
          oracle.insert(k);
        }
      } else if (oracle.contains(k) && oracle.size() - 1 >= 256) {
        e.erase(k);
        oracle.erase(k);
      }
    }
    CAPTURE(dist);
    std::size_t bad = 0;
    for (Key y = 0; y < cfg.universe.size(); ++y) {
      bad += e.pred(y) != oracle.pred(y);
      bad += e.member(y) != oracle.contains(y);
    }
    CHECK(bad == 0);
    CHECK(e.stored_keys() == std::vector<Key>(oracle.keys().begin(), oracle.keys().end()));
  }
}

TEST_CASE("overflowed key answers member queries") {
  EngineConfig cfg;
  cfg.n = 2048;
  cfg.universe.bits = 24;
  const KeySampler calibration(DistSpec::parse("uniform"), cfg.universe);
  Engine e = Engine::preprocess(cfg, make_source(calibration, 1));
  const KeySampler spike(DistSpec::parse("spiky:1,1.0,4096"), cfg.universe);
  Rng rng(2);
  std::vector<Key> added;
  while (e.counters().overflow_events == 0) {
    const Key k = spike(rng);
    if (e.member(k)) continue;
    e.insert(k);
    added.push_back(k);
  }
  CHECK(e.overflow_set().size() >= 1);
  for (Key k : added) CHECK(e.member(k));
  CHECK_NOTHROW(e.check_invariants());
}

TEST_CASE("stats report consistent totals") {
  const Engine e = crafted(0.5);
  const EngineStats s = e.stats();
  CHECK(s.stored == 16);
  CHECK(s.buckets == 3);
  CHECK(s.capacity == 2);
  std::uint64_t in_buckets = 0;
  for (std::size_t i = 0; i < s.buckets; ++i) in_buckets += e.bucket(i).size();
  CHECK(in_buckets + s.overflow_size == s.stored);
  CHECK(s.nonempty_buckets == 3);
}
