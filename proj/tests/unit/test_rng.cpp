#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include <doctest.h>

#include "har/rng.hpp"

using namespace har;

TEST_CASE("rng: identical seeds replay the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: derived streams are independent of the parent position") {
  Rng parent(7);
  Rng child_before = parent.derive(3);
  parent.next_u64();
  parent.next_u64();
  Rng child_after = parent.derive(3);
  CHECK(child_before.next_u64() == child_after.next_u64());
  CHECK(parent.derive(3).seed() != parent.derive(4).seed());
}

TEST_CASE("rng: mix_seed separates adjacent seeds and ids") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 8; ++base)
    for (std::uint64_t id = 0; id < 8; ++id) seen.insert(mix_seed(base, id));
  CHECK(seen.size() == 64);
}

TEST_CASE("rng: uniform_int stays in range and hits every value") {
  Rng rng(11);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t v = rng.uniform_int(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("rng: uniform bounds") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_open();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("rng: shuffle permutes without losing elements") {
  Rng rng(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  auto original = v;
  rng.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == original);
}

TEST_CASE("rng: normal draws are finite with sane spread") {
  Rng rng(17);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    REQUIRE(std::isfinite(x));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}
