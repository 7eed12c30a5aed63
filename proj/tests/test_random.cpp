#include <doctest.h>

#include <set>

#include "msprobit/random.hpp"
#include "support/stats.hpp"

using namespace msprobit;

TEST_SUITE("random") {
  TEST_CASE("same seed gives the same sequence") {
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RandomStream c(42);
    c.next_u64();
    CHECK(RandomStream(42).normal() == RandomStream(42).normal());
  }

  TEST_CASE("split streams are distinct and do not advance the parent") {
    RandomStream parent(7);
    const auto s1 = parent.split(1).seed();
    const auto s2 = parent.split(2).seed();
    CHECK(s1 != s2);
    CHECK(s1 != parent.seed());
    CHECK(parent.split(1).seed() == s1);
    RandomStream fresh(7);
    CHECK(parent.next_u64() == fresh.next_u64());
  }

  TEST_CASE("uniform stays in the open unit interval") {
    RandomStream rng(3);
    std::vector<double> u;
    for (int i = 0; i < 100000; ++i) {
      const double x = rng.uniform();
      REQUIRE(x > 0.0);
      REQUIRE(x < 1.0);
      u.push_back(x);
    }
    CHECK(testsupport::mean(u) == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("normal and exponential moments") {
    RandomStream rng(11);
    std::vector<double> z, e;
    for (int i = 0; i < 100000; ++i) {
      z.push_back(rng.normal());
      e.push_back(rng.exponential());
    }
    CHECK(std::abs(testsupport::mean(z)) < 0.02);
    CHECK(testsupport::variance(z) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(testsupport::mean(e) == doctest::Approx(1.0).epsilon(0.02));
    const double d = testsupport::ks_statistic(z, testsupport::normal_cdf);
    CHECK(testsupport::ks_pvalue(d, 100000) > 0.001);
  }

  TEST_CASE("below covers its range without bias") {
    RandomStream rng(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
      const auto k = rng.below(7);
      REQUIRE(k < 7);
      ++counts[k];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  }
}
