#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "robreg/prng.hpp"

using namespace robreg;

TEST_SUITE("prng") {
  TEST_CASE("same seed and stream give the same sequence") {
    PrngStream a(2021, 3), b(2021, 3), c(2021, 4), d(2022, 3);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      differs_c |= x != c.next_u64();
      differs_d |= x != d.next_u64();
    }
    CHECK(differs_c);
    CHECK(differs_d);
  }

  TEST_CASE("uniform lies strictly inside the unit interval") {
    PrngStream rng(1);
    double lo = 1, hi = 0, mean = 0;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
      const double u = rng.uniform();
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      mean += u / m;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("below covers its range without bias") {
    PrngStream rng(2);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  }

  TEST_CASE("normal moments") {
    PrngStream rng(3);
    const int m = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < m; ++i) {
      const double z = rng.normal();
      s1 += z;
      s2 += z * z;
    }
    CHECK(std::abs(s1 / m) < 0.01);
    CHECK(s2 / m == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("split advances the parent, substream does not") {
    PrngStream p(5);
    const PrngStream before = p;
    const PrngStream s1 = p.substream(9);
    CHECK(p == before);
    CHECK(p.substream(9) == s1);
    CHECK(p.substream("noise") == p.substream("noise"));
    CHECK_FALSE(p.substream("noise") == p.substream("init"));
    PrngStream child = p.split();
    CHECK_FALSE(p == before);
    CHECK_FALSE(child == p);
  }

  TEST_CASE("property: child streams are uncorrelated") {
    PrngStream root(77);
    PrngStream a = root.split(), b = root.split();
    PrngStream c = root.substream(1), d = root.substream(2);
    auto corr = [](PrngStream& x, PrngStream& y) {
      const int m = 100000;
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < m; ++i) {
        const double u = x.uniform(), v = y.uniform();
        sx += u, sy += v, sxx += u * u, syy += v * v, sxy += u * v;
      }
      const double cov = sxy / m - sx / m * sy / m;
      return cov / std::sqrt((sxx / m - sx * sx / m / m) * (syy / m - sy * sy / m / m));
    };
    CHECK(std::abs(corr(a, b)) < 0.01);
    CHECK(std::abs(corr(c, d)) < 0.01);
  }

  TEST_CASE("mix64 is a bijection on samples") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(mix64(i));
    CHECK(seen.size() == 10000);
  }
}
