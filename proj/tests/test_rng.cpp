#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "qekit/rng.hpp"

using qekit::synth::Rng;

TEST_CASE("mixer matches the splitmix64 reference sequence") {
  // Frozen from two independent implementations of the published algorithm.
  const std::uint64_t seed0[] = {
      0x09AAB36CFDA2D1B3ull, 0x5B00C67197590451ull, 0x0EB2AFB57F7F9972ull,
      0xF6A9A538D91E7CEAull, 0x6847D6B8FC5B3E7Bull,
  };
  Rng r(0);
  for (std::uint64_t v : seed0) CHECK(r.next_u64() == v);

  const std::uint64_t seed1[] = {
      0xD7271CEA5B75DB66ull, 0x3F130D28021F0083ull, 0x126EFBC98CE9C2A0ull,
  };
  Rng r1(0x123456789ABCDEFull);
  for (std::uint64_t v : seed1) CHECK(r1.next_u64() == v);
}

TEST_CASE("draws are a pure function of seed and counter") {
  Rng a(42);
  for (int i = 0; i < 3; ++i) a.next_u64();
  Rng b(42, a.counter());
  Rng c(42);
  for (int i = 0; i < 3; ++i) c.next_u64();
  for (int i = 0; i < 10; ++i) CHECK(b.next_u64() == c.next_u64());
}

TEST_CASE("identical seeds replay, different seeds do not") {
  Rng a(7), b(7), c(8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("forked streams are reproducible and distinct") {
  Rng parent(123);
  Rng f1 = parent.fork(0);
  Rng f1_again = parent.fork(0);
  Rng f2 = parent.fork(1);
  bool same = true, differ = false;
  for (int i = 0; i < 32; ++i) {
    std::uint64_t v = f1.next_u64();
    same = same && (v == f1_again.next_u64());
    differ = differ || (v != f2.next_u64());
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("uniform doubles live in [0,1) with the right mean") {
  Rng r(2026);
  const int n = 100000;
  double sum = 0.0;
  bool in_range = true;
  for (int i = 0; i < n; ++i) {
    double u = r.next_double();
    in_range = in_range && u >= 0.0 && u < 1.0;
    sum += u;
  }
  CHECK(in_range);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("gaussian moments") {
  Rng r(99);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = r.next_gaussian();
    s1 += z;
    s2 += z * z;
  }
  double mean = s1 / n;
  double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson mean and variance in both sampling regimes") {
  SUBCASE("inversion path, small mean") {
    Rng r(5);
    const int n = 200000;
    const double lam = 3.0;
    double s1 = 0.0, s2 = 0.0;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
      double k = static_cast<double>(r.next_poisson(lam));
      s1 += k;
      s2 += k * k;
      if (k == 0.0) ++zeros;
    }
    double mean = s1 / n;
    double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(lam).epsilon(0.02));
    CHECK(var == doctest::Approx(lam).epsilon(0.03));
    CHECK(static_cast<double>(zeros) / n ==
          doctest::Approx(std::exp(-lam)).epsilon(0.06));
  }
  SUBCASE("rejection path, large mean") {
    Rng r(6);
    const int n = 200000;
    const double lam = 50.0;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double k = static_cast<double>(r.next_poisson(lam));
      s1 += k;
      s2 += k * k;
    }
    double mean = s1 / n;
    double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(lam).epsilon(0.005));
    CHECK(var == doctest::Approx(lam).epsilon(0.05));
  }
  SUBCASE("zero mean gives zero") {
    Rng r(7);
    CHECK(r.next_poisson(0.0) == 0);
  }
}
