#include "curemix/rng.hpp"
#include "curemix/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace curemix;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  RandomStream a(7, Purpose::latency, 3), b(7, Purpose::latency, 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(a.draws() == 100);

  auto first = [](std::uint64_t seed, Purpose p, std::uint64_t s) { return RandomStream(seed, p, s)(); };
  const auto base = first(7, Purpose::latency, 3);
  CHECK(base != first(8, Purpose::latency, 3));
  CHECK(base != first(7, Purpose::censoring, 3));
  CHECK(base != first(7, Purpose::latency, 4));
}

TEST_CASE("uniform draws lie in (0, 1) and pass a KS check") {
  RandomStream rng(11, Purpose::covariates, 0);
  std::vector<double> u(50000);
  for (double& e : u) {
    e = rng.uniform();
    REQUIRE(e > 0.0);
    REQUIRE(e < 1.0);
  }
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max({d, static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n});
  CHECK(d < 1.63 / std::sqrt(n));
}

TEST_CASE("normal and exponential moments") {
  RandomStream rng(12, Purpose::covariates, 1);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0, e1 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
    e1 += rng.exponential(2.0);
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.015);
  CHECK(std::abs(s4 / n - 3.0) < 0.06);
  CHECK(std::abs(e1 / n - 0.5) < 0.005);
  RandomStream shifted(12, Purpose::covariates, 2);
  double m = 0;
  for (int i = 0; i < n; ++i) m += shifted.normal(3.0, 0.5);
  CHECK(std::abs(m / n - 3.0) < 0.005);
}

TEST_CASE("bounded integers are in range and roughly uniform") {
  RandomStream rng(13, Purpose::bootstrap, 0);
  for (std::uint64_t bound : {1ull, 2ull, 7ull, 1000ull, (1ull << 63) + 5}) {
    for (int i = 0; i < 200; ++i) CHECK(rng.below(bound) < bound);
  }
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("seed derivation is stable") {
  CHECK(derive_seed(1, Purpose::bootstrap, 2) == derive_seed(1, Purpose::bootstrap, 2));
  CHECK(derive_seed(1, Purpose::bootstrap, 2) != derive_seed(1, Purpose::bootstrap, 3));
}
