#include <doctest.h>

#include <cmath>
#include <vector>

#include "ersim/random.hpp"

using namespace ersim;

TEST_SUITE("random") {
  TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("substreams are addressable and reproducible") {
    CounterRng a(42, RngDomain::Shot, 1000);
    CounterRng b(42, RngDomain::Shot, 1000);
    std::vector<std::uint64_t> va, vb;
    for (int i = 0; i < 9; ++i) va.push_back(a.next_u64());
    for (int i = 0; i < 9; ++i) vb.push_back(b.next_u64());
    CHECK(va == vb);
    CHECK(a.draw_index() == 9);

    CounterRng other_stream(42, RngDomain::Shot, 1001);
    CounterRng other_domain(42, RngDomain::Diffusion, 1000);
    CounterRng other_seed(43, RngDomain::Shot, 1000);
    CHECK(other_stream.next_u64() != va[0]);
    CHECK(other_domain.next_u64() != va[0]);
    CHECK(other_seed.next_u64() != va[0]);

    CounterRng fork = a;
    CHECK(fork.next_u64() == a.next_u64());
  }

  TEST_CASE("uniform moments and range") {
    CounterRng rng(1, RngDomain::Test, 0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
      sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
    CHECK(sum2 / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
  }

  TEST_CASE("normal, exponential and Poisson means") {
    CounterRng rng(2, RngDomain::Test, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, e = 0.0, p_small = 0.0, p_large = 0.0, p2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = rng.standard_normal();
      s += z;
      s2 += z * z;
      e += rng.exponential(4.0);
      p_small += static_cast<double>(rng.poisson(0.3));
      const double k = static_cast<double>(rng.poisson(75.0));
      p_large += k;
      p2 += k * k;
    }
    CHECK(std::abs(s / n) < 5.0 / std::sqrt(n));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(e / n == doctest::Approx(0.25).epsilon(0.01));
    CHECK(p_small / n == doctest::Approx(0.3).epsilon(0.01));
    CHECK(p_large / n == doctest::Approx(75.0).epsilon(0.002));
    CHECK(p2 / n - (p_large / n) * (p_large / n) == doctest::Approx(75.0).epsilon(0.02));
    CHECK(rng.poisson(0.0) == 0);
  }
}
