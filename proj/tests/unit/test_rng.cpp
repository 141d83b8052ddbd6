#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfou/rng.hpp"
#include "mfou/stats.hpp"

using namespace mfou;

TEST_CASE("philox known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  NormalStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
    CHECK(x != d.next());
  }
}

TEST_CASE("fill matches sequential draws") {
  NormalStream a(11, 0), b(11, 0);
  std::vector<double> v(9);
  a.fill(v);
  for (double x : v) CHECK(x == b.next());
}

TEST_CASE("normal moments and distribution") {
  NormalStream s(2024, 0);
  std::vector<double> x(200000);
  s.fill(x);
  const double r = static_cast<double>(x.size());
  CHECK(std::abs(mean(x)) < 5.0 / std::sqrt(r));
  CHECK(std::abs(variance(x) - 1.0) < 5.0 * std::sqrt(2.0 / r));
  double m4 = 0.0;
  for (double v : x) m4 += v * v * v * v;
  CHECK(std::abs(m4 / r - 3.0) < 5.0 * std::sqrt(96.0 / r));
  CHECK(ks_statistic(x, 1.0) < 1.63 / std::sqrt(r));
}
