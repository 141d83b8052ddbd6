#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfou/error.hpp"
#include "mfou/rng.hpp"
#include "mfou/stats.hpp"

using namespace mfou;

TEST_CASE("moments") {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
  CHECK(mean(x) == 3.5);
  CHECK(variance(x) == doctest::Approx(7.0));
  CHECK(median(x) == 3.0);
  CHECK(median(std::vector<double>{5.0, 1.0, 3.0}) == 3.0);
  CHECK_THROWS_AS(mean(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(variance(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(2.0, 2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-15));
  CHECK(normal_cdf(-40.0) >= 0.0);
}

TEST_CASE("ks statistic") {
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, 1.0), ValidationError);
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{0.0}, 0.0), ValidationError);
  CHECK(ks_statistic(std::vector<double>(50, 0.0), 1.0) >= 0.5);

  const double sigma = std::sqrt(2.0);
  NormalStream s(4, 0);
  std::vector<double> x(1000);
  for (double& v : x) v = sigma * s.next();
  CHECK(ks_statistic(x, sigma) < 1.63 / std::sqrt(1000.0));

  std::vector<double> unit(1000);
  NormalStream u(5, 0);
  u.fill(unit);
  CHECK(ks_statistic(unit, 2.0) > 0.1);
}

TEST_CASE("linear fit") {
  const std::vector<double> x{1.0, 2.0, 3.0, 5.0};
  std::vector<double> y;
  for (double v : x) y.push_back(-0.4 * v + 1.5);
  const auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.4).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(f.residual < 1e-14);
  CHECK_THROWS_AS(linear_fit(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}),
                  ValidationError);
}
