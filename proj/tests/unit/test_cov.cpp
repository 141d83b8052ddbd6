#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfou/cov.hpp"
#include "mfou/error.hpp"

using namespace mfou;

namespace {

double direct_increment_cov(double a, double b, double c, double d, double h) {
  auto f = [h](double z) { return 0.5 * std::pow(std::abs(z), 2.0 * h); };
  return f(b - c) + f(a - d) - f(b - d) - f(a - c);
}

}  // namespace

TEST_CASE("hurst and grid validation") {
  CHECK_THROWS_AS(HurstParam(0.0), ValidationError);
  CHECK_THROWS_AS(HurstParam(1.0), ValidationError);
  CHECK_THROWS_AS(HurstParam(std::nan("")), ValidationError);
  CHECK(HurstParam(0.5).is_brownian());
  CHECK_THROWS_AS(TimeGrid(0.0, 4), ValidationError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), ValidationError);
  const TimeGrid g(3.0, 7);
  CHECK(g.time(7) == 3.0);
  CHECK(g.points().size() == 8);
}

TEST_CASE("fbm covariance") {
  const HurstParam h(0.7);
  CHECK(fbm_covariance(2.0, 2.0, h) == doctest::Approx(std::pow(2.0, 1.4)).epsilon(1e-14));
  CHECK(fbm_covariance(0.3, 1.7, h) == fbm_covariance(1.7, 0.3, h));
  CHECK(fbm_covariance(0.3, 1.7, HurstParam(0.5)) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(fbm_covariance(-1.0, 1.0, h), ValidationError);
}

TEST_CASE("increment covariance matches the direct formula") {
  for (double hv : {0.2, 0.5, 0.7, 0.9}) {
    const HurstParam h(hv);
    for (double gap : {0.0, 0.5, 3.0, 40.0}) {
      const double a = 1.0, b = 2.0, c = b + gap, d = c + 1.5;
      CHECK(fbm_increment_covariance(a, b, c, d, h) ==
            doctest::Approx(direct_increment_cov(a, b, c, d, hv)).epsilon(1e-10));
      CHECK(fbm_increment_covariance(c, d, a, b, h) ==
            doctest::Approx(fbm_increment_covariance(a, b, c, d, h)).epsilon(1e-14));
    }
    // Same cell: the variance.
    CHECK(fbm_increment_covariance(0.2, 0.7, 0.2, 0.7, h) ==
          doctest::Approx(std::pow(0.5, 2.0 * hv)).epsilon(1e-13));
  }
}

TEST_CASE("tiny distant cells keep relative accuracy") {
  const double h = 0.7, w = 1e-7, gap = 0.5;
  const double got = fbm_increment_covariance(0.0, w, gap, gap + w, HurstParam(h));
  // Midpoint rule for int int c_H |x - y|^{2H-2}; relative error O((w / gap)^2).
  const double mid = h * (2.0 * h - 1.0) * std::pow(gap, 2.0 * h - 2.0) * w * w;
  CHECK(got == doctest::Approx(mid).epsilon(1e-9));
}

TEST_CASE("increment covariance matrix against the fbm covariance") {
  const TimeGrid grid(2.0, 12);
  const HurstParam h(0.3);
  const auto cov = build_increment_covariance(grid, h);
  const auto& m = cov.matrix();
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      const double ti0 = grid.time(i), ti1 = grid.time(i + 1);
      const double tj0 = grid.time(j), tj1 = grid.time(j + 1);
      const double fbm = fbm_covariance(ti1, tj1, h) - fbm_covariance(ti0, tj1, h) -
                         fbm_covariance(ti1, tj0, h) + fbm_covariance(ti0, tj0, h);
      const double expect = fbm + (i == j ? grid.dt() : 0.0);
      CHECK(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
  const Eigen::MatrixXd l = cov.lower();
  CHECK((l * l.transpose() - m).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("brownian case has a diagonal covariance") {
  const TimeGrid grid(1.0, 16);
  const auto col = increment_autocovariance(grid, HurstParam(0.5));
  CHECK(col[0] == doctest::Approx(2.0 * grid.dt()).epsilon(1e-14));
  for (std::size_t k = 1; k < col.size(); ++k) CHECK(std::abs(col[k]) < 1e-15);
}

TEST_CASE("empirical covariance of simulated increments") {
  const TimeGrid grid(2.0, 6);
  const auto cov = build_increment_covariance(grid, HurstParam(0.7));
  const std::size_t reps = 10000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(6, 6);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto v = simulate_v(cov, 99, r);
    CHECK(v[0] == 0.0);
    Eigen::VectorXd dv(6);
    for (Eigen::Index k = 0; k < 6; ++k) dv(k) = v[k + 1] - v[k];
    acc += dv * dv.transpose();
  }
  acc /= static_cast<double>(reps);
  const auto& c = cov.matrix();
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) {
      const double se = std::sqrt((c(i, i) * c(j, j) + c(i, j) * c(i, j)) / reps);
      CHECK(std::abs(acc(i, j) - c(i, j)) < 5.0 * se);
    }
}

TEST_CASE("simulation is keyed by (seed, replication)") {
  const auto cov = build_increment_covariance(TimeGrid(1.0, 32), HurstParam(0.3));
  CHECK(simulate_v(cov, 5, 17) == simulate_v(cov, 5, 17));
  CHECK(simulate_v(cov, 5, 17) != simulate_v(cov, 5, 18));
  CHECK(simulate_v(cov, 6, 17) != simulate_v(cov, 5, 17));
}

TEST_CASE("euler recursion and regression path") {
  const TimeGrid grid(1.0, 8);
  const auto cov = build_increment_covariance(grid, HurstParam(0.6));
  const auto p = simulate_path(cov, -2.0, 0.5, 3, 1);
  REQUIRE(p.x.size() == 9);
  CHECK(p.x[0] == 0.5);
  for (std::size_t k = 0; k < 8; ++k)
    CHECK(p.x[k + 1] == doctest::Approx(p.x[k] - 2.0 * p.x[k] * grid.dt() + p.v[k + 1] - p.v[k]));
  const auto flat = simulate_path(cov, 0.0, 1.0, 3, 1);
  for (std::size_t k = 0; k <= 8; ++k) CHECK(flat.x[k] == doctest::Approx(1.0 + flat.v[k]));
  const auto reg = simulate_regression_path(cov, 0.7, 3, 1);
  for (std::size_t k = 0; k <= 8; ++k)
    CHECK(reg.x[k] == doctest::Approx(0.7 * grid.time(k) + reg.v[k]));
  CHECK_THROWS_AS(simulate_ou(p.v, -1.0, 0.0, TimeGrid(1.0, 4)), ValidationError);
  CHECK(euler_step_is_coarse(-1.0, TimeGrid(1.0, 8)));
  CHECK_FALSE(euler_step_is_coarse(-1.0, TimeGrid(1.0, 16)));
}

TEST_CASE("coarsening keeps the driving noise") {
  const TimeGrid grid(4.0, 16);
  const auto cov = build_increment_covariance(grid, HurstParam(0.7));
  const auto p = simulate_path(cov, -1.0, 0.0, 8, 2);
  const auto c = coarsen(p, 4);
  CHECK(c.grid == TimeGrid(4.0, 4));
  for (std::size_t k = 0; k <= 4; ++k) CHECK(c.v[k] == p.v[4 * k]);
  CHECK(c.x == simulate_ou(c.v, -1.0, 0.0, c.grid));
  CHECK_THROWS_AS(coarsen(p, 3), ValidationError);
  CHECK_THROWS_AS(coarsen(p.v, 0), ValidationError);
}
