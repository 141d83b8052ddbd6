#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mfou/asymptotics.hpp"
#include "mfou/error.hpp"
#include "mfou/stats.hpp"

using namespace mfou;

namespace {

const CanonicalKernel& kernel07() {
  static const auto ck =
      projection_kernel(TimeGrid(100.0, 1000), HurstParam(0.7), KernelStorage::bracket_only);
  return ck;
}

std::size_t steps_for(double t) { return 10 * static_cast<std::size_t>(std::llround(t / 0.1)); }

}  // namespace

TEST_CASE("psi interpolant") {
  const PsiInterpolant p(TimeGrid(2.0, 2), {1.0, 3.0, 2.0});
  CHECK(p(0.0) == 1.0);
  CHECK(p(0.5) == doctest::Approx(2.0));
  CHECK(p(1.5) == doctest::Approx(2.5));
  CHECK(p(2.0) == 2.0);
  CHECK_THROWS_AS(p(2.1), ValidationError);
  CHECK_THROWS_AS(p(-0.1), ValidationError);
  CHECK_THROWS_AS(PsiInterpolant(TimeGrid(1.0, 1), {1.0, -1.0}), ValidationError);
  CHECK(PsiInterpolant::constant(2.0, 5.0)(3.3) == 2.0);
}

TEST_CASE("coefficients") {
  const auto c = riccati_coefficients(1.7);
  CHECK(c.a.determinant() == doctest::Approx(0.0));
  CHECK(c.a.trace() == 2.0);
  const Eigen::Vector2d b(1.0 / std::sqrt(1.7), std::sqrt(1.7));
  CHECK((c.b - b * b.transpose()).norm() < 1e-15);
}

TEST_CASE("input validation") {
  const auto psi = PsiInterpolant::constant(2.0, 10.0);
  CHECK_THROWS_AS(riccati_laplace(1.0, 0.0, psi, 5.0, 100), ValidationError);
  CHECK_THROWS_AS(riccati_laplace(1.0, 1.0, psi, 5.0, 100), ValidationError);
  CHECK_THROWS_AS(riccati_laplace(-1.0, -1.0, psi, 5.0, 100), ValidationError);
  CHECK_THROWS_AS(riccati_laplace(1.0, -1.0, psi, 11.0, 100), ValidationError);
  CHECK_THROWS_AS(logdet_route(1.0, -1.0, psi, 11.0, 100), ValidationError);
}

TEST_CASE("mu = 0") {
  const PsiInterpolant psi(kernel07());
  CHECK(riccati_laplace(0.0, -1.0, psi, 50.0, steps_for(50.0)).l_numeric == 1.0);
  const auto l = logdet_route(0.0, -1.3, psi, 50.0, steps_for(50.0));
  CHECK(l.log_det_phi1 == 1.3 * 50.0);
  CHECK(l.laplace == 1.0);
  CHECK(montecarlo_laplace(0.0, std::vector<double>{0.3, 2.0, 7.0}).mean == 1.0);
}

TEST_CASE("brownian case approaches the limit") {
  const auto psi = PsiInterpolant::constant(2.0, 100.0);
  const auto r = riccati_laplace(1.0, -1.0, psi, 100.0, 10000);
  CHECK(r.l_limit == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(std::abs(r.l_numeric - std::exp(-0.5)) <= 0.05 * std::exp(-0.5));
  CHECK(r.l_numeric > 0.0);
  CHECK(r.l_numeric <= 1.0);
}

TEST_CASE("two-route identity") {
  {
    const auto psi = PsiInterpolant::constant(2.0, 10.0);
    const auto r = riccati_laplace(1.0, -1.0, psi, 10.0, 1000);
    const auto l = logdet_route(1.0, -1.0, psi, 10.0, 1000);
    CHECK(std::abs(l.log_laplace - std::log(r.l_numeric)) <= 1e-6);
  }
  for (double hv : {0.3, 0.7}) {
    const auto ck = projection_kernel(TimeGrid(60.0, 600), HurstParam(hv), KernelStorage::bracket_only);
    const PsiInterpolant psi(ck);
    for (double theta : {-0.5, -1.0, -2.0})
      for (double mu : {0.5, 1.0, 3.0})
        for (double t : {5.0, 20.0, 60.0}) {
          const auto r = riccati_laplace(mu, theta, psi, t, steps_for(t));
          const auto l = logdet_route(mu, theta, psi, t, steps_for(t));
          CHECK(std::abs(l.log_laplace - std::log(r.l_numeric)) <= 1e-6);
        }
  }
}

TEST_CASE("limit, monotone approach and O(1/T) rate") {
  const PsiInterpolant psi(kernel07());
  const double limit = std::exp(-0.5);
  double prev_gap = 1.0;
  std::vector<double> scaled;
  for (double t : {25.0, 50.0, 100.0}) {
    const auto r = riccati_laplace(1.0, -1.0, psi, t, steps_for(t));
    const double gap = std::abs(r.l_numeric - limit);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    scaled.push_back(t * std::abs(std::log(r.l_numeric) + 0.5));
  }
  CHECK(prev_gap <= 0.05);
  CHECK(scaled[2] / scaled[1] == doctest::Approx(1.0).epsilon(0.2));
  CHECK(scaled[1] / scaled[0] == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("laplace transform is nonincreasing in mu") {
  const PsiInterpolant psi(kernel07());
  double prev = 2.0;
  for (double mu : {0.0, 0.5, 1.0, 2.0}) {
    const double l = riccati_laplace(mu, -1.0, psi, 30.0, steps_for(30.0)).l_numeric;
    CHECK(l <= prev);
    CHECK(l > 0.0);
    prev = l;
  }
}

TEST_CASE("riccati trajectory invariants") {
  const PsiInterpolant psi(kernel07());
  const auto r = riccati_laplace(1.0, -1.0, psi, 100.0, steps_for(100.0));
  CHECK(r.max_asymmetry <= 1e-9);

  const auto traj = riccati_trajectory(1.0, -1.0, psi, 10.0, 1000, 50);
  REQUIRE(traj.size() == 21);
  CHECK(traj.front().gamma.isZero(0.0));
  CHECK(traj.front().phi1.isIdentity(0.0));
  CHECK(traj.front().phi2.isZero(0.0));
  for (const auto& s : traj) {
    CHECK(std::abs(s.gamma(0, 1) - s.gamma(1, 0)) <= 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.gamma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    const Eigen::Matrix2d ratio = s.phi1.inverse() * s.phi2;
    CHECK((ratio - s.gamma).norm() <= 1e-8 * std::max(1.0, s.gamma.norm()));
  }
  const auto l = logdet_route(1.0, -1.0, psi, 10.0, 1000);
  CHECK(std::log(traj.back().phi1.determinant()) == doctest::Approx(l.log_det_phi1).epsilon(1e-9));
}

TEST_CASE("diagonalized initial conditions recombine to the identity") {
  for (double mu : {0.0, 0.5, 2.0}) {
    const double theta = -1.5, t = 40.0;
    const double lambda = std::sqrt(theta * theta / 4.0 + mu / (2.0 * t));
    const double ap = std::abs(theta) / 2.0 + lambda, am = std::abs(theta) / 2.0 - lambda;
    const Eigen::Matrix2d phi0 =
        ap * upsilon1_initial(mu, theta, t) + am * upsilon2_initial(mu, theta, t);
    CHECK((phi0 - Eigen::Matrix2d::Identity()).norm() < 1e-14);
  }
}

TEST_CASE("growth diagnostic of the diagonalized system decreases") {
  const PsiInterpolant psi(kernel07());
  double prev = 1e300;
  for (double t : {10.0, 25.0, 50.0, 100.0}) {
    const double last = logdet_route(1.0, -1.0, psi, t, steps_for(t)).last_diagnostic;
    CHECK(last < prev);
    prev = last;
  }
}

TEST_CASE("monte carlo laplace against the riccati route") {
  const auto mc = montecarlo_laplace(1.0, -1.0, HurstParam(0.5), 10.0, 256, 300, 17, 1);
  CHECK(mc.replications == 300);
  const auto psi = PsiInterpolant::constant(2.0, 10.0);
  const double ode = riccati_laplace(1.0, -1.0, psi, 10.0, 1000).l_numeric;
  CHECK(std::abs(mc.mean - ode) <= 3.0 * mc.standard_error);
  const auto zero = montecarlo_laplace(0.0, -1.0, HurstParam(0.7), 5.0, 64, 10, 3, 1);
  CHECK(zero.mean == 1.0);
  CHECK_THROWS_AS(montecarlo_laplace(1.0, std::vector<double>{}), ValidationError);
}

TEST_CASE("condition diagnostics") {
  {
    const auto d = check_conditions(long_horizon_kernel(HurstParam(0.5)));
    CHECK(d.times.front() == 1.0);
    CHECK(d.times.back() == 200.0);
    for (std::size_t i = 0; i < d.times.size(); ++i) {
      CHECK(d.integrand[i] < 1e-20);
      CHECK(d.ratio[i] == doctest::Approx(2.0 / d.times[i]).epsilon(1e-9));
    }
    CHECK(d.partial_integral.back() < 1e-18);
    CHECK(d.ratio_decreasing());
  }
  for (double hv : {0.3, 0.7}) {
    const auto d = check_conditions(long_horizon_kernel(HurstParam(hv)));
    // (d/dt log slope)^2 ~ t^{-2}
    const std::size_t i100 = 396, i200 = d.times.size() - 1;
    REQUIRE(d.times[i100] == 100.0);
    const double ratio = (200.0 * 200.0 * d.integrand[i200]) / (100.0 * 100.0 * d.integrand[i100]);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.25));
    CHECK(d.max_relative_increment(50.0) < 0.01);
    CHECK(d.ratio_decreasing());
    CHECK(d.ratio.back() < d.ratio.front());
  }
  CHECK_THROWS_AS(check_conditions(long_horizon_kernel(HurstParam(0.7), 20.0), 30.0),
                  ValidationError);
}
