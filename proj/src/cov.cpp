#include "mfou/cov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mfou/error.hpp"
#include "mfou/rng.hpp"

namespace mfou {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGaussNode = {0.1834346424956498, 0.5255324099163290,
                                              0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGaussWeight = {0.3626837833783620, 0.3137066458778873,
                                                0.2223810344533745, 0.1012285362903763};

// c_H * int_c^d |x - y|^{2H-2} dy for x outside [c, d], without cancellation.
double separated_inner(double x, double c, double d, double h) {
  const double a = 2.0 * h - 1.0;
  const double near = x < c ? c - x : x - d;
  return h * std::pow(near, a) * std::expm1(a * std::log1p((d - c) / near));
}

}  // namespace

HurstParam::HurstParam(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    throw ValidationError("Hurst parameter must lie in (0, 1), got " + std::to_string(h));
  }
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("time horizon must be positive and finite");
  }
  if (steps == 0) throw ValidationError("time grid needs at least one step");
}

std::vector<double> TimeGrid::points() const {
  std::vector<double> t(steps_ + 1);
  for (std::size_t k = 0; k <= steps_; ++k) t[k] = time(k);
  return t;
}

double fbm_covariance(double s, double t, HurstParam h) {
  if (s < 0.0 || t < 0.0) throw ValidationError("fbm_covariance: negative time");
  const double e = 2.0 * h.value();
  return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double fbm_increment_covariance(double a, double b, double c, double d, HurstParam h) {
  if (a > c) {
    std::swap(a, c);
    std::swap(b, d);
  }
  const double e = 2.0 * h.value();
  const double wa = b - a;
  const double wc = d - c;
  const double gap = c - b;
  if (gap < 2.0 * std::min(wa, wc)) {
    auto f = [e](double z) { return 0.5 * std::pow(std::abs(z), e); };
    return f(b - c) + f(a - d) - f(b - d) - f(a - c);
  }
  // Quadrature over the narrower interval, closed form over the wider one.
  const bool first_narrow = wa <= wc;
  const double lo = first_narrow ? a : c;
  const double half = 0.5 * (first_narrow ? wa : wc);
  const double mid = lo + half;
  const double other_lo = first_narrow ? c : a;
  const double other_hi = first_narrow ? d : b;
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNode.size(); ++i) {
    sum += kGaussWeight[i] *
           (separated_inner(mid - half * kGaussNode[i], other_lo, other_hi, h.value()) +
            separated_inner(mid + half * kGaussNode[i], other_lo, other_hi, h.value()));
  }
  return half * sum;
}

std::vector<double> increment_autocovariance(const TimeGrid& grid, HurstParam h) {
  const std::size_t n = grid.steps();
  const double dt = grid.dt();
  std::vector<double> col(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Scale out dt^{2H} so the unit-cell covariance is evaluated once per lag.
    col[k] = std::pow(dt, 2.0 * h.value()) *
             fbm_increment_covariance(0.0, 1.0, static_cast<double>(k),
                                      static_cast<double>(k) + 1.0, h);
  }
  col[0] += dt;
  return col;
}

IncrementCovariance::IncrementCovariance(const TimeGrid& grid, HurstParam h)
    : grid_(grid), h_(h), column_(increment_autocovariance(grid, h)) {
  const auto n = static_cast<Eigen::Index>(grid.steps());
  matrix_.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      matrix_(i, j) = column_[static_cast<std::size_t>(std::abs(i - j))];
    }
  }
  llt_.compute(matrix_);
  if (llt_.info() != Eigen::Success) {
    // C >= dt I, so this is a construction bug rather than bad input.
    throw NumericalError("Cholesky factorization of the increment covariance failed");
  }
}

Eigen::VectorXd IncrementCovariance::correlate(const Eigen::VectorXd& xi) const {
  return llt_.matrixL() * xi;
}

Eigen::VectorXd IncrementCovariance::whiten(const Eigen::VectorXd& y) const {
  return llt_.matrixL().solve(y);
}

IncrementCovariance build_increment_covariance(const TimeGrid& grid, HurstParam h) {
  return IncrementCovariance(grid, h);
}

std::vector<double> simulate_v(const IncrementCovariance& cov, std::uint64_t seed,
                               std::uint64_t replication) {
  const std::size_t n = cov.grid().steps();
  Eigen::VectorXd xi(static_cast<Eigen::Index>(n));
  NormalStream stream(seed, replication);
  stream.fill(std::span<double>(xi.data(), n));
  const Eigen::VectorXd dv = cov.correlate(xi);
  std::vector<double> v(n + 1);
  v[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) v[k + 1] = v[k] + dv[static_cast<Eigen::Index>(k)];
  return v;
}

bool euler_step_is_coarse(double theta, const TimeGrid& grid) {
  return std::abs(theta) * grid.dt() >= kEulerWarnThreshold;
}

std::vector<double> simulate_ou(std::span<const double> v, double theta, double x0,
                                const TimeGrid& grid) {
  if (v.size() != grid.steps() + 1) {
    throw ValidationError("simulate_ou: path length does not match the grid");
  }
  const double dt = grid.dt();
  std::vector<double> x(v.size());
  x[0] = x0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    x[k + 1] = x[k] + theta * x[k] * dt + (v[k + 1] - v[k]);
  }
  return x;
}

PathSample simulate_path(const IncrementCovariance& cov, double theta, double x0,
                         std::uint64_t seed, std::uint64_t replication) {
  PathSample p{.grid = cov.grid(),
               .model = PathModel::ou,
               .hurst = cov.hurst().value(),
               .theta = theta,
               .x0 = x0,
               .seed = seed,
               .replication = replication,
               .v = simulate_v(cov, seed, replication),
               .x = {}};
  p.x = simulate_ou(p.v, theta, x0, p.grid);
  return p;
}

namespace {
std::vector<double> regression_x(std::span<const double> v, double theta, const TimeGrid& grid) {
  std::vector<double> x(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) x[k] = theta * grid.time(k) + v[k];
  return x;
}
}  // namespace

PathSample simulate_regression_path(const IncrementCovariance& cov, double theta,
                                    std::uint64_t seed, std::uint64_t replication) {
  PathSample p{.grid = cov.grid(),
               .model = PathModel::regression,
               .hurst = cov.hurst().value(),
               .theta = theta,
               .x0 = 0.0,
               .seed = seed,
               .replication = replication,
               .v = simulate_v(cov, seed, replication),
               .x = {}};
  p.x = regression_x(p.v, theta, p.grid);
  return p;
}

std::vector<double> coarsen(std::span<const double> path, std::size_t factor) {
  if (factor == 0 || path.empty() || (path.size() - 1) % factor != 0) {
    throw ValidationError("coarsen: factor must divide the number of steps");
  }
  std::vector<double> out;
  out.reserve((path.size() - 1) / factor + 1);
  for (std::size_t k = 0; k < path.size(); k += factor) out.push_back(path[k]);
  return out;
}

PathSample coarsen(const PathSample& path, std::size_t factor) {
  PathSample out = path;
  out.v = coarsen(path.v, factor);
  out.grid = TimeGrid(path.grid.horizon(), path.grid.steps() / factor);
  out.x = path.model == PathModel::ou ? simulate_ou(out.v, path.theta, path.x0, out.grid)
                                      : regression_x(out.v, path.theta, out.grid);
  return out;
}

}  // namespace mfou
