#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mfou {

/// Hurst index of the fractional component, restricted to (0, 1).
/// H = 1/2 is accepted and turns the fractional part into a second
/// independent Brownian motion (the degenerate check mode).
class HurstParam {
 public:
  explicit HurstParam(double h);

  double value() const { return h_; }
  bool is_brownian() const { return h_ == 0.5; }

 private:
  double h_;
};

/// Uniform partition t_k = k T / n of [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t k) const {
    return k == steps_ ? horizon_ : static_cast<double>(k) * dt();
  }
  std::vector<double> points() const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double horizon_;
  std::size_t steps_;
};

/// E[B^H_s B^H_t] = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, HurstParam h);

/// Cov(B^H_b - B^H_a, B^H_d - B^H_c) for intervals [a, b] and [c, d].
/// Well separated intervals are integrated against the second derivative of
/// the covariance so that tiny cells far apart keep full relative accuracy.
double fbm_increment_covariance(double a, double b, double c, double d, HurstParam h);

/// First column of the (Toeplitz) covariance of the increments of V = B + B^H
/// on a uniform grid: Delta * 1{k = 0} + Cov(dB^H_1, dB^H_{1+k}).
std::vector<double> increment_autocovariance(const TimeGrid& grid, HurstParam h);

/// Covariance C of the increments of V on a grid together with C = L L^T.
/// Immutable after construction, shared read-only by replications.
class IncrementCovariance {
 public:
  IncrementCovariance(const TimeGrid& grid, HurstParam h);

  const TimeGrid& grid() const { return grid_; }
  HurstParam hurst() const { return h_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const std::vector<double>& autocovariance() const { return column_; }
  Eigen::MatrixXd lower() const { return llt_.matrixL(); }
  const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }

  /// L * xi, the increments of V for a standard normal vector xi.
  Eigen::VectorXd correlate(const Eigen::VectorXd& xi) const;
  /// L^{-1} y (whitening).
  Eigen::VectorXd whiten(const Eigen::VectorXd& y) const;

 private:
  TimeGrid grid_;
  HurstParam h_;
  std::vector<double> column_;
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

IncrementCovariance build_increment_covariance(const TimeGrid& grid, HurstParam h);

/// V on the grid (V_0 = 0) for replication `replication` of experiment `seed`.
std::vector<double> simulate_v(const IncrementCovariance& cov, std::uint64_t seed,
                               std::uint64_t replication = 0);

/// Euler scheme X_{k+1} = X_k + theta X_k dt + (V_{k+1} - V_k).
std::vector<double> simulate_ou(std::span<const double> v, double theta, double x0,
                                const TimeGrid& grid);

/// |theta| dt at or above this level makes the Euler bias visible; drivers
/// (campaigns, CLI) warn once when it is reached.
inline constexpr double kEulerWarnThreshold = 0.1;
bool euler_step_is_coarse(double theta, const TimeGrid& grid);

enum class PathModel { ou, regression };

struct PathSample {
  TimeGrid grid;
  PathModel model = PathModel::ou;
  double hurst = 0.5;
  double theta = 0.0;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  std::vector<double> v;
  std::vector<double> x;
};

/// Mixed fractional OU path: V from the covariance factor, X by Euler.
PathSample simulate_path(const IncrementCovariance& cov, double theta, double x0,
                         std::uint64_t seed, std::uint64_t replication = 0);

/// Regression model X_t = theta t + V_t (no feedback).
PathSample simulate_regression_path(const IncrementCovariance& cov, double theta,
                                    std::uint64_t seed, std::uint64_t replication = 0);

/// Every `factor`-th point of a grid path, i.e. the same path on the grid
/// with n / factor steps. Used to couple simulations across refinements.
std::vector<double> coarsen(std::span<const double> path, std::size_t factor);

/// `path` observed on the grid with path.steps / factor steps. X is rebuilt
/// from the coarsened V with the path's model (Euler on the coarse grid for OU).
PathSample coarsen(const PathSample& path, std::size_t factor);

}  // namespace mfou
