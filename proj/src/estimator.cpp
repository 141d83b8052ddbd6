#include "mfou/estimator.hpp"

#include <cmath>
#include <numeric>

#include "mfou/error.hpp"

namespace mfou {

std::string_view to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::canonical: return "canonical";
    case EstimatorMethod::oracle: return "oracle";
    case EstimatorMethod::regression: return "regression";
  }
  return "unknown";
}

namespace {

void require_same_grid(const PathSample& x, const CanonicalKernel& ck) {
  if (!(x.grid == ck.grid())) throw ValidationError("path and kernel live on different grids");
  if (x.x.size() != x.grid.steps() + 1) throw ValidationError("path length does not match its grid");
}

EstimateRecord make_record(const PathSample& x, EstimatorMethod method) {
  EstimateRecord r;
  r.method = method;
  r.seed = x.seed;
  r.replication = x.replication;
  r.hurst = x.hurst;
  r.horizon = x.grid.horizon();
  r.steps = x.grid.steps();
  return r;
}

}  // namespace

std::vector<double> compute_z(const PathSample& x, const CanonicalKernel& ck) {
  require_same_grid(x, ck);
  return apply_kernel(ck, x.x);
}

std::vector<double> compute_q(std::span<const double> z, const CanonicalKernel& ck, double x0) {
  const std::size_t n = ck.grid().steps();
  if (z.size() != n + 1) throw ValidationError("compute_q: Z does not match the grid");
  const auto& psi = ck.psi_diag();
  const auto& cell = ck.psi_cell();
  std::vector<double> q(n + 1);
  double running = 0.0;
  q[0] = 0.5 * psi[0] * z[0] + x0;
  for (std::size_t k = 1; k <= n; ++k) {
    running += cell[k - 1] * (z[k] - z[k - 1]);
    q[k] = 0.5 * psi[k] * z[k] + 0.5 * running + x0;
  }
  return q;
}

std::vector<double> compute_q_double_sum(std::span<const double> z, const CanonicalKernel& ck,
                                         double x0) {
  const std::size_t n = ck.grid().steps();
  if (z.size() != n + 1) throw ValidationError("compute_q_double_sum: Z does not match the grid");
  const auto& psi = ck.psi_diag();
  const auto& cell = ck.psi_cell();
  std::vector<double> q(n + 1, 0.0);
  q[0] = 0.5 * psi[0] * z[0] + x0;
  for (std::size_t k = 1; k <= n; ++k) {
    double acc = x0;
    for (std::size_t j = 1; j <= k; ++j) acc += 0.5 * (cell[j - 1] + psi[k]) * (z[j] - z[j - 1]);
    // Z_0 = 0 for every kernel path; kept so arbitrary inputs match compute_q.
    q[k] = acc + 0.5 * psi[k] * z[0];
  }
  return q;
}

double mle_ratio(std::span<const double> z, std::span<const double> q, const CanonicalKernel& ck) {
  const auto& m = ck.bracket();
  if (z.size() != m.size() || q.size() + 1 < z.size())
    throw ValidationError("mle_ratio: Z, Q and the kernel grid differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    num += q[k - 1] * (z[k] - z[k - 1]);
    den += q[k - 1] * q[k - 1] * (m[k] - m[k - 1]);
  }
  if (!(den > 0.0)) throw DegenerateSampleError("degenerate sample: int Q^2 d<M> = 0");
  return num / den;
}

EstimateRecord mle(const PathSample& x, const CanonicalKernel& ck) {
  const auto z = compute_z(x, ck);
  const auto q = compute_q(z, ck, x.x.front());
  EstimateRecord r = make_record(x, EstimatorMethod::canonical);
  r.theta_hat = mle_ratio(z, q, ck);
  const auto& m = ck.bracket();
  double energy = 0.0;
  for (std::size_t k = 1; k < z.size(); ++k) energy += q[k - 1] * q[k - 1] * (m[k] - m[k - 1]);
  r.q_energy = energy / x.grid.horizon();
  return r;
}

EstimateRecord discrete_likelihood_oracle(const PathSample& x, const IncrementCovariance& cov) {
  if (!(x.grid == cov.grid())) throw ValidationError("path and covariance live on different grids");
  const std::size_t n = x.grid.steps();
  const double dt = x.grid.dt();
  Eigen::VectorXd a(static_cast<Eigen::Index>(n));
  Eigen::VectorXd dx(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    a[static_cast<Eigen::Index>(k)] = x.x[k] * dt;
    dx[static_cast<Eigen::Index>(k)] = x.x[k + 1] - x.x[k];
  }
  const Eigen::VectorXd wa = cov.whiten(a);
  const Eigen::VectorXd wx = cov.whiten(dx);
  const double den = wa.squaredNorm();
  if (!(den > 0.0)) throw DegenerateSampleError("degenerate sample: a' C^{-1} a = 0");
  EstimateRecord r = make_record(x, EstimatorMethod::oracle);
  r.theta_hat = wa.dot(wx) / den;
  return r;
}

EstimateRecord regression_mle(const PathSample& x, const CanonicalKernel& ck) {
  require_same_grid(x, ck);
  const std::size_t n = x.grid.steps();
  const double bracket = ck.bracket()[n];
  if (!(bracket > 0.0)) throw DegenerateSampleError("regression_mle: <M>_T = 0");
  const auto w = ck.row(n);
  double num = 0.0;
  for (std::size_t j = 1; j <= n; ++j) num += w[j - 1] * (x.x[j] - x.x[j - 1]);
  EstimateRecord r = make_record(x, EstimatorMethod::regression);
  r.theta_hat = num / bracket;
  r.variance = 1.0 / bracket;
  return r;
}

double regression_variance_constant(double h) {
  return 2.0 * h * std::tgamma(h + 0.5) * std::tgamma(3.0 - 2.0 * h) / std::tgamma(1.5 - h);
}

}  // namespace mfou
