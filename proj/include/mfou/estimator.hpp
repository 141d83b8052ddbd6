#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "mfou/cov.hpp"
#include "mfou/kernel.hpp"

namespace mfou {

enum class EstimatorMethod { canonical, oracle, regression };

std::string_view to_string(EstimatorMethod m);

struct EstimateRecord {
  double theta_hat = 0.0;
  /// (1/T) int Q^2 d<M> for the canonical method, zero otherwise.
  double q_energy = 0.0;
  EstimatorMethod method = EstimatorMethod::canonical;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
  double hurst = 0.5;
  double horizon = 0.0;
  std::size_t steps = 0;
  /// Exact error variance when the model gives one (regression: 1 / <M>_T).
  double variance = std::numeric_limits<double>::quiet_NaN();
};

/// Z_{t_k} = sum_{j <= k} g[k][j] dX_j.
std::vector<double> compute_z(const PathSample& x, const CanonicalKernel& ck);

/// Q_{t_k} = psi_k Z_k / 2 + (1/2) sum_{j <= k} psi_{j-1/2} dZ_j + X_0, where psi_k
/// is the diagonal at the grid point and psi_{j-1/2} the exact cell value
/// dt / d<M>_j. Z only sees increments of X; the X_0 term is
/// d/d<M>_t int_0^t g(s, t) X_0 ds = X_0.
std::vector<double> compute_q(std::span<const double> z, const CanonicalKernel& ck,
                              double x0 = 0.0);

/// Same Q through the double sum sum_j psi(s_{j-1/2}, t_k) dZ_j with
/// psi(s, t) = (psi_s + psi_t) / 2. O(n^2); a consistency reference.
std::vector<double> compute_q_double_sum(std::span<const double> z, const CanonicalKernel& ck,
                                         double x0 = 0.0);

/// theta_hat = sum Q_{k-1} dZ_k / sum Q_{k-1}^2 d<M>_k (left-point sums).
EstimateRecord mle(const PathSample& x, const CanonicalKernel& ck);

/// The same ratio for given Z and Q; exposed for the error decomposition.
double mle_ratio(std::span<const double> z, std::span<const double> q, const CanonicalKernel& ck);

/// Generalized least squares under the Euler model dX - theta X dt = dV,
/// dV ~ N(0, C): theta_hat = a' C^{-1} dX / a' C^{-1} a with a_k = X_{k-1} dt.
EstimateRecord discrete_likelihood_oracle(const PathSample& x, const IncrementCovariance& cov);

/// Regression model X_t = theta t + V_t: theta_hat = int g(t, T) dX_t / <M>_T,
/// error variance 1 / <M>_T.
EstimateRecord regression_mle(const PathSample& x, const CanonicalKernel& ck);

/// v_H = 2H Gamma(H + 1/2) Gamma(3 - 2H) / Gamma(3/2 - H).
double regression_variance_constant(double h);

}  // namespace mfou
