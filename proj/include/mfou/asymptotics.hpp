#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfou/cov.hpp"
#include "mfou/kernel.hpp"

namespace mfou {

/// Piecewise-linear interpolant of psi(t, t) on a kernel grid.
class PsiInterpolant {
 public:
  PsiInterpolant(const TimeGrid& grid, std::vector<double> values);
  explicit PsiInterpolant(const CanonicalKernel& ck);
  /// psi(t, t) == value on [0, horizon]; the h = 1/2 case has value 2.
  static PsiInterpolant constant(double value, double horizon);

  double operator()(double t) const;
  double horizon() const { return grid_.horizon(); }
  const TimeGrid& grid() const { return grid_; }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

/// Coefficients of the linear system for (Z, Y) at time t.
struct RiccatiCoefficients {
  Eigen::Matrix2d a;  ///< [[1, 1/psi], [psi, 1]]
  Eigen::Matrix2d b;  ///< b b^T with b = (psi^{-1/2}, psi^{1/2})
  Eigen::Matrix2d r;  ///< [[psi, 1], [1, 1/psi]]
};
RiccatiCoefficients riccati_coefficients(double psi);

struct RiccatiState {
  double t = 0.0;
  Eigen::Matrix2d gamma = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d phi1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d phi2 = Eigen::Matrix2d::Zero();
};

struct LaplaceReport {
  double mu = 0.0;
  double horizon = 0.0;
  double l_numeric = 1.0;
  double l_limit = 1.0;  ///< exp(-mu / (2 |theta|))
  double l_montecarlo = 0.0;
  double l_montecarlo_se = 0.0;
  double max_asymmetry = 0.0;  ///< largest |Gamma_12 - Gamma_21| met
};

/// L_T(mu) = exp(-(mu / 4T) int_0^T tr(Gamma R) ds) with Gamma from the matrix
/// Riccati equation, integrated by classical RK4 with `steps` fixed steps.
LaplaceReport riccati_laplace(double mu, double theta, const PsiInterpolant& psi, double horizon,
                              std::size_t steps);

/// Gamma, Phi_1, Phi_2 integrated side by side (RK4), sampled every `stride`
/// steps. Phi_1 grows like exp(|theta| t); meant for moderate horizons.
std::vector<RiccatiState> riccati_trajectory(double mu, double theta, const PsiInterpolant& psi,
                                             double horizon, std::size_t steps,
                                             std::size_t stride);

struct LogDetReport {
  double lambda = 0.0;   ///< sqrt((theta/2)^2 + mu / 2T)
  double a_plus = 0.0;
  double a_minus = 0.0;
  double log_det_phi1 = 0.0;
  double log_laplace = 0.0;  ///< -(log det Phi_1(T) - |theta| T) / 2
  double laplace = 1.0;
  /// (1/T) || Upsilon_1^{-1}(T) Upsilon_2(T) ||_2
  double last_diagnostic = 0.0;
  Eigen::Matrix2d upsilon1_inv = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d upsilon2 = Eigen::Matrix2d::Zero();
};

/// log det Phi_1(T) through the diagonalized system
///   Upsilon_1' = lambda Upsilon_1 A,   Upsilon_2' = -lambda Upsilon_2 A,
///   Phi_1 = a+ Upsilon_1 + a- Upsilon_2,
/// with det Upsilon_1 taken from Liouville's formula and Upsilon_1^{-1},
/// Upsilon_2 integrated directly (both stay bounded, so large T is safe).
LogDetReport logdet_route(double mu, double theta, const PsiInterpolant& psi, double horizon,
                          std::size_t steps);

/// Initial conditions of the diagonalized system.
Eigen::Matrix2d upsilon1_initial(double mu, double theta, double horizon);
Eigen::Matrix2d upsilon2_initial(double mu, double theta, double horizon);

struct MonteCarloLaplace {
  double mean = 1.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
};

/// Sample mean of exp(-mu q) over per-replication q = (1/T) int Q^2 d<M>.
MonteCarloLaplace montecarlo_laplace(double mu, std::span<const double> q_energies);

/// Full pipeline: simulate R paths, estimate, average exp(-mu q_energy).
MonteCarloLaplace montecarlo_laplace(double mu, double theta, HurstParam h, double horizon,
                                     std::size_t steps, std::size_t replications,
                                     std::uint64_t seed, std::size_t threads = 0);

/// Growth diagnostics of the bracket on [from, T].
struct ConditionDiagnostics {
  std::vector<double> times;
  std::vector<double> integrand;         ///< (d/dt log d<M>_t/dt)^2
  std::vector<double> partial_integral;  ///< int_from^t integrand
  std::vector<double> ratio;             ///< (1/t) max(dt/d<M>, d<M>/dt)

  /// Value of the partial integral at the grid time nearest to t.
  double integral_at(double t) const;
  /// Largest increase of the partial integral over a unit of time after
  /// `from`, relative to the integral accumulated so far.
  double max_relative_increment(double from, double window = 1.0) const;
  /// Whether the ratio decreases along the times sampled every `spacing`.
  bool ratio_decreasing(double spacing = 1.0) const;
};

/// The integrability and growth conditions on the bracket, evaluated on a
/// kernel computed out to a long horizon.
ConditionDiagnostics check_conditions(const CanonicalKernel& ck, double from = 1.0);

/// Kernel on the coarse long-horizon grid used for condition checks.
CanonicalKernel long_horizon_kernel(HurstParam h, double horizon = 200.0, double dt = 0.25);

}  // namespace mfou
