#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfou/cov.hpp"

namespace mfou {

/// Galerkin matrix of (K f)(x) = int_0^1 c_H |x - y|^{2H-2} f(y) dy,
/// c_H = H (2H - 1), on a mesh of [0, 1] in the orthonormal basis of scaled
/// cell indicators e_i = 1_{cell i} / sqrt(w_i):
///   k_matrix(i, j) = int_i int_j c_H |x - y|^{2H-2} dy dx / sqrt(w_i w_j),
/// i.e. the fBm increment covariance of the two cells. Every entry comes
/// from exact cell moments; the kernel is never evaluated pointwise.
struct OperatorMatrix {
  HurstParam h;
  std::vector<double> edges;    ///< n + 1 mesh points, 0 to 1
  std::vector<double> widths;   ///< cell widths w_i
  Eigen::VectorXd sqrt_widths;  ///< <1, e_i>
  Eigen::MatrixXd k_matrix;

  std::size_t size() const { return widths.size(); }
  /// Cell midpoints.
  std::vector<double> midpoints() const;
};

/// Uniform mesh with n cells (Toeplitz). Needs h > 1/2 and n >= 64.
OperatorMatrix build_operator(HurstParam h, std::size_t n);
/// Arbitrary mesh given by its cell widths (summing to 1). Cells are placed
/// from both ends so that tiny cells near x = 1 keep their relative accuracy;
/// needs h > 1/2 and at least 2 cells.
OperatorMatrix build_operator(HurstParam h, std::span<const double> widths);

/// Widths of a mesh refined geometrically towards both ends: min_width at
/// x = 0 and x = 1, growing by `ratio` per cell until max_width.
std::vector<double> graded_mesh(double min_width, double ratio, double max_width = 0.02);

/// int_0^1 c_H |x - y|^{2H-2} dy = H (x^{2H-1} + (1 - x)^{2H-1}).
double kernel_row_integral(HurstParam h, double x);
/// Average of (K 1) over each cell, read off the matrix.
Eigen::VectorXd operator_row_averages(const OperatorMatrix& op);

struct AsymptoticsFit {
  std::vector<double> abscissae;
  std::vector<double> ordinates;
  std::size_t window_begin = 0;  ///< fit uses [window_begin, window_end)
  std::size_t window_end = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< rms residual of the log-log fit
};

/// Least-squares slope of log y against log x over [begin, end).
AsymptoticsFit fit_loglog(std::vector<double> x, std::vector<double> y, std::size_t begin,
                          std::size_t end);
AsymptoticsFit fit_loglog(std::vector<double> x, std::vector<double> y);

/// Eigen index window [ceil(n^0.2), floor(n^0.8)] (1-based, inclusive).
std::pair<std::size_t, std::size_t> eigen_fit_window(std::size_t n);

struct EigenAsymptotics {
  Eigen::VectorXd eigenvalues;   ///< descending
  Eigen::MatrixXd eigenvectors;  ///< columns match eigenvalues
  Eigen::VectorXd averages;      ///< <1, phi_k>
  std::vector<bool> symmetric;   ///< parity computed from the eigenvector
  AsymptoticsFit eigenvalue_fit;         ///< log lambda_k vs log k
  AsymptoticsFit symmetric_average_fit;  ///< log |<1, phi_k>| vs log k, symmetric k
  double max_antisymmetric_average = 0.0;  ///< max |<1, phi>| / ||phi||
  double min_eigenvalue_ratio = 0.0;       ///< lambda_min / lambda_max
};

/// Eigen-decomposition of a uniform-mesh operator and the log-log fits of
/// eigenvalues and symmetric eigenfunction averages.
EigenAsymptotics eigen_asymptotics(const OperatorMatrix& op);

struct PerturbedSolution {
  double epsilon = 0.0;
  Eigen::VectorXd u;     ///< cell averages of u_eps
  double u_at_1 = 0.0;   ///< value on the last cell
  double residual = 0.0; ///< max_i |eps u_i + (K u)_i - 1| / ||u||_inf
  double rcond = 0.0;    ///< reciprocal condition estimate of eps I + K
};

/// (eps I + K) u = 1 by Cholesky.
PerturbedSolution solve_perturbed(const OperatorMatrix& op, double epsilon);

/// The same solution assembled from the eigen-expansion
/// sum_k <1, phi_k> / (eps + lambda_k) phi_k (cell averages).
Eigen::VectorXd spectral_reconstruction(const OperatorMatrix& op, const EigenAsymptotics& eig,
                                        double epsilon);

/// Fit of u on the cells inside [lo, hi] to a x^{1/2-H} (1 - x)^{1/2-H}.
struct ShapeFit {
  double amplitude = 0.0;
  double max_relative_deviation = 0.0;
};
ShapeFit interior_shape_fit(const OperatorMatrix& op, const PerturbedSolution& sol,
                            double lo = 0.2, double hi = 0.8);

/// epsilon values 10^{lo}..10^{hi} with `per_decade` points per decade.
std::vector<double> log_grid(double lo_exponent, double hi_exponent, std::size_t per_decade);

/// log u_eps(1) against log eps.
AsymptoticsFit perturbed_endpoint_fit(const OperatorMatrix& op, std::span<const double> eps);

struct BracketSlopeAsymptotics {
  AsymptoticsFit fit;  ///< log d<M>_T/dT vs log T over the whole list
  /// d<M>_T/dT / (eps^2 u_eps(1)^2), eps = T^{1-2H}; empty unless h > 1/2.
  std::vector<double> m2_ratio;
};

/// Bracket slopes of one projection kernel computed out to max(T_list)
/// with step dt, read at each T.
BracketSlopeAsymptotics bracket_slope_asymptotics(HurstParam h, std::span<const double> t_list,
                                                  double dt = 0.1, bool cross_check = true);

}  // namespace mfou
