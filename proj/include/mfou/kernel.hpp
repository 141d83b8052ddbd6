#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfou/cov.hpp"

namespace mfou {

enum class KernelStorage {
  full,          ///< keep every row g(., t_k); O(n^2) memory
  bracket_only,  ///< keep brackets, slopes and the last row only
};

/// Discrete canonical innovation kernel of V = B + B^H on a uniform grid.
///
/// Row k (1 <= k <= n) holds the weights w^{(k)}_j, j = 1..k, with
///   M_{t_k} = E(B_{t_k} | dV_1..dV_k) = sum_j w^{(k)}_j dV_j.
/// The weights are dimensionless and approximate g(s_j, t_k) cell by cell;
/// row k is the Galerkin (piecewise constant) solution of the kernel
/// equation on [0, t_k]. The bracket is <M>_{t_k} = dt * sum_j w^{(k)}_j.
class CanonicalKernel {
 public:
  const TimeGrid& grid() const { return grid_; }
  HurstParam hurst() const { return h_; }
  bool has_all_rows() const { return !packed_.empty(); }

  /// Weights of row k, k in [0, n]; row 0 (t = 0) is empty. Throws unless the
  /// row is stored.
  std::span<const double> row(std::size_t k) const;
  double weight(std::size_t k, std::size_t j) const { return row(k)[j - 1]; }

  /// <M>_{t_k}, k = 0..n (bracket[0] = 0).
  const std::vector<double>& bracket() const { return bracket_; }
  /// d<M>_t/dt at the grid points: centred second order differences,
  /// one-sided second order at both ends.
  const std::vector<double>& bracket_slope() const { return slope_; }
  /// psi(t_k, t_k) = 1 / bracket_slope_k.
  const std::vector<double>& psi_diag() const { return psi_diag_; }
  /// Cell values dt / (<M>_{t_j} - <M>_{t_{j-1}}), j = 1..n, stored at j - 1.
  const std::vector<double>& psi_cell() const { return psi_cell_; }
  /// <N>_{t_k} = int_0^t g(r, t) r^{2H-1} dr with the weights integrated exactly
  /// against r^{2H-1} on each cell.
  const std::vector<double>& n_bracket() const { return n_bracket_; }

 private:
  friend CanonicalKernel projection_kernel(const TimeGrid&, HurstParam,
                                           std::span<const double>, KernelStorage);
  CanonicalKernel(const TimeGrid& grid, HurstParam h) : grid_(grid), h_(h) {}

  TimeGrid grid_;
  HurstParam h_;
  std::vector<double> packed_;
  std::vector<double> last_row_;
  std::vector<double> bracket_;
  std::vector<double> slope_;
  std::vector<double> psi_diag_;
  std::vector<double> psi_cell_;
  std::vector<double> n_bracket_;
};

/// Packed lower-triangular solutions of T_k x = rhs_{1..k} for every leading
/// block of the symmetric positive definite Toeplitz matrix with first column
/// `column` (Levinson recursion, O(n^2)). Row k starts at k (k - 1) / 2.
std::vector<double> levinson_rows(std::span<const double> column, std::span<const double> rhs);

/// Projection (discrete Gaussian conditioning) kernel; exact for the
/// discretely observed model and valid for every H in (0, 1). Needs n >= 4.
CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h,
                                  const IncrementCovariance& cov,
                                  KernelStorage storage = KernelStorage::full);
CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h,
                                  KernelStorage storage = KernelStorage::full);
CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h,
                                  std::span<const double> autocovariance, KernelStorage storage);

/// Collocation solution of g(s) + int_0^t c_H |s - r|^{2H-2} g(r) dr = 1.
struct NystromSolution {
  double t = 0.0;
  std::vector<double> nodes;   ///< cell midpoints
  std::vector<double> values;  ///< g at the nodes
  double endpoint = 0.0;       ///< g(t, t) from the Nystrom interpolant
};

/// Product integration: the singular factor is integrated exactly over each
/// cell against a piecewise constant g. Only defined for H > 1/2.
NystromSolution nystrom_kernel(double t, HurstParam h, std::size_t n);

/// g(t_k, t_k) recovered from row k by the same interpolation formula the
/// Nystrom solver uses at the endpoint (H > 1/2). The raw last weight is a
/// last-cell average and converges only like dt^{2H-1}.
double kernel_diagonal(const CanonicalKernel& ck, std::size_t k);

/// <M>_t + 2H <N>_t - t at every grid point.
std::vector<double> bracket_identity_residual(const CanonicalKernel& ck);

/// psi(t_k, t_k) after checking that the bracket slope stays positive.
std::vector<double> psi_diagonal(const CanonicalKernel& ck);

/// sum_{j <= k} w^{(k)}_j (path_j - path_{j-1}) for every k; applied to V this
/// is the martingale M, applied to X it is Z.
std::vector<double> apply_kernel(const CanonicalKernel& ck, std::span<const double> path);

/// Discrete inverse kernel: V_{t_k} = sum_{m <= k} gt(k, m) (M_m - M_{m-1}).
class InverseKernel {
 public:
  InverseKernel(TimeGrid grid, std::vector<double> packed)
      : grid_(grid), packed_(std::move(packed)) {}

  const TimeGrid& grid() const { return grid_; }
  /// Column entries gt(s_m, t_k), m = 1..k (empty for k = 0).
  std::span<const double> row(std::size_t k) const;
  double value(std::size_t k, std::size_t m) const { return row(k)[m - 1]; }

  /// Rebuild V from a martingale path on the same grid.
  std::vector<double> reconstruct(std::span<const double> m) const;

 private:
  TimeGrid grid_;
  std::vector<double> packed_;
};

/// gt(s, t) = 1 + d/d<M>_s Cov(B^H_t, M_s), the discrete form of
/// 1 - d/d<M>_s int_0^t g(r, s) dr. O(n^3); needs all rows.
InverseKernel inverse_kernel(const CanonicalKernel& ck);

/// Second order finite-difference derivative of grid values.
std::vector<double> grid_derivative(std::span<const double> values, double dt);

}  // namespace mfou
