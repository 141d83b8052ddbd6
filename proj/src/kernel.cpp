#include "mfou/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "mfou/error.hpp"

namespace mfou {

namespace {

constexpr std::size_t row_offset(std::size_t k) { return k * (k - 1) / 2; }

// Visits the Levinson solution of every leading block. `visit(k, x)` receives
// the k-vector solving T_k x = rhs_{1..k}.
template <class Visitor>
void levinson(std::span<const double> column, std::span<const double> rhs, Visitor&& visit) {
  const std::size_t n = column.size();
  if (n == 0 || rhs.size() != n) throw ValidationError("levinson: size mismatch");
  const double r0 = column[0];
  if (!(r0 > 0.0)) throw NumericalError("levinson: non-positive diagonal");
  auto r = [&](std::size_t i) { return column[i] / r0; };

  std::vector<double> x{rhs[0] / r0};
  visit(std::size_t{1}, std::span<const double>(x));
  if (n == 1) return;

  std::vector<double> y{-r(1)};
  x.reserve(n);
  y.reserve(n);
  double beta = 1.0;
  double alpha = -r(1);
  for (std::size_t k = 1; k < n; ++k) {
    beta *= (1.0 - alpha * alpha);
    if (!(beta > 0.0)) throw NumericalError("levinson: matrix is not positive definite");

    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += r(i + 1) * x[k - 1 - i];
    const double mu = (rhs[k] / r0 - dot) / beta;
    for (std::size_t i = 0; i < k; ++i) x[i] += mu * y[k - 1 - i];
    x.push_back(mu);
    visit(k + 1, std::span<const double>(x));

    if (k + 1 < n) {
      dot = 0.0;
      for (std::size_t i = 0; i < k; ++i) dot += r(i + 1) * y[k - 1 - i];
      alpha = (-r(k + 1) - dot) / beta;
      // y <- y + alpha * reverse(y), updated pairwise in place.
      for (std::size_t i = 0, j = k - 1; i <= j; ++i, --j) {
        const double yi = y[i];
        const double yj = y[j];
        y[i] = yi + alpha * yj;
        if (i != j) y[j] = yj + alpha * yi;
        if (j == 0) break;
      }
      y.push_back(alpha);
    }
  }
}

}  // namespace

std::span<const double> CanonicalKernel::row(std::size_t k) const {
  const std::size_t n = grid_.steps();
  if (k > n) throw ValidationError("kernel row index out of range");
  if (k == 0) return {};
  if (k == n) return last_row_;
  if (packed_.empty()) {
    throw ValidationError("kernel was built with bracket-only storage; row " +
                          std::to_string(k) + " is not available");
  }
  return std::span<const double>(packed_).subspan(row_offset(k), k);
}

std::vector<double> levinson_rows(std::span<const double> column, std::span<const double> rhs) {
  const std::size_t n = column.size();
  std::vector<double> packed(n * (n + 1) / 2);
  levinson(column, rhs, [&](std::size_t k, std::span<const double> x) {
    std::copy(x.begin(), x.end(), packed.begin() + static_cast<std::ptrdiff_t>(row_offset(k)));
  });
  return packed;
}

std::vector<double> grid_derivative(std::span<const double> values, double dt) {
  const std::size_t m = values.size();
  if (m < 3) throw ValidationError("grid_derivative needs at least three points");
  std::vector<double> d(m);
  d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt);
  for (std::size_t k = 1; k + 1 < m; ++k) d[k] = (values[k + 1] - values[k - 1]) / (2.0 * dt);
  d[m - 1] = (3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) / (2.0 * dt);
  return d;
}

CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h,
                                  std::span<const double> autocovariance, KernelStorage storage) {
  const std::size_t n = grid.steps();
  if (n < 4) throw ValidationError("projection_kernel needs n >= 4 for slope estimates");
  if (autocovariance.size() != n) {
    throw ValidationError("projection_kernel: covariance does not match the grid");
  }
  const double dt = grid.dt();
  const double e = 2.0 * h.value();

  // int over cell j of r^{2H-1} dr
  std::vector<double> moment(n);
  for (std::size_t j = 0; j < n; ++j) {
    moment[j] = (std::pow(grid.time(j + 1), e) - std::pow(grid.time(j), e)) / e;
  }

  CanonicalKernel ck(grid, h);
  if (storage == KernelStorage::full) ck.packed_.resize(n * (n + 1) / 2);
  ck.bracket_.assign(n + 1, 0.0);
  ck.n_bracket_.assign(n + 1, 0.0);

  const std::vector<double> rhs(n, dt);
  levinson(autocovariance, rhs, [&](std::size_t k, std::span<const double> w) {
    double sum = 0.0;
    double nsum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += w[j];
      nsum += w[j] * moment[j];
    }
    ck.bracket_[k] = dt * sum;
    ck.n_bracket_[k] = nsum;
    if (!ck.packed_.empty()) {
      std::copy(w.begin(), w.end(), ck.packed_.begin() + static_cast<std::ptrdiff_t>(row_offset(k)));
    }
    if (k == n) ck.last_row_.assign(w.begin(), w.end());
  });

  ck.psi_cell_.resize(n);
  for (std::size_t j = 1; j <= n; ++j) {
    const double inc = ck.bracket_[j] - ck.bracket_[j - 1];
    if (!(inc > 0.0)) throw NumericalError("bracket is not strictly increasing");
    ck.psi_cell_[j - 1] = dt / inc;
  }
  ck.slope_ = grid_derivative(ck.bracket_, dt);
  ck.psi_diag_.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    if (!(ck.slope_[k] > 0.0)) throw NumericalError("bracket slope is not positive");
    ck.psi_diag_[k] = 1.0 / ck.slope_[k];
  }
  return ck;
}

CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h,
                                  const IncrementCovariance& cov, KernelStorage storage) {
  if (!(cov.grid() == grid) || cov.hurst().value() != h.value()) {
    throw ValidationError("projection_kernel: covariance was built for another grid or H");
  }
  return projection_kernel(grid, h, cov.autocovariance(), storage);
}

CanonicalKernel projection_kernel(const TimeGrid& grid, HurstParam h, KernelStorage storage) {
  const auto column = increment_autocovariance(grid, h);
  return projection_kernel(grid, h, column, storage);
}

namespace {

// c_H int_lo^hi |x - r|^{2H-2} dr, closed form.
double singular_moment(double x, double lo, double hi, double h) {
  const double a = 2.0 * h - 1.0;
  double v;
  if (x <= lo) {
    v = std::pow(hi - x, a) - std::pow(lo - x, a);
  } else if (x >= hi) {
    v = std::pow(x - lo, a) - std::pow(x - hi, a);
  } else {
    v = std::pow(x - lo, a) + std::pow(hi - x, a);
  }
  return h * v;
}

}  // namespace

NystromSolution nystrom_kernel(double t, HurstParam h, std::size_t n) {
  if (!(h.value() > 0.5)) {
    throw ValidationError("nystrom_kernel: the second kind form requires H > 1/2");
  }
  if (t < 0.0) throw ValidationError("nystrom_kernel: negative time");
  NystromSolution sol;
  sol.t = t;
  if (t == 0.0) return sol;
  if (n == 0) throw ValidationError("nystrom_kernel: need at least one node");

  const double width = t / static_cast<double>(n);
  const auto ni = static_cast<Eigen::Index>(n);
  sol.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.nodes[i] = (static_cast<double>(i) + 0.5) * width;

  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) {
      const double lo = static_cast<double>(j) * width;
      system(i, j) += singular_moment(sol.nodes[static_cast<std::size_t>(i)], lo, lo + width, h.value());
    }
  }
  if (!system.allFinite()) throw NumericalError("nystrom_kernel: non-finite quadrature weights");
  const Eigen::VectorXd g = system.partialPivLu().solve(Eigen::VectorXd::Ones(ni));
  sol.values.assign(g.data(), g.data() + n);

  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = static_cast<double>(j) * width;
    acc += singular_moment(t, lo, lo + width, h.value()) * sol.values[j];
  }
  sol.endpoint = 1.0 - acc;
  return sol;
}

double kernel_diagonal(const CanonicalKernel& ck, std::size_t k) {
  if (!(ck.hurst().value() > 0.5)) {
    throw ValidationError("kernel_diagonal: endpoint interpolation requires H > 1/2");
  }
  const auto w = ck.row(k);
  const TimeGrid& grid = ck.grid();
  const double t = grid.time(k);
  double acc = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    acc += w[j - 1] * singular_moment(t, grid.time(j - 1), grid.time(j), ck.hurst().value());
  }
  return 1.0 - acc;
}

std::vector<double> bracket_identity_residual(const CanonicalKernel& ck) {
  const auto& m = ck.bracket();
  const auto& nb = ck.n_bracket();
  const double two_h = 2.0 * ck.hurst().value();
  std::vector<double> r(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) r[k] = m[k] + two_h * nb[k] - ck.grid().time(k);
  r[0] = 0.0;
  return r;
}

std::vector<double> psi_diagonal(const CanonicalKernel& ck) {
  for (double s : ck.bracket_slope()) {
    if (!(s > 0.0)) throw NumericalError("psi_diagonal: non-positive bracket slope");
  }
  return ck.psi_diag();
}

std::vector<double> apply_kernel(const CanonicalKernel& ck, std::span<const double> path) {
  const std::size_t n = ck.grid().steps();
  if (path.size() != n + 1) throw ValidationError("apply_kernel: path does not match the grid");
  std::vector<double> inc(n);
  for (std::size_t j = 0; j < n; ++j) inc[j] = path[j + 1] - path[j];
  std::vector<double> out(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto w = ck.row(k);
    out[k] = std::inner_product(w.begin(), w.end(), inc.begin(), 0.0);
  }
  return out;
}

std::span<const double> InverseKernel::row(std::size_t k) const {
  if (k > grid_.steps()) throw ValidationError("inverse kernel row out of range");
  if (k == 0) return {};
  return std::span<const double>(packed_).subspan(row_offset(k), k);
}

std::vector<double> InverseKernel::reconstruct(std::span<const double> m) const {
  const std::size_t n = grid_.steps();
  if (m.size() != n + 1) throw ValidationError("reconstruct: path does not match the grid");
  std::vector<double> dm(n);
  for (std::size_t j = 0; j < n; ++j) dm[j] = m[j + 1] - m[j];
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto g = row(k);
    v[k] = std::inner_product(g.begin(), g.end(), dm.begin(), 0.0);
  }
  return v;
}

InverseKernel inverse_kernel(const CanonicalKernel& ck) {
  if (!ck.has_all_rows()) throw ValidationError("inverse_kernel needs a full kernel");
  const TimeGrid& grid = ck.grid();
  const std::size_t n = grid.steps();
  const double e = 2.0 * ck.hurst().value();
  const auto& bracket = ck.bracket();
  for (std::size_t m = 1; m <= n; ++m) {
    if (!(bracket[m] - bracket[m - 1] > 0.0)) {
      throw NumericalError("inverse_kernel: bracket increment vanishes");
    }
  }
  std::vector<double> pw(n + 1);
  for (std::size_t k = 0; k <= n; ++k) pw[k] = std::pow(grid.time(k), e);

  std::vector<double> packed(n * (n + 1) / 2);
  std::vector<double> phi(n);
  for (std::size_t k = 1; k <= n; ++k) {
    // phi_j = Cov(B^H_{t_k}, B^H_{t_j} - B^H_{t_{j-1}})
    for (std::size_t j = 1; j <= n; ++j) {
      const double dk_prev = std::abs(grid.time(k) - grid.time(j - 1));
      const double dk_cur = std::abs(grid.time(k) - grid.time(j));
      phi[j - 1] = 0.5 * (pw[j] - pw[j - 1] + std::pow(dk_prev, e) - std::pow(dk_cur, e));
    }
    double prev = 0.0;  // Cov(B^H_{t_k}, M_{m-1})
    for (std::size_t m = 1; m <= k; ++m) {
      const auto w = ck.row(m);
      const double cur = std::inner_product(w.begin(), w.end(), phi.begin(), 0.0);
      packed[row_offset(k) + m - 1] = 1.0 + (cur - prev) / (bracket[m] - bracket[m - 1]);
      prev = cur;
    }
  }
  return InverseKernel(grid, std::move(packed));
}

}  // namespace mfou
