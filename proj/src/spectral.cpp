#include "mfou/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mfou/error.hpp"
#include "mfou/kernel.hpp"
#include "mfou/stats.hpp"

namespace mfou {

namespace {

void require_long_memory(HurstParam h) {
  if (!(h.value() > 0.5))
    throw ValidationError("the operator kernel is only locally integrable for h > 1/2");
}

void fill_edges(OperatorMatrix& op) {
  const std::size_t n = op.widths.size();
  op.edges.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) op.edges[i + 1] = op.edges[i] + op.widths[i];
  op.edges[n] = 1.0;
  op.sqrt_widths.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    op.sqrt_widths(static_cast<Eigen::Index>(i)) = std::sqrt(op.widths[i]);
}

}  // namespace

std::vector<double> OperatorMatrix::midpoints() const {
  std::vector<double> mid(size());
  for (std::size_t i = 0; i < size(); ++i) mid[i] = 0.5 * (edges[i] + edges[i + 1]);
  return mid;
}

OperatorMatrix build_operator(HurstParam h, std::size_t n) {
  require_long_memory(h);
  if (n < 64) throw ValidationError("operator needs n >= 64");
  OperatorMatrix op{h, {}, std::vector<double>(n, 1.0 / static_cast<double>(n)), {}, {}};
  fill_edges(op);
  const double scale = std::pow(static_cast<double>(n), 1.0 - 2.0 * h.value());
  std::vector<double> rho(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kd = static_cast<double>(k);
    rho[k] = scale * fbm_increment_covariance(0.0, 1.0, kd, kd + 1.0, h);
  }
  const auto m = static_cast<Eigen::Index>(n);
  op.k_matrix.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      op.k_matrix(i, j) = rho[static_cast<std::size_t>(std::abs(i - j))];
  return op;
}

OperatorMatrix build_operator(HurstParam h, std::span<const double> widths) {
  require_long_memory(h);
  const std::size_t n = widths.size();
  if (n < 2) throw ValidationError("operator needs at least two cells");
  for (double w : widths)
    if (!(w > 0.0)) throw ValidationError("mesh widths must be positive");
  const double total = std::accumulate(widths.begin(), widths.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mesh widths must sum to 1");

  OperatorMatrix op{h, {}, std::vector<double>(widths.begin(), widths.end()), {}, {}};
  fill_edges(op);
  // Distance of each cell's near edge from x = 0 and from x = 1.
  std::vector<double> from_left(n, 0.0), from_right(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) from_left[i] = from_left[i - 1] + op.widths[i - 1];
  for (std::size_t i = n - 1; i-- > 0;) from_right[i] = from_right[i + 1] + op.widths[i + 1];
  std::vector<bool> right_half(n);
  for (std::size_t i = 0; i < n; ++i) right_half[i] = from_right[i] < from_left[i];

  const auto m = static_cast<Eigen::Index>(n);
  op.k_matrix.resize(m, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      // Frame of the narrower cell, so that its width survives exactly.
      const std::size_t narrow = op.widths[i] <= op.widths[j] ? i : j;
      double g;
      if (right_half[narrow]) {
        g = fbm_increment_covariance(from_right[i], from_right[i] + op.widths[i], from_right[j],
                                     from_right[j] + op.widths[j], h);
      } else {
        g = fbm_increment_covariance(from_left[i], from_left[i] + op.widths[i], from_left[j],
                                     from_left[j] + op.widths[j], h);
      }
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      op.k_matrix(a, b) = op.k_matrix(b, a) = g / (op.sqrt_widths(a) * op.sqrt_widths(b));
    }
  }
  return op;
}

std::vector<double> graded_mesh(double min_width, double ratio, double max_width) {
  if (!(min_width > 0.0) || !(ratio > 1.0) || !(max_width >= min_width) || !(max_width < 0.25))
    throw ValidationError("graded mesh needs 0 < min_width <= max_width < 1/4 and ratio > 1");
  std::vector<double> side;
  double sum = 0.0;
  for (double w = min_width; w < max_width && sum + w < 0.5; w *= ratio) {
    side.push_back(w);
    sum += w;
  }
  const double middle = 1.0 - 2.0 * sum;
  const auto cells = static_cast<std::size_t>(std::ceil(middle / max_width - 1e-12));
  std::vector<double> widths(side);
  widths.insert(widths.end(), std::max<std::size_t>(cells, 1),
                middle / static_cast<double>(std::max<std::size_t>(cells, 1)));
  widths.insert(widths.end(), side.rbegin(), side.rend());
  return widths;
}

double kernel_row_integral(HurstParam h, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must lie in [0, 1]");
  const double a = 2.0 * h.value() - 1.0;
  return h.value() * (std::pow(x, a) + std::pow(1.0 - x, a));
}

Eigen::VectorXd operator_row_averages(const OperatorMatrix& op) {
  return (op.k_matrix * op.sqrt_widths).cwiseQuotient(op.sqrt_widths);
}

AsymptoticsFit fit_loglog(std::vector<double> x, std::vector<double> y, std::size_t begin,
                          std::size_t end) {
  if (x.size() != y.size()) throw ValidationError("fit series differ in length");
  if (end > x.size() || end < begin + 2) throw ValidationError("fit window needs two points");
  std::vector<double> lx, ly;
  for (std::size_t i = begin; i < end; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw NumericalError("log-log fit met a non-positive value at index " + std::to_string(i));
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const auto lf = linear_fit(lx, ly);
  AsymptoticsFit f;
  f.abscissae = std::move(x);
  f.ordinates = std::move(y);
  f.window_begin = begin;
  f.window_end = end;
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.residual = lf.residual;
  return f;
}

AsymptoticsFit fit_loglog(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  return fit_loglog(std::move(x), std::move(y), 0, n);
}

std::pair<std::size_t, std::size_t> eigen_fit_window(std::size_t n) {
  const auto nd = static_cast<double>(n);
  return {static_cast<std::size_t>(std::ceil(std::pow(nd, 0.2))),
          static_cast<std::size_t>(std::floor(std::pow(nd, 0.8)))};
}

EigenAsymptotics eigen_asymptotics(const OperatorMatrix& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.k_matrix);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  EigenAsymptotics out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  out.averages = out.eigenvectors.transpose() * op.sqrt_widths;
  out.min_eigenvalue_ratio = out.eigenvalues(n - 1) / out.eigenvalues(0);

  const auto [lo, hi] = eigen_fit_window(op.size());
  std::vector<double> idx(op.size()), lam(op.size());
  std::vector<double> sym_idx, sym_avg;
  std::size_t sym_begin = 0, sym_end = 0;
  out.symmetric.resize(op.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto v = out.eigenvectors.col(k);
    const double parity = v.dot(v.reverse());
    const bool sym = parity > 0.0;
    out.symmetric[static_cast<std::size_t>(k)] = sym;
    const auto index = static_cast<std::size_t>(k) + 1;
    idx[index - 1] = static_cast<double>(index);
    lam[index - 1] = out.eigenvalues(k);
    if (sym) {
      if (index < lo) ++sym_begin;
      if (index <= hi) ++sym_end;
      sym_idx.push_back(static_cast<double>(index));
      sym_avg.push_back(std::abs(out.averages(k)));
    } else {
      out.max_antisymmetric_average =
          std::max(out.max_antisymmetric_average, std::abs(out.averages(k)) / v.norm());
    }
  }
  out.eigenvalue_fit = fit_loglog(std::move(idx), std::move(lam), lo - 1, hi);
  out.symmetric_average_fit = fit_loglog(std::move(sym_idx), std::move(sym_avg), sym_begin, sym_end);
  return out;
}

PerturbedSolution solve_perturbed(const OperatorMatrix& op, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ValidationError("epsilon must be positive and finite");
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd a = op.k_matrix;
  a.diagonal().array() += epsilon;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError("eps I + K is not positive definite");
  const Eigen::VectorXd v = llt.solve(op.sqrt_widths);
  PerturbedSolution sol;
  sol.epsilon = epsilon;
  sol.u = v.cwiseQuotient(op.sqrt_widths);
  sol.u_at_1 = sol.u(n - 1);
  sol.rcond = llt.rcond();
  const Eigen::VectorXd r =
      (epsilon * v + op.k_matrix * v - op.sqrt_widths).cwiseQuotient(op.sqrt_widths);
  sol.residual = r.cwiseAbs().maxCoeff() / sol.u.cwiseAbs().maxCoeff();
  return sol;
}

Eigen::VectorXd spectral_reconstruction(const OperatorMatrix& op, const EigenAsymptotics& eig,
                                        double epsilon) {
  const Eigen::VectorXd coef =
      eig.averages.array() / (epsilon + eig.eigenvalues.array());
  return (eig.eigenvectors * coef).cwiseQuotient(op.sqrt_widths);
}

ShapeFit interior_shape_fit(const OperatorMatrix& op, const PerturbedSolution& sol, double lo,
                            double hi) {
  const double e = 0.5 - op.h.value();
  const auto mid = op.midpoints();
  std::vector<double> log_ratio, shape;
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i < mid.size(); ++i) {
    if (mid[i] < lo || mid[i] > hi) continue;
    const double s = std::pow(mid[i] * (1.0 - mid[i]), e);
    const double ui = sol.u(static_cast<Eigen::Index>(i));
    if (!(ui > 0.0)) throw NumericalError("perturbed solution not positive in the interior");
    log_ratio.push_back(std::log(ui / s));
    shape.push_back(s);
    cells.push_back(i);
  }
  if (cells.empty()) throw ValidationError("no cells inside the shape-fit window");
  ShapeFit f;
  f.amplitude = std::exp(mean(log_ratio));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double ui = sol.u(static_cast<Eigen::Index>(cells[k]));
    f.max_relative_deviation =
        std::max(f.max_relative_deviation, std::abs(ui / (f.amplitude * shape[k]) - 1.0));
  }
  return f;
}

std::vector<double> log_grid(double lo_exponent, double hi_exponent, std::size_t per_decade) {
  if (!(hi_exponent > lo_exponent) || per_decade == 0)
    throw ValidationError("log grid needs hi > lo and per_decade >= 1");
  const auto count = static_cast<std::size_t>(
      std::llround((hi_exponent - lo_exponent) * static_cast<double>(per_decade)));
  std::vector<double> out(count + 1);
  for (std::size_t i = 0; i <= count; ++i)
    out[i] = std::pow(10.0, lo_exponent + static_cast<double>(i) / static_cast<double>(per_decade));
  return out;
}

AsymptoticsFit perturbed_endpoint_fit(const OperatorMatrix& op, std::span<const double> eps) {
  std::vector<double> x(eps.begin(), eps.end()), y;
  for (double e : eps) y.push_back(solve_perturbed(op, e).u_at_1);
  return fit_loglog(std::move(x), std::move(y));
}

BracketSlopeAsymptotics bracket_slope_asymptotics(HurstParam h, std::span<const double> t_list,
                                                  double dt, bool cross_check) {
  if (t_list.size() < 2) throw ValidationError("bracket-slope sweep needs at least two horizons");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  const double t_max = *std::max_element(t_list.begin(), t_list.end());
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
  const TimeGrid grid(t_max, steps);
  const auto ck = projection_kernel(grid, h, KernelStorage::bracket_only);
  std::vector<double> ts, slopes;
  for (double t : t_list) {
    const double u = t / grid.dt();
    const auto k = static_cast<std::size_t>(std::llround(u));
    if (!(t > 0.0) || std::abs(u - static_cast<double>(k)) > 1e-6)
      throw ValidationError("horizon " + std::to_string(t) + " is not on the kernel grid");
    ts.push_back(t);
    slopes.push_back(ck.bracket_slope()[k]);
  }
  BracketSlopeAsymptotics out;
  out.fit = fit_loglog(ts, slopes);
  if (cross_check && h.value() > 0.5) {
    const auto op = build_operator(h, graded_mesh(1e-14, 1.15));
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double eps = std::pow(ts[i], 1.0 - 2.0 * h.value());
      const double g = eps * solve_perturbed(op, eps).u_at_1;
      out.m2_ratio.push_back(slopes[i] / (g * g));
    }
  }
  return out;
}

}  // namespace mfou
