#include "mfou/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "mfou/error.hpp"
#include "mfou/estimator.hpp"
#include "mfou/parallel.hpp"

namespace mfou {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kTinyIntegral = 1e-12;

void check_inputs(double mu, double theta, const PsiInterpolant& psi, double horizon,
                  std::size_t steps) {
  if (!(theta < 0.0)) throw ValidationError("Laplace transform needs theta < 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be finite and >= 0");
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (steps == 0) throw ValidationError("steps must be positive");
  if (horizon > psi.horizon() * (1.0 + 1e-12))
    throw ValidationError("horizon " + std::to_string(horizon) +
                          " beyond the psi interpolant range " + std::to_string(psi.horizon()));
}

struct GammaState {
  Eigen::Matrix2d gamma;
  double trace_integral;
};

GammaState riccati_rhs(const GammaState& s, double psi, double half_rate, double coupling) {
  const auto c = riccati_coefficients(psi);
  const Eigen::Matrix2d& g = s.gamma;
  GammaState d;
  d.gamma = -half_rate * (c.a * g + g * c.a.transpose()) + c.b - coupling * g * c.r * g;
  d.trace_integral = (g * c.r).trace();
  return d;
}

GammaState axpy(const GammaState& s, double h, const GammaState& d) {
  return {s.gamma + h * d.gamma, s.trace_integral + h * d.trace_integral};
}

double asymmetry(const Eigen::Matrix2d& m) { return std::abs(m(0, 1) - m(1, 0)); }

}  // namespace

PsiInterpolant::PsiInterpolant(const TimeGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.steps() + 1)
    throw ValidationError("psi values must have one entry per grid point");
  for (double v : values_)
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("psi must be positive and finite");
}

PsiInterpolant::PsiInterpolant(const CanonicalKernel& ck)
    : PsiInterpolant(ck.grid(), psi_diagonal(ck)) {}

PsiInterpolant PsiInterpolant::constant(double value, double horizon) {
  return PsiInterpolant(TimeGrid(horizon, 1), {value, value});
}

double PsiInterpolant::operator()(double t) const {
  const double horizon = grid_.horizon();
  if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12))
    throw ValidationError("psi requested at t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(horizon) + "]");
  const std::size_t n = grid_.steps();
  const double u = std::min(t, horizon) / grid_.dt();
  const std::size_t k = std::min(static_cast<std::size_t>(u), n - 1);
  const double w = std::clamp(u - static_cast<double>(k), 0.0, 1.0);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

RiccatiCoefficients riccati_coefficients(double psi) {
  RiccatiCoefficients c;
  c.a << 1.0, 1.0 / psi, psi, 1.0;
  c.b << 1.0 / psi, 1.0, 1.0, psi;
  c.r << psi, 1.0, 1.0, 1.0 / psi;
  return c;
}

LaplaceReport riccati_laplace(double mu, double theta, const PsiInterpolant& psi, double horizon,
                              std::size_t steps) {
  check_inputs(mu, theta, psi, horizon, steps);
  LaplaceReport report;
  report.mu = mu;
  report.horizon = horizon;
  report.l_limit = std::exp(-mu / (2.0 * std::abs(theta)));
  const double half_rate = std::abs(theta) / 2.0;
  const double coupling = mu / (2.0 * horizon);
  const double h = horizon / static_cast<double>(steps);

  GammaState s{Eigen::Matrix2d::Zero(), 0.0};
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const double p0 = psi(t);
    const double p1 = psi(t + 0.5 * h);
    const double p2 = psi(std::min(t + h, horizon));
    const auto k1 = riccati_rhs(s, p0, half_rate, coupling);
    const auto k2 = riccati_rhs(axpy(s, 0.5 * h, k1), p1, half_rate, coupling);
    const auto k3 = riccati_rhs(axpy(s, 0.5 * h, k2), p1, half_rate, coupling);
    const auto k4 = riccati_rhs(axpy(s, h, k3), p2, half_rate, coupling);
    s.gamma += h / 6.0 * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma + k4.gamma);
    s.trace_integral +=
        h / 6.0 * (k1.trace_integral + 2.0 * k2.trace_integral + 2.0 * k3.trace_integral +
                   k4.trace_integral);
    const double asym = asymmetry(s.gamma);
    report.max_asymmetry = std::max(report.max_asymmetry, asym);
    if (asym > kSymmetryTolerance * std::max(1.0, s.gamma.norm()) || !s.gamma.allFinite())
      throw NumericalError("Riccati solution lost symmetry at t = " + std::to_string(t + h));
  }
  report.l_numeric = std::exp(-mu / (4.0 * horizon) * s.trace_integral);
  return report;
}

std::vector<RiccatiState> riccati_trajectory(double mu, double theta, const PsiInterpolant& psi,
                                             double horizon, std::size_t steps,
                                             std::size_t stride) {
  check_inputs(mu, theta, psi, horizon, steps);
  if (stride == 0) throw ValidationError("stride must be positive");
  const double half_rate = std::abs(theta) / 2.0;
  const double coupling = mu / (2.0 * horizon);
  const double h = horizon / static_cast<double>(steps);

  struct Full {
    Eigen::Matrix2d g, p1, p2;
  };
  auto rhs = [&](const Full& s, double p) {
    const auto c = riccati_coefficients(p);
    Full d;
    d.g = -half_rate * (c.a * s.g + s.g * c.a.transpose()) + c.b - coupling * s.g * c.r * s.g;
    d.p1 = half_rate * s.p1 * c.a + coupling * s.p2 * c.r;
    d.p2 = s.p1 * c.b - half_rate * s.p2 * c.a.transpose();
    return d;
  };
  auto step = [](const Full& s, double hh, const Full& d) {
    return Full{s.g + hh * d.g, s.p1 + hh * d.p1, s.p2 + hh * d.p2};
  };

  Full s{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero()};
  std::vector<RiccatiState> out;
  out.push_back({0.0, s.g, s.p1, s.p2});
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const double p0 = psi(t);
    const double p1 = psi(t + 0.5 * h);
    const double p2 = psi(std::min(t + h, horizon));
    const auto k1 = rhs(s, p0);
    const auto k2 = rhs(step(s, 0.5 * h, k1), p1);
    const auto k3 = rhs(step(s, 0.5 * h, k2), p1);
    const auto k4 = rhs(step(s, h, k3), p2);
    s.g += h / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
    s.p1 += h / 6.0 * (k1.p1 + 2.0 * k2.p1 + 2.0 * k3.p1 + k4.p1);
    s.p2 += h / 6.0 * (k1.p2 + 2.0 * k2.p2 + 2.0 * k3.p2 + k4.p2);
    if ((i + 1) % stride == 0 || i + 1 == steps)
      out.push_back({i + 1 == steps ? horizon : t + h, s.g, s.p1, s.p2});
  }
  return out;
}

Eigen::Matrix2d upsilon1_initial(double mu, double theta, double horizon) {
  const double lambda = std::sqrt(theta * theta / 4.0 + mu / (2.0 * horizon));
  return Eigen::Matrix2d::Identity() * (0.5 / lambda);
}

Eigen::Matrix2d upsilon2_initial(double mu, double theta, double horizon) {
  return -upsilon1_initial(mu, theta, horizon);
}

LogDetReport logdet_route(double mu, double theta, const PsiInterpolant& psi, double horizon,
                          std::size_t steps) {
  check_inputs(mu, theta, psi, horizon, steps);
  LogDetReport r;
  const double abs_theta = std::abs(theta);
  r.lambda = std::sqrt(theta * theta / 4.0 + mu / (2.0 * horizon));
  r.a_plus = abs_theta / 2.0 + r.lambda;
  r.a_minus = abs_theta / 2.0 - r.lambda;
  const double lambda = r.lambda;
  const double h = horizon / static_cast<double>(steps);

  // Y = Upsilon_1^{-1}: Y' = -lambda A Y.  U = Upsilon_2: U' = -lambda U A.
  Eigen::Matrix2d y = upsilon1_initial(mu, theta, horizon).inverse();
  Eigen::Matrix2d u = upsilon2_initial(mu, theta, horizon);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    const Eigen::Matrix2d a0 = riccati_coefficients(psi(t)).a;
    const Eigen::Matrix2d a1 = riccati_coefficients(psi(t + 0.5 * h)).a;
    const Eigen::Matrix2d a2 = riccati_coefficients(psi(std::min(t + h, horizon))).a;
    const Eigen::Matrix2d ky1 = -lambda * a0 * y;
    const Eigen::Matrix2d ky2 = -lambda * a1 * (y + 0.5 * h * ky1);
    const Eigen::Matrix2d ky3 = -lambda * a1 * (y + 0.5 * h * ky2);
    const Eigen::Matrix2d ky4 = -lambda * a2 * (y + h * ky3);
    y += h / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    const Eigen::Matrix2d ku1 = -lambda * u * a0;
    const Eigen::Matrix2d ku2 = -lambda * (u + 0.5 * h * ku1) * a1;
    const Eigen::Matrix2d ku3 = -lambda * (u + 0.5 * h * ku2) * a1;
    const Eigen::Matrix2d ku4 = -lambda * (u + h * ku3) * a2;
    u += h / 6.0 * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
  }
  if (!y.allFinite() || !u.allFinite()) throw NumericalError("Upsilon system diverged");
  r.upsilon1_inv = y;
  r.upsilon2 = u;

  // Phi_1 = a+ Upsilon_1 (I + (a-/a+) Upsilon_1^{-1} Upsilon_2), tr A = 2.
  const Eigen::Matrix2d w = y * u;
  const double det_correction =
      (Eigen::Matrix2d::Identity() + (r.a_minus / r.a_plus) * w).determinant();
  if (!(det_correction > 0.0))
    throw NumericalError("det Phi_1(T) is not positive; Upsilon route failed");
  r.log_det_phi1 = 2.0 * std::log(r.a_plus) - 2.0 * std::log(2.0 * lambda) +
                   2.0 * lambda * horizon + std::log(det_correction);
  r.log_laplace = -0.5 * (r.log_det_phi1 - abs_theta * horizon);
  r.laplace = std::exp(r.log_laplace);
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(w);
  r.last_diagnostic = svd.singularValues()(0) / horizon;
  return r;
}

MonteCarloLaplace montecarlo_laplace(double mu, std::span<const double> q_energies) {
  if (!(mu >= 0.0)) throw ValidationError("mu must be >= 0");
  if (q_energies.empty()) throw ValidationError("no replications");
  MonteCarloLaplace out;
  out.replications = q_energies.size();
  if (mu == 0.0) return out;
  double sum = 0.0, sum2 = 0.0;
  for (double q : q_energies) {
    const double e = std::exp(-mu * q);
    sum += e;
    sum2 += e * e;
  }
  const double r = static_cast<double>(q_energies.size());
  out.mean = sum / r;
  if (q_energies.size() > 1) {
    const double var = std::max(0.0, (sum2 - r * out.mean * out.mean) / (r - 1.0));
    out.standard_error = std::sqrt(var / r);
  }
  return out;
}

MonteCarloLaplace montecarlo_laplace(double mu, double theta, HurstParam h, double horizon,
                                     std::size_t steps, std::size_t replications,
                                     std::uint64_t seed, std::size_t threads) {
  if (!(theta < 0.0)) throw ValidationError("Laplace transform needs theta < 0");
  if (replications == 0) throw ValidationError("replications must be >= 1");
  const TimeGrid grid(horizon, steps);
  const auto cov = build_increment_covariance(grid, h);
  const auto ck = projection_kernel(grid, h, cov.autocovariance(), KernelStorage::full);
  std::vector<double> q(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    q[r] = mle(simulate_path(cov, theta, 0.0, seed, r), ck).q_energy;
  });
  return montecarlo_laplace(mu, q);
}

double ConditionDiagnostics::integral_at(double t) const {
  if (times.empty()) throw ValidationError("empty diagnostics");
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (i == times.size()) return partial_integral.back();
  if (i > 0 && t - times[i - 1] < times[i] - t) --i;
  return partial_integral[i];
}

double ConditionDiagnostics::max_relative_increment(double from, double window) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < from) continue;
    const double end = times[i] + window;
    if (end > times.back() + 1e-9) break;
    const double base = partial_integral[i];
    const double grown = integral_at(end) - base;
    worst = std::max(worst, base > kTinyIntegral ? grown / base : grown);
  }
  return worst;
}

bool ConditionDiagnostics::ratio_decreasing(double spacing) const {
  double last = std::numeric_limits<double>::infinity();
  double next_time = times.empty() ? 0.0 : times.front();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] + 1e-9 < next_time) continue;
    if (!(ratio[i] < last)) return false;
    last = ratio[i];
    next_time = times[i] + spacing;
  }
  return true;
}

ConditionDiagnostics check_conditions(const CanonicalKernel& ck, double from) {
  const auto& grid = ck.grid();
  const double dt = grid.dt();
  if (!(from > 0.0) || from >= grid.horizon())
    throw ValidationError("conditions start must lie inside the kernel horizon");
  const auto& slope = ck.bracket_slope();
  std::vector<double> log_slope(slope.size());
  for (std::size_t k = 0; k < slope.size(); ++k) {
    if (!(slope[k] > 0.0)) throw NumericalError("bracket slope not positive");
    log_slope[k] = std::log(slope[k]);
  }
  const auto dlog = grid_derivative(log_slope, dt);
  const std::size_t k0 =
      static_cast<std::size_t>(std::ceil(from / dt - 1e-9));
  ConditionDiagnostics d;
  double acc = 0.0;
  for (std::size_t k = k0; k <= grid.steps(); ++k) {
    const double t = grid.time(k);
    const double f = dlog[k] * dlog[k];
    if (k > k0) acc += 0.5 * dt * (d.integrand.back() + f);
    d.times.push_back(t);
    d.integrand.push_back(f);
    d.partial_integral.push_back(acc);
    d.ratio.push_back(std::max(1.0 / slope[k], slope[k]) / t);
  }
  return d;
}

CanonicalKernel long_horizon_kernel(HurstParam h, double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > dt)) throw ValidationError("invalid long-horizon grid");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  return projection_kernel(TimeGrid(horizon, steps), h, KernelStorage::bracket_only);
}

}  // namespace mfou
