#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfou/asymptotics.hpp"
#include "mfou/error.hpp"
#include "mfou/estimator.hpp"
#include "mfou/harness.hpp"
#include "mfou/kernel.hpp"
#include "mfou/spectral.hpp"

namespace fs = std::filesystem;
using namespace mfou;

namespace {

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

struct Cli {
  ExperimentConfig cfg;
  std::vector<std::string> mu_raw;
  std::vector<std::string> sweep_raw;
  std::vector<double> mu;
  std::vector<double> sweep_t;
  double conditions_dt = 0.25;
  bool n_given = false;
  bool t_given = false;
  bool mu_given = false;
  bool sweep_given = false;
};

std::string fmt(double v) { return format_double(v); }

// Comma-separated numbers; empty items are dropped, so "" is an empty list.
std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items)
    if (!s.empty()) out.push_back(parse_double(s));
  return out;
}

fs::path out_file(const ExperimentConfig& c, const std::string& name) { return c.output / name; }

void warn_if_coarse(double theta, const TimeGrid& grid) {
  if (euler_step_is_coarse(theta, grid))
    std::cerr << "warning: |theta| dt = " << std::abs(theta) * grid.dt()
              << " is coarse for the Euler scheme\n";
}

void report(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

void cmd_simulate(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::simulate;
  c.validate();
  const TimeGrid grid(c.horizon, c.steps);
  const auto cov = build_increment_covariance(grid, HurstParam(c.h));
  warn_if_coarse(c.theta, grid);
  const auto path = simulate_path(cov, c.theta, c.x0, c.seed, 0);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k <= grid.steps(); ++k)
    rows.push_back({std::to_string(k), fmt(grid.time(k)), fmt(path.v[k]), fmt(path.x[k])});
  const auto p = out_file(c, "path.csv");
  write_atomic(p, csv_document(c, {"k", "t", "v", "x"}, rows));
  report(p);
}

void cmd_kernel(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::kernel_dump;
  c.validate();
  const TimeGrid grid(c.horizon, c.steps);
  const auto ck = projection_kernel(grid, HurstParam(c.h), KernelStorage::bracket_only);
  const auto residual = bracket_identity_residual(ck);
  const auto last = ck.row(grid.steps());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k <= grid.steps(); ++k)
    rows.push_back({std::to_string(k), fmt(grid.time(k)), fmt(ck.bracket()[k]),
                    fmt(ck.bracket_slope()[k]), fmt(ck.psi_diag()[k]), fmt(ck.n_bracket()[k]),
                    fmt(residual[k]), k == 0 ? "nan" : fmt(last[k - 1])});
  const auto p = out_file(c, "kernel.csv");
  write_atomic(p, csv_document(c,
                               {"k", "t", "bracket", "bracket_slope", "psi_diag", "n_bracket",
                                "identity_residual", "g_last_row"},
                               rows));
  report(p);
}

void cmd_estimate(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::estimate;
  c.validate();
  const TimeGrid grid(c.horizon, c.steps);
  const HurstParam h(c.h);
  const auto cov = build_increment_covariance(grid, h);
  const auto ck = projection_kernel(grid, h, cov.autocovariance(), KernelStorage::full);
  warn_if_coarse(c.theta, grid);
  const auto path = simulate_path(cov, c.theta, c.x0, c.seed, 0);
  const auto can = mle(path, ck);
  const auto orc = discrete_likelihood_oracle(path, cov);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : {can, orc})
    rows.push_back({std::string(to_string(r.method)), fmt(r.theta_hat), fmt(r.q_energy)});
  const auto p = out_file(c, "estimate.csv");
  write_atomic(p, csv_document(c, {"method", "theta_hat", "q_energy"}, rows));
  std::cout << "canonical " << fmt(can.theta_hat) << "  oracle " << fmt(orc.theta_hat) << "\n";
  report(p);
}

void cmd_mc(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::mle;
  const auto s = run_campaign(c);
  const auto p = write_campaign(s, c.output);
  std::printf("R=%zu mean=%.4f variance=%.4f (target %.4f) KS=%.4f\n", s.rows.size(), s.mean,
              s.variance, s.target_variance, s.ks);
  report(p);
}

void cmd_laplace(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::laplace;
  if (cli.mu_given) c.mu_list = cli.mu;
  c.t_list = cli.sweep_given ? cli.sweep_t : std::vector<double>{c.horizon};
  c.validate();
  const auto rows = run_sweep(c);
  const auto p = out_file(c, "laplace.csv");
  write_atomic(p, sweep_csv(c, rows));

  double t_max = 0.0;
  for (double t : c.t_list) t_max = std::max(t_max, t);
  const auto n = static_cast<std::size_t>(std::llround(t_max / c.sweep_dt));
  const PsiInterpolant psi(
      projection_kernel(TimeGrid(t_max, n), HurstParam(c.h), KernelStorage::bracket_only));
  std::vector<std::vector<std::string>> detail;
  for (double mu : c.mu_list) {
    for (double t : c.t_list) {
      const auto steps = 10 * static_cast<std::size_t>(std::llround(t / c.sweep_dt));
      const auto r = riccati_laplace(mu, c.theta, psi, t, steps);
      const auto l = logdet_route(mu, c.theta, psi, t, steps);
      detail.push_back({fmt(mu), fmt(t), fmt(r.l_numeric), fmt(l.laplace), fmt(r.l_limit),
                        fmt(l.last_diagnostic), fmt(r.max_asymmetry)});
      std::printf("mu=%g T=%g L=%.6f logdet=%.6f limit=%.6f\n", mu, t, r.l_numeric, l.laplace,
                  r.l_limit);
    }
  }
  const auto d = out_file(c, "laplace_detail.csv");
  write_atomic(d, csv_document(c,
                               {"mu", "T", "l_riccati", "l_logdet", "l_limit", "last_diagnostic",
                                "max_asymmetry"},
                               detail));
  report(p);
  report(d);
}

void cmd_spectral(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::spectral;
  if (!cli.n_given) c.steps = 1024;
  c.t_list = cli.sweep_given
                 ? cli.sweep_t
                 : std::vector<double>{10, 15, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  c.validate();
  const HurstParam h(c.h);
  std::vector<std::vector<std::string>> fits;
  auto add_fit = [&fits](const std::string& name, const AsymptoticsFit& f) {
    fits.push_back({name, fmt(f.slope), fmt(f.intercept), fmt(f.residual),
                    std::to_string(f.window_begin), std::to_string(f.window_end)});
  };

  const auto sweep = bracket_slope_asymptotics(h, c.t_list, c.sweep_dt, c.h > 0.5);
  add_fit("bracket_slope", sweep.fit);
  std::vector<std::vector<std::string>> slope_rows;
  for (std::size_t i = 0; i < sweep.fit.abscissae.size(); ++i)
    slope_rows.push_back({fmt(sweep.fit.abscissae[i]), fmt(sweep.fit.ordinates[i]),
                          i < sweep.m2_ratio.size() ? fmt(sweep.m2_ratio[i]) : "nan"});
  write_atomic(out_file(c, "bracket_slope.csv"),
               csv_document(c, {"T", "bracket_slope", "m2_ratio"}, slope_rows));
  std::printf("bracket slope exponent %.4f\n", sweep.fit.slope);

  if (c.h > 0.5) {
    const auto op = build_operator(h, c.steps);
    const auto eig = eigen_asymptotics(op);
    add_fit("eigenvalue", eig.eigenvalue_fit);
    add_fit("symmetric_average", eig.symmetric_average_fit);
    std::vector<std::vector<std::string>> eig_rows;
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k)
      eig_rows.push_back({std::to_string(k + 1), fmt(eig.eigenvalues(k)), fmt(eig.averages(k)),
                          eig.symmetric[static_cast<std::size_t>(k)] ? "1" : "0"});
    write_atomic(out_file(c, "eigen.csv"),
                 csv_document(c, {"index", "eigenvalue", "average", "symmetric"}, eig_rows));

    const auto graded = build_operator(h, graded_mesh(1e-14, 1.15));
    const auto eps = log_grid(-4.0, -1.0, 4);
    std::vector<std::vector<std::string>> pert_rows;
    for (double e : eps) {
      const auto s = solve_perturbed(graded, e);
      pert_rows.push_back({fmt(e), fmt(s.u_at_1), fmt(s.residual), fmt(s.rcond)});
    }
    add_fit("perturbed_endpoint", perturbed_endpoint_fit(graded, eps));
    write_atomic(out_file(c, "perturbed.csv"),
                 csv_document(c, {"epsilon", "u_at_1", "residual", "rcond"}, pert_rows));
    std::printf("eigenvalue slope %.4f, symmetric average slope %.4f, endpoint slope %s\n",
                eig.eigenvalue_fit.slope, eig.symmetric_average_fit.slope, fits.back()[1].c_str());
  } else {
    std::cout << "operator spectra need h > 1/2; only the bracket-slope sweep was run\n";
  }
  const auto p = out_file(c, "fits.csv");
  write_atomic(p, csv_document(c,
                               {"fit", "slope", "intercept", "residual", "window_begin",
                                "window_end"},
                               fits));
  report(p);
}

void cmd_regression(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::regression;
  if (!cli.n_given) c.steps = 512;
  c.t_list = cli.sweep_given ? cli.sweep_t : std::vector<double>{10, 20, 40, 80};
  c.validate();
  const auto rows = run_regression(c);
  for (const auto& r : rows)
    std::printf("T=%g variance=%.6g exact=%.6g asymptotic=%.6g\n", r.horizon, r.variance,
                r.exact_variance, r.asymptotic_variance);
  const auto p = out_file(c, "regression.csv");
  write_atomic(p, regression_csv(c, rows));
  report(p);
}

void cmd_conditions(Cli& cli) {
  auto& c = cli.cfg;
  c.mode = Mode::conditions;
  if (!cli.t_given) c.horizon = 200.0;
  c.validate();
  const auto ck = long_horizon_kernel(HurstParam(c.h), c.horizon, cli.conditions_dt);
  const auto d = check_conditions(ck);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < d.times.size(); ++i)
    rows.push_back({fmt(d.times[i]), fmt(d.integrand[i]), fmt(d.partial_integral[i]),
                    fmt(d.ratio[i])});
  const auto p = out_file(c, "conditions.csv");
  write_atomic(p, csv_document(c, {"t", "integrand", "partial_integral", "ratio"}, rows));
  std::printf("integral %.6g, max unit-time growth after 50: %.3g, ratio decreasing: %s\n",
              d.partial_integral.back(),
              c.horizon > 51.0 ? d.max_relative_increment(50.0) : 0.0,
              d.ratio_decreasing() ? "yes" : "no");
  report(p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift estimation for the mixed fractional Ornstein-Uhlenbeck process"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Cli cli;
  auto& c = cli.cfg;
  app.add_option("--h", c.h, "Hurst index of the fractional part")->capture_default_str();
  app.add_option("--theta", c.theta, "drift parameter")->capture_default_str();
  auto* t_opt = app.add_option("--T", c.horizon, "time horizon")->capture_default_str();
  auto* n_opt = app.add_option("--n", c.steps, "number of grid steps")->capture_default_str();
  app.add_option("--reps", c.replications, "Monte Carlo replications")->capture_default_str();
  app.add_option("--seed", c.seed, "experiment seed")->capture_default_str();
  app.add_option("--out", c.output, "output directory")->capture_default_str();
  auto* mu_opt = app.add_option("--mu", cli.mu_raw, "Laplace arguments")->delimiter(',');
  auto* sweep_opt =
      app.add_option("--sweep-T", cli.sweep_raw, "horizons for sweeps")->delimiter(',');
  app.add_option("--x0", c.x0, "initial value")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--dt", c.sweep_dt, "grid step of sweep kernels")->capture_default_str();
  app.add_option("--conditions-dt", cli.conditions_dt, "grid step of the long-horizon kernel")
      ->capture_default_str();
  app.add_flag("--oracle", c.with_oracle, "also run the discrete-likelihood oracle");

  void (*action)(Cli&) = nullptr;
  auto sub = [&](const char* name, const char* help, void (*fn)(Cli&)) {
    app.add_subcommand(name, help)->callback([&action, fn] { action = fn; });
  };
  sub("simulate", "simulate one path of V and X", cmd_simulate);
  sub("kernel", "dump the canonical kernel, bracket and psi", cmd_kernel);
  sub("estimate", "simulate one path and estimate theta", cmd_estimate);
  sub("mc", "Monte Carlo campaign of the MLE", cmd_mc);
  sub("laplace", "Laplace transform via the Riccati system", cmd_laplace);
  sub("spectral", "operator spectrum, perturbed solve, bracket slopes", cmd_spectral);
  sub("regression", "regression estimator variance over horizons", cmd_regression);
  sub("conditions", "growth conditions on the bracket", cmd_conditions);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }
  cli.n_given = n_opt->count() > 0;
  cli.t_given = t_opt->count() > 0;
  cli.mu_given = mu_opt->count() > 0;
  cli.sweep_given = sweep_opt->count() > 0;
  try {
    cli.mu = parse_list(cli.mu_raw);
    cli.sweep_t = parse_list(cli.sweep_raw);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    action(cli);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
