#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mfou/asymptotics.hpp"
#include "mfou/error.hpp"
#include "mfou/estimator.hpp"
#include "mfou/harness.hpp"
#include "mfou/spectral.hpp"

namespace py = pybind11;
using namespace mfou;

namespace {

py::dict path_dict(const PathSample& p) {
  py::dict d;
  d["t"] = p.grid.points();
  d["v"] = p.v;
  d["x"] = p.x;
  d["h"] = p.hurst;
  d["theta"] = p.theta;
  d["seed"] = p.seed;
  d["replication"] = p.replication;
  return d;
}

// Python keyword arguments go through the JSON config so both front ends
// share one validation path.
ExperimentConfig config_from(const std::string& mode, const py::kwargs& kw) {
  auto json = py::module_::import("json");
  py::dict d;
  for (auto item : kw) d[item.first] = item.second;
  d["mode"] = mode;
  auto c = ExperimentConfig::from_json(json.attr("dumps")(d).cast<std::string>());
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_mfou, m) {
  m.doc() = "Drift estimation for OU processes driven by mixed fractional noise";

  static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  static py::exception<IoError> io(m, "IoError", PyExc_OSError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      py::set_error(validation, e.what());
    } catch (const NumericalError& e) {
      py::set_error(numerical, e.what());
    } catch (const IoError& e) {
      py::set_error(io, e.what());
    }
  });

  m.def(
      "simulate",
      [](double h, double theta, double horizon, std::size_t steps, std::uint64_t seed,
         std::uint64_t replication, double x0) {
        const TimeGrid grid(horizon, steps);
        const auto cov = build_increment_covariance(grid, HurstParam(h));
        return path_dict(simulate_path(cov, theta, x0, seed, replication));
      },
      py::arg("h"), py::arg("theta"), py::arg("T"), py::arg("n"), py::arg("seed") = 1,
      py::arg("replication") = 0, py::arg("x0") = 0.0);

  m.def(
      "kernel",
      [](double h, double horizon, std::size_t steps) {
        const auto ck =
            projection_kernel(TimeGrid(horizon, steps), HurstParam(h), KernelStorage::bracket_only);
        py::dict d;
        d["t"] = ck.grid().points();
        d["bracket"] = ck.bracket();
        d["bracket_slope"] = ck.bracket_slope();
        d["psi"] = ck.psi_diag();
        d["n_bracket"] = ck.n_bracket();
        d["identity_residual"] = bracket_identity_residual(ck);
        return d;
      },
      py::arg("h"), py::arg("T"), py::arg("n"));

  m.def(
      "estimate",
      [](double h, double horizon, std::vector<double> x, bool oracle) {
        if (x.size() < 2) throw ValidationError("path needs at least two points");
        const TimeGrid grid(horizon, x.size() - 1);
        const HurstParam hp(h);
        PathSample p{.grid = grid, .model = PathModel::ou, .hurst = h, .theta = 0.0,
                     .x0 = x.front(), .seed = 0, .replication = 0, .v = {}, .x = std::move(x)};
        const auto cov = build_increment_covariance(grid, hp);
        const auto ck = projection_kernel(grid, hp, cov, KernelStorage::full);
        const auto est = mle(p, ck);
        py::dict d;
        d["theta_hat"] = est.theta_hat;
        d["q_energy"] = est.q_energy;
        if (oracle) d["theta_oracle"] = discrete_likelihood_oracle(p, cov).theta_hat;
        return d;
      },
      py::arg("h"), py::arg("T"), py::arg("x"), py::arg("oracle") = false);

  m.def(
      "laplace",
      [](double mu, double theta, double h, double horizon, double dt) {
        const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
        const auto psi = h == 0.5 ? PsiInterpolant::constant(2.0, horizon)
                                  : PsiInterpolant(projection_kernel(
                                        TimeGrid(horizon, steps), HurstParam(h),
                                        KernelStorage::bracket_only));
        const auto r = riccati_laplace(mu, theta, psi, horizon, 10 * steps);
        const auto l = logdet_route(mu, theta, psi, horizon, 10 * steps);
        py::dict d;
        d["riccati"] = r.l_numeric;
        d["logdet"] = l.laplace;
        d["limit"] = r.l_limit;
        d["last"] = l.last_diagnostic;
        d["max_asymmetry"] = r.max_asymmetry;
        return d;
      },
      py::arg("mu"), py::arg("theta"), py::arg("h"), py::arg("T"), py::arg("dt") = 0.1);

  m.def(
      "montecarlo_laplace",
      [](double mu, std::vector<double> q) {
        const auto r = montecarlo_laplace(mu, q);
        return py::make_tuple(r.mean, r.standard_error);
      },
      py::arg("mu"), py::arg("q_energies"));

  m.def(
      "check_conditions",
      [](double h, double horizon, double dt) {
        const auto d = check_conditions(long_horizon_kernel(HurstParam(h), horizon, dt));
        py::dict out;
        out["t"] = d.times;
        out["integrand"] = d.integrand;
        out["partial_integral"] = d.partial_integral;
        out["ratio"] = d.ratio;
        out["max_increment_after_50"] =
            horizon > 51.0 ? py::cast(d.max_relative_increment(50.0)) : py::none();
        out["ratio_decreasing"] = d.ratio_decreasing();
        return out;
      },
      py::arg("h"), py::arg("T") = 200.0, py::arg("dt") = 0.25);

  m.def(
      "eigen_asymptotics",
      [](double h, std::size_t n) {
        const auto e = eigen_asymptotics(build_operator(HurstParam(h), n));
        py::dict d;
        d["eigenvalues"] = e.eigenvalues;
        d["averages"] = e.averages;
        d["symmetric"] = e.symmetric;
        d["eigenvalue_slope"] = e.eigenvalue_fit.slope;
        d["average_slope"] = e.symmetric_average_fit.slope;
        d["max_antisymmetric_average"] = e.max_antisymmetric_average;
        return d;
      },
      py::arg("h"), py::arg("n") = 1024);

  m.def(
      "perturbed_endpoint_slope",
      [](double h, double min_width, double ratio) {
        const auto op = build_operator(HurstParam(h), graded_mesh(min_width, ratio));
        return perturbed_endpoint_fit(op, log_grid(-4.0, -1.0, 4)).slope;
      },
      py::arg("h"), py::arg("min_width") = 1e-14, py::arg("ratio") = 1.15);

  m.def(
      "bracket_slope_asymptotics",
      [](double h, std::vector<double> t_list, double dt) {
        const auto r = bracket_slope_asymptotics(HurstParam(h), t_list, dt);
        py::dict d;
        d["T"] = r.fit.abscissae;
        d["bracket_slope"] = r.fit.ordinates;
        d["slope"] = r.fit.slope;
        d["m2_ratio"] = r.m2_ratio;
        return d;
      },
      py::arg("h"), py::arg("T_list"), py::arg("dt") = 0.1);

  m.def("regression_variance_constant", &regression_variance_constant, py::arg("h"));

  m.def(
      "run_campaign",
      [](const py::kwargs& kw) {
        const auto s = run_campaign(config_from("mle", kw));
        py::dict d;
        std::vector<double> theta_hat, z, q;
        for (const auto& r : s.rows) {
          theta_hat.push_back(r.theta_hat);
          z.push_back(r.standardized);
          q.push_back(r.q_energy);
        }
        d["theta_hat"] = theta_hat;
        d["standardized"] = z;
        d["q_energy"] = q;
        d["mean"] = s.mean;
        d["variance"] = s.variance;
        d["ks"] = s.ks;
        d["csv"] = campaign_csv(s);
        return d;
      });

  m.def(
      "run_sweep",
      [](const std::string& mode, const py::kwargs& kw) {
        const auto cfg = config_from(mode, kw);
        py::list out;
        for (const auto& r : run_sweep(cfg)) {
          py::dict d;
          d["sweep"] = r.sweep;
          d["h"] = r.h;
          d["mu"] = r.mu;
          d["T"] = r.horizon;
          d["statistic"] = r.statistic;
          d["value"] = r.value;
          out.append(d);
        }
        return out;
      },
      py::arg("mode"));
}
