#include "mfou/harness.hpp"

#include <array>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "mfou/asymptotics.hpp"
#include "mfou/error.hpp"
#include "mfou/parallel.hpp"
#include "mfou/spectral.hpp"
#include "mfou/stats.hpp"

namespace mfou {

using nlohmann::json;

namespace {

constexpr std::string_view kSchemaTag = "# mfou-schema: ";
constexpr std::string_view kConfigTag = "# config: ";

struct ModeName {
  Mode mode;
  std::string_view name;
};
constexpr ModeName kModes[] = {
    {Mode::mle, "mle"},           {Mode::regression, "regression"},
    {Mode::laplace, "laplace"},   {Mode::spectral, "spectral"},
    {Mode::kernel_dump, "kernel-dump"}, {Mode::conditions, "conditions"},
    {Mode::simulate, "simulate"}, {Mode::estimate, "estimate"},
};

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("not an unsigned integer: '" + std::string(s) + "'");
  return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string_view to_string(Mode m) {
  for (const auto& e : kModes)
    if (e.mode == m) return e.name;
  return "unknown";
}

Mode parse_mode(std::string_view s) {
  for (const auto& e : kModes)
    if (e.name == s) return e.mode;
  if (s == "kernel_dump") return Mode::kernel_dump;
  throw ValidationError("unknown mode '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  if (!(h > 0.0 && h < 1.0)) throw ValidationError("h must lie in (0, 1)");
  if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
  if ((mode == Mode::mle || mode == Mode::laplace) && !(theta < 0.0))
    throw ValidationError("mode " + std::string(to_string(mode)) + " requires theta < 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("T must be positive");
  if (steps < 4) throw ValidationError("n must be at least 4");
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (!std::isfinite(x0)) throw ValidationError("x0 must be finite");
  if (!(sweep_dt > 0.0)) throw ValidationError("sweep_dt must be positive");
  for (double mu : mu_list)
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ValidationError("mu values must be >= 0");
  for (double t : t_list)
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("T_list values must be positive");
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["mode"] = std::string(to_string(mode));
  j["h"] = h;
  j["theta"] = theta;
  j["T"] = horizon;
  j["n"] = steps;
  j["replications"] = replications;
  j["seed"] = seed;
  j["x0"] = x0;
  j["mu_list"] = mu_list;
  j["T_list"] = t_list;
  j["sweep_dt"] = sweep_dt;
  j["with_oracle"] = with_oracle;
  j["threads"] = threads;
  j["output"] = output.string();
  return j.dump();
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static constexpr std::array<std::string_view, 14> kKeys = {
      "mode", "h", "theta", "T", "n", "replications", "seed",
      "x0", "mu_list", "T_list", "sweep_dt", "with_oracle", "threads", "output"};
  for (const auto& item : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end())
      throw ValidationError("unknown config key '" + item.key() + "'");
  }
  ExperimentConfig c;
  try {
    c.mode = parse_mode(get_or<std::string>(j, "mode", "mle"));
    c.h = get_or(j, "h", c.h);
    c.theta = get_or(j, "theta", c.theta);
    c.horizon = get_or(j, "T", c.horizon);
    c.steps = get_or(j, "n", c.steps);
    c.replications = get_or(j, "replications", c.replications);
    c.seed = get_or(j, "seed", c.seed);
    c.x0 = get_or(j, "x0", c.x0);
    c.mu_list = get_or(j, "mu_list", c.mu_list);
    c.t_list = get_or(j, "T_list", c.t_list);
    c.sweep_dt = get_or(j, "sweep_dt", c.sweep_dt);
    c.with_oracle = get_or(j, "with_oracle", c.with_oracle);
    c.threads = get_or(j, "threads", c.threads);
    c.output = get_or<std::string>(j, "output", c.output.string());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field has the wrong type: ") + e.what());
  }
  return c;
}

CampaignSummary summarize(const ExperimentConfig& config, std::vector<CampaignRow> rows) {
  if (rows.empty()) throw ValidationError("campaign has no rows");
  CampaignSummary s;
  s.config = config;
  s.rows = std::move(rows);
  std::vector<double> theta_hat, z, q;
  for (const auto& r : s.rows) {
    theta_hat.push_back(r.theta_hat);
    z.push_back(r.standardized);
    q.push_back(r.q_energy);
  }
  s.mean_theta_hat = mean(theta_hat);
  s.mean = mean(z);
  s.variance = z.size() > 1 ? variance(z) : nan();
  s.target_variance = 2.0 * std::abs(config.theta);
  s.ks = ks_statistic(z, std::sqrt(s.target_variance));
  s.q_energy_mean = mean(q);
  return s;
}

CampaignSummary run_campaign(const ExperimentConfig& config) {
  config.validate();
  if (config.mode != Mode::mle) throw ValidationError("run_campaign needs mode mle");
  const auto start = std::chrono::steady_clock::now();
  const TimeGrid grid(config.horizon, config.steps);
  const HurstParam h(config.h);
  if (euler_step_is_coarse(config.theta, grid))
    std::cerr << "warning: |theta| dt = " << std::abs(config.theta) * grid.dt()
              << " is coarse for the Euler scheme\n";
  const auto cov = build_increment_covariance(grid, h);
  const auto ck = projection_kernel(grid, h, cov.autocovariance(), KernelStorage::full);
  std::vector<CampaignRow> rows(config.replications);
  const double root_t = std::sqrt(config.horizon);
  parallel_for(config.replications, config.threads, [&](std::size_t r) {
    const auto path = simulate_path(cov, config.theta, config.x0, config.seed, r);
    const auto est = mle(path, ck);
    CampaignRow row;
    row.replication = r;
    row.seed = config.seed;
    row.theta_hat = est.theta_hat;
    row.standardized = root_t * (est.theta_hat - config.theta);
    row.q_energy = est.q_energy;
    if (config.with_oracle) row.theta_oracle = discrete_likelihood_oracle(path, cov).theta_hat;
    rows[r] = row;
  });
  auto s = summarize(config, std::move(rows));
  s.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

std::vector<RegressionRow> run_regression(const ExperimentConfig& config) {
  config.validate();
  if (config.t_list.empty()) throw ValidationError("regression needs a non-empty T list");
  if (config.replications < 2) throw ValidationError("regression needs at least 2 replications");
  const HurstParam h(config.h);
  std::vector<RegressionRow> out;
  for (std::size_t i = 0; i < config.t_list.size(); ++i) {
    const double t = config.t_list[i];
    const TimeGrid grid(t, config.steps);
    const auto cov = build_increment_covariance(grid, h);
    const auto ck = projection_kernel(grid, h, cov.autocovariance(), KernelStorage::bracket_only);
    std::vector<double> errors(config.replications);
    parallel_for(config.replications, config.threads, [&](std::size_t r) {
      const auto path = simulate_regression_path(cov, config.theta, config.seed,
                                                 i * config.replications + r);
      errors[r] = regression_mle(path, ck).theta_hat - config.theta;
    });
    RegressionRow row;
    row.horizon = t;
    row.steps = config.steps;
    row.replications = config.replications;
    row.mean_error = mean(errors);
    row.variance = variance(errors);
    row.exact_variance = 1.0 / ck.bracket().back();
    if (config.h > 0.5)
      row.asymptotic_variance =
          regression_variance_constant(config.h) * std::pow(t, 2.0 * config.h - 2.0);
    else
      row.asymptotic_variance = (config.h == 0.5 ? 2.0 : 1.0) / t;
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
  config.validate();
  const HurstParam h(config.h);
  std::vector<SweepRow> rows;
  switch (config.mode) {
    case Mode::laplace: {
      if (config.t_list.empty() || config.mu_list.empty())
        throw ValidationError("laplace sweep needs non-empty mu and T lists");
      const double t_max = *std::max_element(config.t_list.begin(), config.t_list.end());
      const auto n = static_cast<std::size_t>(std::llround(t_max / config.sweep_dt));
      const PsiInterpolant psi(
          projection_kernel(TimeGrid(t_max, n), h, KernelStorage::bracket_only));
      for (double mu : config.mu_list) {
        for (double t : config.t_list) {
          const auto steps = 10 * static_cast<std::size_t>(std::llround(t / config.sweep_dt));
          const auto rep = riccati_laplace(mu, config.theta, psi, t, steps);
          rows.push_back({"laplace", config.h, mu, t, "laplace", rep.l_numeric});
        }
      }
      return rows;
    }
    case Mode::spectral: {
      if (config.t_list.empty()) throw ValidationError("bracket-slope sweep needs a T list");
      const auto res = bracket_slope_asymptotics(h, config.t_list, config.sweep_dt, false);
      for (std::size_t i = 0; i < res.fit.abscissae.size(); ++i)
        rows.push_back({"bracket_slope", config.h, nan(), res.fit.abscissae[i], "bracket_slope",
                        res.fit.ordinates[i]});
      return rows;
    }
    case Mode::regression: {
      for (const auto& r : run_regression(config)) {
        for (auto [name, value] :
             {std::pair{"mean_error", r.mean_error}, std::pair{"variance", r.variance},
              std::pair{"exact_variance", r.exact_variance},
              std::pair{"asymptotic_variance", r.asymptotic_variance}})
          rows.push_back({"regression", config.h, nan(), r.horizon, name, value});
      }
      return rows;
    }
    default:
      throw ValidationError("mode " + std::string(to_string(config.mode)) + " has no sweep axis");
  }
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("could not format a double");
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  if (s == "nan") return nan();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ValidationError("not a number: '" + std::string(s) + "'");
  return v;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_document(const ExperimentConfig& config, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  out += kSchemaTag;
  out += std::to_string(kSchemaVersion) + "\n";
  out += kConfigTag;
  // The thread count does not affect results; keep it out of the file.
  auto stored = config;
  stored.threads = 0;
  out += stored.to_json() + "\n";
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ValidationError("missing CSV column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.starts_with(kSchemaTag)) {
      t.schema_version = static_cast<int>(parse_u64(line.substr(kSchemaTag.size())));
    } else if (line.starts_with(kConfigTag)) {
      t.config = ExperimentConfig::from_json(line.substr(kConfigTag.size()));
    } else if (line.starts_with('#')) {
      continue;
    } else if (t.header.empty()) {
      t.header = split(line, ',');
    } else {
      auto cells = split(line, ',');
      if (cells.size() != t.header.size())
        throw ValidationError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ValidationError("CSV has no header");
  return t;
}

std::string campaign_csv(const CampaignSummary& s) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(s.rows.size());
  for (const auto& r : s.rows)
    rows.push_back({std::to_string(r.replication), std::to_string(r.seed),
                    format_double(r.theta_hat), format_double(r.standardized),
                    format_double(r.q_energy), format_double(r.theta_oracle)});
  return csv_document(
      s.config, {"replication", "seed", "theta_hat", "standardized", "q_energy", "theta_oracle"},
      rows);
}

std::string campaign_summary_json(const CampaignSummary& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = json::parse(s.config.to_json());
  j["replications"] = s.rows.size();
  j["mean_theta_hat"] = s.mean_theta_hat;
  j["mean_standardized"] = s.mean;
  j["variance_standardized"] = s.variance;
  j["target_variance"] = s.target_variance;
  j["ks_statistic"] = s.ks;
  j["q_energy_mean"] = s.q_energy_mean;
  j["wall_seconds"] = s.wall_seconds;
  return j.dump(2) + "\n";
}

CampaignSummary read_campaign_csv(std::string_view text) {
  const auto t = parse_csv(text);
  if (t.schema_version != kSchemaVersion)
    throw ValidationError("unsupported schema version " + std::to_string(t.schema_version));
  if (!t.config) throw ValidationError("campaign CSV carries no config line");
  const auto rep = t.column("replication"), seed = t.column("seed"), th = t.column("theta_hat"),
             z = t.column("standardized"), q = t.column("q_energy"),
             oracle = t.column("theta_oracle");
  std::vector<CampaignRow> rows;
  for (const auto& cells : t.rows)
    rows.push_back({parse_u64(cells[rep]), parse_u64(cells[seed]), parse_double(cells[th]),
                    parse_double(cells[z]), parse_double(cells[q]), parse_double(cells[oracle])});
  return summarize(*t.config, std::move(rows));
}

std::string regression_csv(const ExperimentConfig& config, const std::vector<RegressionRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({format_double(r.horizon), std::to_string(r.steps),
                     std::to_string(r.replications), format_double(r.mean_error),
                     format_double(r.variance), format_double(r.exact_variance),
                     format_double(r.asymptotic_variance)});
  return csv_document(config,
                      {"T", "n", "replications", "mean_error", "variance", "exact_variance",
                       "asymptotic_variance"},
                      cells);
}

std::string sweep_csv(const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows)
    cells.push_back({r.sweep, format_double(r.h), format_double(r.mu), format_double(r.horizon),
                     r.statistic, format_double(r.value)});
  return csv_document(config, {"sweep", "h", "mu", "T", "statistic", "value"}, cells);
}

std::filesystem::path write_campaign(const CampaignSummary& s, const std::filesystem::path& dir,
                                     std::string_view stem) {
  const auto csv = dir / (std::string(stem) + ".csv");
  write_atomic(csv, campaign_csv(s));
  write_atomic(dir / (std::string(stem) + "_summary.json"), campaign_summary_json(s));
  return csv;
}

}  // namespace mfou
