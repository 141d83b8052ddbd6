#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfou/estimator.hpp"

namespace mfou {

inline constexpr int kSchemaVersion = 1;

enum class Mode { mle, regression, laplace, spectral, kernel_dump, conditions, simulate, estimate };
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct ExperimentConfig {
  Mode mode = Mode::mle;
  double h = 0.7;
  double theta = -1.0;
  double horizon = 50.0;
  std::size_t steps = 4096;
  std::size_t replications = 500;
  std::uint64_t seed = 1;
  double x0 = 0.0;
  std::vector<double> mu_list{0.0, 0.5, 1.0};
  std::vector<double> t_list;
  /// Grid spacing for kernels used by sweeps (Laplace, bracket slopes).
  double sweep_dt = 0.1;
  bool with_oracle = false;
  std::size_t threads = 0;
  std::filesystem::path output = "results";

  /// Throws ValidationError on the first inconsistent field.
  void validate() const;
  std::string to_json() const;
  static ExperimentConfig from_json(std::string_view text);
};

struct CampaignRow {
  std::uint64_t replication = 0;
  std::uint64_t seed = 0;
  double theta_hat = 0.0;
  double standardized = 0.0;  ///< sqrt(T) (theta_hat - theta)
  double q_energy = 0.0;
  double theta_oracle = std::numeric_limits<double>::quiet_NaN();
};

struct CampaignSummary {
  ExperimentConfig config;
  std::vector<CampaignRow> rows;
  double mean_theta_hat = 0.0;
  double mean = 0.0;      ///< of the standardized values
  double variance = 0.0;  ///< of the standardized values
  double target_variance = 0.0;  ///< 2 |theta|
  double ks = 0.0;               ///< against N(0, 2 |theta|)
  double q_energy_mean = 0.0;
  double wall_seconds = 0.0;
};

/// Summary statistics recomputed from a raw table.
CampaignSummary summarize(const ExperimentConfig& config, std::vector<CampaignRow> rows);

/// R replications of simulate + canonical MLE (and the oracle when asked),
/// replication r using the stream (seed, r). Results do not depend on the
/// number of threads.
CampaignSummary run_campaign(const ExperimentConfig& config);

struct RegressionRow {
  double horizon = 0.0;
  std::size_t steps = 0;
  std::size_t replications = 0;
  double mean_error = 0.0;         ///< mean of theta_hat - theta
  double variance = 0.0;           ///< empirical variance of theta_hat
  double exact_variance = 0.0;     ///< 1 / <M>_T
  double asymptotic_variance = 0.0;  ///< v_H T^{2H-2} (h > 1/2), 1/T scale otherwise
};

/// Regression model over config.t_list, n = config.steps cells per horizon.
std::vector<RegressionRow> run_regression(const ExperimentConfig& config);

/// Long-format sweep table: one row per (parameters, statistic).
struct SweepRow {
  std::string sweep;
  double h = 0.0;
  double mu = 0.0;
  double horizon = 0.0;
  std::string statistic;
  double value = 0.0;
};

/// laplace: Riccati L_T(mu) for every (mu, T); spectral: bracket slope at
/// every T; regression: the regression table in long format.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config);

/// Full-precision, locale-independent decimal form ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);
double parse_double(std::string_view s);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// CSV text with the schema and config comment lines, a header and rows.
std::string csv_document(const ExperimentConfig& config, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

struct CsvTable {
  int schema_version = 0;
  std::optional<ExperimentConfig> config;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(std::string_view name) const;
};
CsvTable parse_csv(std::string_view text);

std::string campaign_csv(const CampaignSummary& s);
std::string campaign_summary_json(const CampaignSummary& s);
/// Raw table and config back from campaign_csv output.
CampaignSummary read_campaign_csv(std::string_view text);

std::string regression_csv(const ExperimentConfig& config, const std::vector<RegressionRow>& rows);
std::string sweep_csv(const ExperimentConfig& config, const std::vector<SweepRow>& rows);

/// Writes <dir>/<stem>.csv and <dir>/<stem>_summary.json; returns the CSV path.
std::filesystem::path write_campaign(const CampaignSummary& s, const std::filesystem::path& dir,
                                     std::string_view stem = "campaign");

}  // namespace mfou
