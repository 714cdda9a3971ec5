#pragma once

// Command implementations behind the localgd tool. Each command takes an
// ExperimentConfig, writes its files under config.out and returns a summary.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "localgd/libsvm_io.hpp"
#include "localgd/sweep.hpp"

namespace localgd {

/// Regularization: a fixed value, or 1/n with n the total number of rows.
struct LambdaPolicy {
  bool one_over_n = true;
  double value = 0.0;

  static LambdaPolicy parse(std::string_view text);
  double resolve(std::size_t rows) const;
  std::string describe() const;
};

/// Modeled time in units of one local gradient step: steps + rho * rounds.
struct CostModel {
  double rho = 0.0;

  double wall_clock(double steps, double rounds) const { return steps + rho * rounds; }
  /// Time of T steps synchronized every H steps.
  double wall_clock_uniform(double total_steps, double interval) const {
    return wall_clock(total_steps, total_steps / interval);
  }
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset;
  std::optional<std::size_t> dim_override;  // pad the LIBSVM feature dimension
  // Synthetic instance, used when no dataset is given.
  Variant variant = Variant::Logistic;
  std::size_t workers = 10;
  std::size_t dim = 50;
  std::size_t rows = 2000;
  std::uint64_t seed = 1;

  LambdaPolicy lambda{};
  std::optional<GammaPolicy> gamma;  // run: experiment, verify: theory when unset
  std::vector<std::size_t> intervals{1, 4, 16};
  std::size_t total_steps = 3072;
  std::vector<double> rho{0.1, 1.0, 10.0};
  std::filesystem::path out = "localgd_out";
  double tol = kDefaultReferenceTolerance;
  bool strict = false;
  std::size_t instances = 100;  // verify sweep size
  std::optional<std::size_t> fault_step;

  /// Overlays the fields present in `j` onto `base`.
  static ExperimentConfig from_json(const nlohmann::json& j, ExperimentConfig base);
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws ArgumentError on an inconsistent config.
  void validate() const;
};

/// The optimization problem a config describes, with its reference solution.
struct Problem {
  ObjectiveSuite suite;
  ReferenceSolution reference;
  bool reference_degraded = false;
  std::size_t rows = 0;
  double lambda = 0.0;
  std::string source;
};

Problem build_problem(const ExperimentConfig& config);

struct RunOutcome {
  std::size_t interval = 0;
  double gamma = 0.0;
  std::filesystem::path csv_path;
  std::filesystem::path meta_path;
  std::optional<std::size_t> divergence_step;
  std::optional<CheckReport> theorem1;  // set when gamma <= 1/(4LH)
};

struct RunSummary {
  std::vector<RunOutcome> runs;
  int exit_code() const;
};

/// CSV text for one trajectory: step, comm_rounds, wall_clock per rho,
/// f(hat_x_t) - f*, f(bar_x_t) - f*, V_t, r2_t.
std::string trajectory_csv(const TrajectoryRecord& traj, const std::vector<double>& rho);

RunSummary cmd_run(const ExperimentConfig& config, std::ostream& log);

struct VerifySummary {
  nlohmann::json report;
  std::size_t failed_checks = 0;
  std::size_t failed_runs = 0;
  int exit_code() const { return failed_checks == 0 && failed_runs == 0 ? 0 : 1; }
};

nlohmann::json to_json(const CheckReport& rep);

/// Property sweep (or, with a dataset, every H in the config on that dataset)
/// followed by all checks; writes verify_report.json.
VerifySummary cmd_verify(const ExperimentConfig& config, std::ostream& log);

struct PlanReport {
  PlannerResult plan;
  double smoothness = 0.0;
  double sigma2 = 0.0;
  double r0sq = 0.0;
  // Integer plan: H rounded down (>= 1), T rounded up to a multiple of H.
  double rounded_gamma = 0.0;
  std::size_t rounded_interval = 1;
  std::size_t rounded_total_steps = 0;
  std::size_t rounded_comm_rounds = 0;
  double rounded_bound = 0.0;
  bool rounded_admissible = false;
  bool gd_equivalent = false;  // eps >= 3 sigma2 / L
};

/// gamma defaults to 1/(4L).
PlanReport make_plan_report(double epsilon, double smoothness, double sigma2, double r0sq,
                            std::optional<double> gamma = std::nullopt);
nlohmann::json to_json(const PlanReport& report);
std::string plan_table(const PlanReport& report);

struct DatasetSummary {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t nnz = 0;
  std::size_t min_row_nnz = 0;
  std::size_t max_row_nnz = 0;
  double mean_row_nnz = 0.0;
};

DatasetSummary summarize(const SparseDataset& ds);
std::string summary_text(const DatasetSummary& s);

/// Formats a double with 17 significant digits.
std::string format_real(double v);

}  // namespace localgd
