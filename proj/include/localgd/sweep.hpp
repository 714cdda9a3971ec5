#pragma once

// Seeded property sweep: builds random instances, runs local GD on each and
// applies every bound check to the recorded trajectory.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "localgd/synthetic.hpp"
#include "localgd/theory.hpp"

namespace localgd {

/// Stepsize rule: 1/(4LH) ("theory"), 1/L ("experiment"), or a fixed value.
struct GammaPolicy {
  enum class Kind { Theory, Experiment, Explicit };

  Kind kind = Kind::Theory;
  double value = 0.0;

  static GammaPolicy parse(std::string_view text);
  double resolve(double smoothness, std::size_t interval) const;
  std::string describe() const;
};

struct SweepInstance {
  std::size_t index = 0;
  Variant variant = Variant::Quadratic;
  std::size_t workers = 1;
  std::size_t dim = 1;
  std::size_t interval = 1;
  std::size_t total_steps = 8;
  std::uint64_t seed = 0;
};

/// Instance k of the sweep grid: variant x M in {1,2,5,10} x d in {1,5,20} x
/// H in {1,2,8}, T = 8H, cycling through all 72 combinations.
SweepInstance sweep_instance(std::size_t index, std::uint64_t base_seed);

ObjectiveSuite build_suite(const SweepInstance& inst);

struct InstanceOutcome {
  SweepInstance instance;
  double smoothness = 0.0;
  double sigma2 = 0.0;
  double gamma = 0.0;
  double reference_residual = 0.0;
  bool reference_degraded = false;
  std::vector<CheckReport> reports;
  std::string error;  // non-empty if the run itself failed

  bool pass() const;
};

struct SweepOptions {
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  GammaPolicy gamma{};
  Lemma2Constants constants = Lemma2Constants::Stated;
  double tol = kDefaultReferenceTolerance;
  std::size_t threads = 1;
  /// Perturb hat_x at this step before checking (fault injection).
  std::optional<std::size_t> fault_step;
};

/// Runs lemma 1-4 and theorem 1 checks. Checks whose stepsize condition fails
/// come back with status PreconditionNotMet instead of throwing.
std::vector<CheckReport> check_all(const TrajectoryRecord& traj, double smoothness, double sigma2,
                                   Lemma2Constants constants = Lemma2Constants::Stated);

/// Pushes hat_x at `step` radially away from x* by `magnitude * (1 + ||r_step||)`
/// and recomputes the scalars derived from it.
void inject_fault(TrajectoryRecord& traj, const ObjectiveSuite& suite, std::size_t step,
                  double magnitude = 1.0);

InstanceOutcome run_instance(const SweepInstance& inst, const SweepOptions& opts);

/// Results are returned in instance order regardless of thread count.
std::vector<InstanceOutcome> run_property_sweep(const SweepOptions& opts);

}  // namespace localgd
