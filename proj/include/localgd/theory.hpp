#pragma once

// Convergence bounds for local GD, the communication planner, and mechanical
// checks of each bound along a recorded trajectory.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "localgd/engine.hpp"

namespace localgd {

inline constexpr double kCheckSlack = 1e-8;

enum class CheckStatus { Passed, Failed, PreconditionNotMet };

std::string_view to_string(CheckStatus s);

struct Violation {
  std::size_t index;  // step t, or epoch p for per-epoch checks
  std::string form;   // which inequality of the check
  double lhs;
  double rhs;
  double gap;  // lhs - rhs
};

struct CheckReport {
  std::string name;
  std::size_t total_points = 0;
  std::vector<Violation> violations;
  double slack_used = 0.0;  // largest slack applied at any point
  bool pass = true;
  CheckStatus status = CheckStatus::Passed;
  std::string note;
};

/// A report for a check that was not run because its stepsize condition fails.
CheckReport precondition_report(std::string name, std::string note);

/// gamma <= 1/(4 L H), up to 1e-12 relative rounding.
bool stepsize_admissible(double gamma, double smoothness, std::size_t interval);

/// Per-step optimality-gap recursion. Form "general" holds for any gamma >= 0:
///   r2_{t+1} <= r2_t + gamma L (1 + 2 gamma L) V_t - 2 gamma (1 - 2 gamma L) D_t
/// and form "simplified", checked only when gamma <= 1/(4L):
///   r2_{t+1} <= r2_t + (3/2) gamma L V_t - gamma D_t
/// Slack 1e-8 (1 + r2_t).
CheckReport check_lemma1(const TrajectoryRecord& traj, double smoothness);

enum class Lemma2Constants {
  Stated,  // 8 and 12
  Strict,  // additionally the tighter 15/2 and 45/4
};

/// Per-epoch variance bounds, for each epoch [t_p, t_{p+1} - 1]:
///   sum V_t <= 5 L g^2 H^2 sum D_i + sum 8 g^2 H^2 sigma2
///   sum (3/2 L V_t - D_t) <= -1/2 sum D_i + sum 12 L g^2 H^2 sigma2
/// Requires gamma <= 1/(4LH) (throws PreconditionError otherwise).
CheckReport check_lemma2(const TrajectoryRecord& traj, double smoothness, double sigma2,
                         Lemma2Constants constants = Lemma2Constants::Stated);

/// ||g_t||^2 <= 2 L^2 V_t + 4 L D_t
CheckReport check_lemma3(const TrajectoryRecord& traj, double smoothness);

/// -2 <hat_x_t - x*, g_t> <= -2 D_t + L V_t
CheckReport check_lemma4(const TrajectoryRecord& traj, double smoothness);

/// 2 r0sq / (gamma T) + 24 gamma^2 sigma2 H^2 L, for 0 < gamma <= 1/(4LH).
double theorem1_bound(double gamma, std::size_t total_steps, std::size_t interval,
                      double smoothness, double sigma2, double r0sq);

/// f(bar_x_t) - f* <= theorem1_bound(gamma, t, H, ...) at every sync time t > 0
/// (each prefix ending at a sync time is itself a complete run).
/// Requires gamma <= 1/(4LH) and a trajectory with the running average tracked.
CheckReport check_theorem1(const TrajectoryRecord& traj, double smoothness, double sigma2);

enum class AccuracyRegime { LowAccuracy, HighAccuracy };

std::string_view to_string(AccuracyRegime r);

struct PlannerResult {
  double epsilon = 0.0;
  double gamma = 0.0;
  double total_steps = 0.0;  // T(gamma), continuous
  double interval = 0.0;     // H(gamma), continuous
  double comm_rounds = 0.0;  // T / H
  double lower_bound_comm = 0.0;
  AccuracyRegime regime = AccuracyRegime::LowAccuracy;
};

/// max{L, sigma sqrt(3L/eps)}
double planner_rate_constant(double epsilon, double smoothness, double sigma2);

/// Minimal communication plan reaching f(bar_x_T) - f* <= eps for 0 < gamma <= 1/(4L).
PlannerResult plan_communication(double epsilon, double smoothness, double sigma2, double r0sq,
                                 double gamma);

/// Bound at gamma = sqrt(M)/(4 L sqrt(T)); requires H <= sqrt(T/M).
double corollary_bound(std::size_t total_steps, std::size_t workers, std::size_t interval,
                       double smoothness, double sigma2, double r0sq);

/// Stepsize used by corollary_bound.
double corollary_stepsize(std::size_t total_steps, std::size_t workers, double smoothness);

struct CorollarySchedule {
  double interval;     // T^{1/4} M^{-3/4}
  double comm_rounds;  // T / H = T^{3/4} M^{3/4}
};

/// Interval choice giving the 1/sqrt(MT) rate and its communication count.
CorollarySchedule corollary_schedule(std::size_t total_steps, std::size_t workers);

}  // namespace localgd
