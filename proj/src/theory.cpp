#include "localgd/theory.hpp"

#include <algorithm>
#include <cmath>

#include "localgd/errors.hpp"

namespace localgd {

namespace {

constexpr double kRoundingTolerance = 1e-12;

void require_complete(const TrajectoryRecord& traj) {
  const std::size_t n = traj.steps() + 1;
  if (traj.reference.x_star.empty())
    throw ArgumentError("trajectory has no reference solution attached");
  for (const auto* s : {&traj.V, &traj.g_norm2, &traj.inner_rg, &traj.D, &traj.r2})
    if (s->size() != n) throw ArgumentError("trajectory scalar series is incomplete");
}

void record(CheckReport& rep, std::size_t index, const char* form, double lhs, double rhs,
            double slack) {
  ++rep.total_points;
  rep.slack_used = std::max(rep.slack_used, slack);
  if (!(lhs - rhs <= slack)) rep.violations.push_back({index, form, lhs, rhs, lhs - rhs});
}

CheckReport finish(CheckReport rep) {
  rep.pass = rep.violations.empty();
  rep.status = rep.pass ? CheckStatus::Passed : CheckStatus::Failed;
  return rep;
}

void require_admissible(const TrajectoryRecord& traj, double smoothness, const char* what) {
  const std::size_t h = traj.schedule.interval();
  if (!stepsize_admissible(traj.gamma, smoothness, h))
    throw PreconditionError(std::string(what) + ": requires gamma <= 1/(4LH), got gamma=" +
                            std::to_string(traj.gamma) + " with L=" + std::to_string(smoothness) +
                            ", H=" + std::to_string(h));
}

}  // namespace

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Passed: return "pass";
    case CheckStatus::Failed: return "fail";
    case CheckStatus::PreconditionNotMet: return "precondition";
  }
  return "unknown";
}

std::string_view to_string(AccuracyRegime r) {
  return r == AccuracyRegime::LowAccuracy ? "low-accuracy" : "high-accuracy";
}

CheckReport precondition_report(std::string name, std::string note) {
  CheckReport rep;
  rep.name = std::move(name);
  rep.pass = true;
  rep.status = CheckStatus::PreconditionNotMet;
  rep.note = std::move(note);
  return rep;
}

bool stepsize_admissible(double gamma, double smoothness, std::size_t interval) {
  return gamma > 0.0 &&
         4.0 * smoothness * static_cast<double>(interval) * gamma <= 1.0 + kRoundingTolerance;
}

CheckReport check_lemma1(const TrajectoryRecord& traj, double smoothness) {
  require_complete(traj);
  const double g = traj.gamma;
  const double l = smoothness;
  const bool simplified = stepsize_admissible(g, l, 1);

  CheckReport rep;
  rep.name = "lemma1";
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const double slack = kCheckSlack * (1.0 + traj.r2[t]);
    const double lhs = traj.r2[t + 1];
    record(rep, t, "general", lhs,
           traj.r2[t] + g * l * (1.0 + 2.0 * g * l) * traj.V[t] -
               2.0 * g * (1.0 - 2.0 * g * l) * traj.D[t],
           slack);
    if (simplified)
      record(rep, t, "simplified", lhs, traj.r2[t] + 1.5 * g * l * traj.V[t] - g * traj.D[t],
             slack);
  }
  if (!simplified) rep.note = "simplified form skipped: gamma > 1/(4L)";
  return finish(std::move(rep));
}

CheckReport check_lemma2(const TrajectoryRecord& traj, double smoothness, double sigma2,
                         Lemma2Constants constants) {
  require_complete(traj);
  require_admissible(traj, smoothness, "check_lemma2");
  const double g = traj.gamma;
  const double l = smoothness;
  const double h = static_cast<double>(traj.schedule.interval());
  const double gh2 = g * g * h * h;

  CheckReport rep;
  rep.name = "lemma2";
  const auto& times = traj.schedule.sync_times();
  for (std::size_t p = 0; p + 1 < times.size(); ++p) {
    double sum_v = 0.0;
    double sum_d = 0.0;
    for (std::size_t t = times[p]; t < times[p + 1]; ++t) {
      sum_v += traj.V[t];
      sum_d += traj.D[t];
    }
    const double len = static_cast<double>(times[p + 1] - times[p]);
    const double slack = kCheckSlack * (1.0 + sigma2 + std::abs(sum_d));
    const double lhs2 = 1.5 * l * sum_v - sum_d;

    record(rep, p, "variance", sum_v, 5.0 * l * gh2 * sum_d + len * 8.0 * gh2 * sigma2, slack);
    record(rep, p, "combined", lhs2, -0.5 * sum_d + len * 12.0 * l * gh2 * sigma2, slack);
    if (constants == Lemma2Constants::Strict) {
      record(rep, p, "variance-proof-constant", sum_v,
             5.0 * l * gh2 * sum_d + len * 7.5 * gh2 * sigma2, slack);
      record(rep, p, "combined-proof-constant", lhs2,
             -0.5 * sum_d + len * 11.25 * l * gh2 * sigma2, slack);
    }
  }
  return finish(std::move(rep));
}

CheckReport check_lemma3(const TrajectoryRecord& traj, double smoothness) {
  require_complete(traj);
  const double l = smoothness;
  CheckReport rep;
  rep.name = "lemma3";
  for (std::size_t t = 0; t <= traj.steps(); ++t) {
    const double rhs = 2.0 * l * l * traj.V[t] + 4.0 * l * traj.D[t];
    const double slack =
        kCheckSlack * (1.0 + traj.g_norm2[t] + 2.0 * l * l * traj.V[t] + 4.0 * l * std::abs(traj.D[t]));
    record(rep, t, "average-gradient", traj.g_norm2[t], rhs, slack);
  }
  return finish(std::move(rep));
}

CheckReport check_lemma4(const TrajectoryRecord& traj, double smoothness) {
  require_complete(traj);
  const double l = smoothness;
  CheckReport rep;
  rep.name = "lemma4";
  for (std::size_t t = 0; t <= traj.steps(); ++t) {
    const double lhs = -2.0 * traj.inner_rg[t];
    const double rhs = -2.0 * traj.D[t] + l * traj.V[t];
    const double slack =
        kCheckSlack * (1.0 + std::abs(lhs) + 2.0 * std::abs(traj.D[t]) + l * traj.V[t]);
    record(rep, t, "inner-product", lhs, rhs, slack);
  }
  return finish(std::move(rep));
}

double theorem1_bound(double gamma, std::size_t total_steps, std::size_t interval,
                      double smoothness, double sigma2, double r0sq) {
  if (total_steps == 0 || interval == 0)
    throw ArgumentError("theorem1_bound: T and H must be >= 1");
  if (!stepsize_admissible(gamma, smoothness, interval))
    throw ArgumentError("theorem1_bound: requires 0 < gamma <= 1/(4LH)");
  const double t = static_cast<double>(total_steps);
  const double h = static_cast<double>(interval);
  return 2.0 * r0sq / (gamma * t) + 24.0 * gamma * gamma * sigma2 * h * h * smoothness;
}

CheckReport check_theorem1(const TrajectoryRecord& traj, double smoothness, double sigma2) {
  require_complete(traj);
  require_admissible(traj, smoothness, "check_theorem1");
  if (traj.f_bar.size() != traj.steps() + 1)
    throw ArgumentError("check_theorem1: trajectory lacks the running-average series");
  const double r0sq = traj.r2.front();
  const double f_star = traj.reference.f_star;
  const std::size_t h = traj.schedule.interval();

  CheckReport rep;
  rep.name = "theorem1";
  for (std::size_t t : traj.schedule.sync_times()) {
    if (t == 0) continue;
    const double lhs = traj.f_bar[t] - f_star;
    const double rhs = theorem1_bound(traj.gamma, t, h, smoothness, sigma2, r0sq);
    record(rep, t, "ergodic-gap", lhs, rhs, kCheckSlack * (1.0 + std::abs(lhs)));
  }
  return finish(std::move(rep));
}

double planner_rate_constant(double epsilon, double smoothness, double sigma2) {
  return std::max(smoothness, std::sqrt(sigma2) * std::sqrt(3.0 * smoothness / epsilon));
}

PlannerResult plan_communication(double epsilon, double smoothness, double sigma2, double r0sq,
                                 double gamma) {
  if (!(epsilon > 0.0)) throw ArgumentError("plan_communication: epsilon must be > 0");
  if (!(smoothness > 0.0)) throw ArgumentError("plan_communication: L must be > 0");
  if (!(sigma2 >= 0.0) || !(r0sq >= 0.0))
    throw ArgumentError("plan_communication: sigma2 and r0sq must be >= 0");
  if (!stepsize_admissible(gamma, smoothness, 1))
    throw ArgumentError("plan_communication: requires 0 < gamma <= 1/(4L)");

  const double rate = planner_rate_constant(epsilon, smoothness, sigma2);
  PlannerResult res;
  res.epsilon = epsilon;
  res.gamma = gamma;
  res.total_steps = 4.0 * r0sq / (epsilon * gamma);
  res.interval = 1.0 / (4.0 * rate * gamma);
  res.comm_rounds = res.total_steps / res.interval;
  res.lower_bound_comm = 16.0 * r0sq / epsilon * rate;
  res.regime = epsilon >= 3.0 * sigma2 / smoothness ? AccuracyRegime::LowAccuracy
                                                    : AccuracyRegime::HighAccuracy;
  return res;
}

double corollary_stepsize(std::size_t total_steps, std::size_t workers, double smoothness) {
  return std::sqrt(static_cast<double>(workers)) /
         (4.0 * smoothness * std::sqrt(static_cast<double>(total_steps)));
}

double corollary_bound(std::size_t total_steps, std::size_t workers, std::size_t interval,
                       double smoothness, double sigma2, double r0sq) {
  if (total_steps == 0 || workers == 0 || interval == 0)
    throw ArgumentError("corollary_bound: T, M and H must be >= 1");
  const double t = static_cast<double>(total_steps);
  const double m = static_cast<double>(workers);
  const double h = static_cast<double>(interval);
  if (h * h * m > t) throw ArgumentError("corollary_bound: requires H <= sqrt(T)/sqrt(M)");

  const double bound =
      8.0 * smoothness * r0sq / std::sqrt(m * t) + 3.0 * m * sigma2 * h * h / (2.0 * smoothness * t);
  const double via_theorem = theorem1_bound(corollary_stepsize(total_steps, workers, smoothness),
                                            total_steps, interval, smoothness, sigma2, r0sq);
  if (std::abs(bound - via_theorem) > 1e-11 * std::abs(bound))
    throw NumericError("corollary_bound disagrees with theorem1_bound", {bound, via_theorem});
  return bound;
}

CorollarySchedule corollary_schedule(std::size_t total_steps, std::size_t workers) {
  const double t = static_cast<double>(total_steps);
  const double m = static_cast<double>(workers);
  const double h = std::pow(t, 0.25) * std::pow(m, -0.75);
  return {h, t / h};
}

}  // namespace localgd
