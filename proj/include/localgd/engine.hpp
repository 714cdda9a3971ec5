#pragma once

// Local gradient descent with periodic model averaging.
//
// Every worker starts from x0. At each step t every worker takes a gradient
// step on its own f_m; whenever t+1 is a synchronization time the workers are
// replaced by their exact average, so all workers agree at every sync time.
// The record carries the analysis quantities at every step t = 0..T:
//
//   hat_x_t = (1/M) sum_m x_t^m
//   V_t     = (1/M) sum_m ||x_t^m - hat_x_t||^2
//   g_t     = (1/M) sum_m grad f_m(x_t^m)
//   D_t     = D_f(hat_x_t, x*),  r2_t = ||hat_x_t - x*||^2

#include <cstddef>
#include <span>
#include <vector>

#include "localgd/objectives.hpp"

namespace localgd {

class SyncSchedule {
 public:
  /// `times` must start at 0 and be strictly increasing; the last entry is T.
  explicit SyncSchedule(std::vector<std::size_t> times);

  const std::vector<std::size_t>& sync_times() const noexcept { return times_; }
  /// Longest gap between consecutive sync times.
  std::size_t interval() const noexcept { return interval_; }
  std::size_t total_steps() const noexcept { return times_.back(); }
  bool is_sync(std::size_t t) const;
  /// Number of averaging events in (0, t].
  std::size_t rounds_until(std::size_t t) const;

 private:
  std::vector<std::size_t> times_;
  std::size_t interval_ = 0;
};

/// {0, H, 2H, ..., T}; T must be a positive multiple of H.
SyncSchedule make_uniform_schedule(std::size_t interval, std::size_t total_steps);

/// {0, H, 2H, ..., T} with a shorter final epoch when H does not divide T.
SyncSchedule make_schedule_with_tail(std::size_t interval, std::size_t total_steps);

struct RunOptions {
  /// Keep hat_x / g vectors only at sync times (scalar series are always full).
  bool thin = false;
  /// Record f(bar_x_t) at every step (one extra objective evaluation per step).
  bool track_running_average = true;
};

struct TrajectoryRecord {
  double gamma = 0.0;
  SyncSchedule schedule{{0, 1}};
  ReferenceSolution reference;

  /// Steps at which hat_x / avg_grad were retained (every step unless thinned).
  std::vector<std::size_t> snapshot_steps;
  std::vector<Vector> hat_x;
  std::vector<Vector> avg_grad;

  // Scalar series, T+1 entries each.
  std::vector<double> V;
  std::vector<double> g_norm2;
  std::vector<double> inner_rg;
  std::vector<double> D;
  std::vector<double> r2;
  std::vector<double> f_hat;  // f(hat_x_t)
  std::vector<double> f_bar;  // f(bar_x_t), bar_x_0 := hat_x_0; empty if not tracked

  /// (1/T) sum_{t<T} hat_x_t and its objective value.
  Vector bar_x_T;
  double f_bar_T = 0.0;

  std::size_t steps() const noexcept { return schedule.total_steps(); }
};

/// Runs local GD. Throws DivergenceError at the first step producing a non-finite value.
TrajectoryRecord run_local_gd(const ObjectiveSuite& suite, const ReferenceSolution& ref,
                              double gamma, const SyncSchedule& schedule,
                              std::span<const double> x0, const RunOptions& opts = {});

/// Plain gradient descent: local GD with a sync after every step.
TrajectoryRecord run_gd(const ObjectiveSuite& suite, const ReferenceSolution& ref, double gamma,
                        std::size_t total_steps, std::span<const double> x0,
                        const RunOptions& opts = {});

}  // namespace localgd
