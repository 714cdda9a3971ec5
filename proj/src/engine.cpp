#include "localgd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "localgd/errors.hpp"

namespace localgd {

SyncSchedule::SyncSchedule(std::vector<std::size_t> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ArgumentError("SyncSchedule needs at least {0, T} with T >= 1");
  if (times_.front() != 0) throw ArgumentError("SyncSchedule must start at 0");
  for (std::size_t p = 1; p < times_.size(); ++p) {
    if (times_[p] <= times_[p - 1])
      throw ArgumentError("SyncSchedule times must be strictly increasing");
    interval_ = std::max(interval_, times_[p] - times_[p - 1]);
  }
}

bool SyncSchedule::is_sync(std::size_t t) const {
  return std::binary_search(times_.begin(), times_.end(), t);
}

std::size_t SyncSchedule::rounds_until(std::size_t t) const {
  // sync times in (0, t]
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

SyncSchedule make_uniform_schedule(std::size_t interval, std::size_t total_steps) {
  if (interval == 0 || total_steps == 0)
    throw ArgumentError("make_uniform_schedule: H and T must be >= 1");
  if (total_steps % interval != 0)
    throw ArgumentError("make_uniform_schedule: T=" + std::to_string(total_steps) +
                        " is not a multiple of H=" + std::to_string(interval));
  std::vector<std::size_t> times;
  for (std::size_t t = 0; t <= total_steps; t += interval) times.push_back(t);
  return SyncSchedule(std::move(times));
}

SyncSchedule make_schedule_with_tail(std::size_t interval, std::size_t total_steps) {
  if (interval == 0 || total_steps == 0)
    throw ArgumentError("make_schedule_with_tail: H and T must be >= 1");
  std::vector<std::size_t> times;
  for (std::size_t t = 0; t < total_steps; t += interval) times.push_back(t);
  times.push_back(total_steps);
  return SyncSchedule(std::move(times));
}

TrajectoryRecord run_local_gd(const ObjectiveSuite& suite, const ReferenceSolution& ref,
                              double gamma, const SyncSchedule& schedule,
                              std::span<const double> x0, const RunOptions& opts) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw ArgumentError("run_local_gd: gamma must be finite and > 0");
  suite.check_dim(x0);
  suite.check_dim(ref.x_star);

  const std::size_t d = suite.dim();
  const std::size_t workers = suite.workers();
  const std::size_t total = schedule.total_steps();
  const double inv_m = 1.0 / static_cast<double>(workers);

  TrajectoryRecord rec;
  rec.gamma = gamma;
  rec.schedule = schedule;
  rec.reference = ref;
  for (auto* series : {&rec.V, &rec.g_norm2, &rec.inner_rg, &rec.D, &rec.r2, &rec.f_hat})
    series->reserve(total + 1);
  if (opts.track_running_average) rec.f_bar.reserve(total + 1);

  const Vector grad_at_star = suite.grad(ref.x_star);

  std::vector<Vector> xs(workers, Vector(x0.begin(), x0.end()));
  std::vector<Vector> grads(workers, Vector(d));
  Vector hat(d), g(d), run_sum(d, 0.0), bar(d);

  for (std::size_t t = 0;; ++t) {
    // Shifted mean: exact when all workers agree, so V vanishes at sync times.
    const Vector& base = xs.front();
    for (std::size_t j = 0; j < d; ++j) {
      double dev = 0.0;
      for (std::size_t m = 1; m < workers; ++m) dev += xs[m][j] - base[j];
      hat[j] = base[j] + dev * inv_m;
    }

    double v = 0.0;
    for (std::size_t m = 0; m < workers; ++m) v += squared_distance(xs[m], hat);
    v *= inv_m;

    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t m = 0; m < workers; ++m) {
      eval_grad_into(suite.function(m), xs[m], grads[m]);
      for (std::size_t j = 0; j < d; ++j) g[j] += grads[m][j];
    }
    for (auto& gj : g) gj *= inv_m;

    const Vector r = subtract(hat, ref.x_star);
    const double f_hat = suite.value(hat);
    const double breg = f_hat - ref.f_star - dot(grad_at_star, r);

    rec.V.push_back(v);
    rec.g_norm2.push_back(squared_norm(g));
    rec.inner_rg.push_back(dot(r, g));
    rec.D.push_back(breg);
    rec.r2.push_back(squared_norm(r));
    rec.f_hat.push_back(f_hat);

    if (opts.track_running_average) {
      if (t == 0) {
        rec.f_bar.push_back(f_hat);
      } else {
        const double inv_t = 1.0 / static_cast<double>(t);
        for (std::size_t j = 0; j < d; ++j) bar[j] = run_sum[j] * inv_t;
        rec.f_bar.push_back(suite.value(bar));
      }
    }

    const bool finite = std::isfinite(v) && std::isfinite(rec.g_norm2.back()) &&
                        std::isfinite(rec.inner_rg.back()) && std::isfinite(breg) &&
                        std::isfinite(rec.r2.back()) && std::isfinite(f_hat) &&
                        (!opts.track_running_average || std::isfinite(rec.f_bar.back()));
    if (!finite)
      throw DivergenceError("local GD diverged at step " + std::to_string(t), t);

    if (!opts.thin || schedule.is_sync(t)) {
      rec.snapshot_steps.push_back(t);
      rec.hat_x.push_back(hat);
      rec.avg_grad.push_back(g);
    }

    if (t == total) break;

    for (std::size_t j = 0; j < d; ++j) run_sum[j] += hat[j];
    for (std::size_t m = 0; m < workers; ++m) axpy(-gamma, grads[m], xs[m]);

    if (schedule.is_sync(t + 1)) {
      Vector avg(d, 0.0);
      for (std::size_t m = 0; m < workers; ++m)
        for (std::size_t j = 0; j < d; ++j) avg[j] += xs[m][j] - xs.front()[j];
      for (std::size_t j = 0; j < d; ++j) avg[j] = xs.front()[j] + avg[j] * inv_m;
      for (auto& x : xs) x = avg;
    }
  }

  const double inv_total = 1.0 / static_cast<double>(total);
  rec.bar_x_T.resize(d);
  for (std::size_t j = 0; j < d; ++j) rec.bar_x_T[j] = run_sum[j] * inv_total;
  rec.f_bar_T = suite.value(rec.bar_x_T);
  return rec;
}

TrajectoryRecord run_gd(const ObjectiveSuite& suite, const ReferenceSolution& ref, double gamma,
                        std::size_t total_steps, std::span<const double> x0,
                        const RunOptions& opts) {
  return run_local_gd(suite, ref, gamma, make_uniform_schedule(1, total_steps), x0, opts);
}

}  // namespace localgd
