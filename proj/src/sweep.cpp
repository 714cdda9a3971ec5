#include "localgd/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>

#include "localgd/errors.hpp"
#include "localgd/parallel.hpp"

namespace localgd {

GammaPolicy GammaPolicy::parse(std::string_view text) {
  if (text == "theory") return {Kind::Theory, 0.0};
  if (text == "experiment") return {Kind::Experiment, 0.0};
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v))
    throw ArgumentError("gamma must be 'theory', 'experiment' or a positive number, got '" +
                        std::string(text) + "'");
  return {Kind::Explicit, v};
}

double GammaPolicy::resolve(double smoothness, std::size_t interval) const {
  switch (kind) {
    case Kind::Theory: return 1.0 / (4.0 * smoothness * static_cast<double>(interval));
    case Kind::Experiment: return 1.0 / smoothness;
    case Kind::Explicit: return value;
  }
  return value;
}

std::string GammaPolicy::describe() const {
  switch (kind) {
    case Kind::Theory: return "theory";
    case Kind::Experiment: return "experiment";
    case Kind::Explicit: return std::to_string(value);
  }
  return {};
}

SweepInstance sweep_instance(std::size_t index, std::uint64_t base_seed) {
  static constexpr std::array<std::size_t, 4> kWorkers{1, 2, 5, 10};
  static constexpr std::array<std::size_t, 3> kDims{1, 5, 20};
  static constexpr std::array<std::size_t, 3> kIntervals{1, 2, 8};

  const std::size_t combo = index % 72;
  SweepInstance inst;
  inst.index = index;
  inst.variant = combo % 2 == 0 ? Variant::Quadratic : Variant::Logistic;
  inst.workers = kWorkers[(combo / 2) % 4];
  inst.dim = kDims[(combo / 8) % 3];
  inst.interval = kIntervals[(combo / 24) % 3];
  inst.total_steps = 8 * inst.interval;
  std::seed_seq seq{base_seed, static_cast<std::uint64_t>(index)};
  std::array<std::uint64_t, 1> s{};
  seq.generate(s.begin(), s.end());
  inst.seed = s[0];
  return inst;
}

ObjectiveSuite build_suite(const SweepInstance& inst) {
  return inst.variant == Variant::Quadratic ? make_quadratic_suite(inst.workers, inst.dim, inst.seed)
                                            : make_logistic_suite(inst.workers, inst.dim, inst.seed);
}

bool InstanceOutcome::pass() const {
  if (!error.empty()) return false;
  for (const auto& r : reports)
    if (r.status == CheckStatus::Failed) return false;
  return true;
}

std::vector<CheckReport> check_all(const TrajectoryRecord& traj, double smoothness, double sigma2,
                                   Lemma2Constants constants) {
  std::vector<CheckReport> out;
  out.push_back(check_lemma1(traj, smoothness));
  try {
    out.push_back(check_lemma2(traj, smoothness, sigma2, constants));
  } catch (const PreconditionError& e) {
    out.push_back(precondition_report("lemma2", e.what()));
  }
  out.push_back(check_lemma3(traj, smoothness));
  out.push_back(check_lemma4(traj, smoothness));
  try {
    out.push_back(check_theorem1(traj, smoothness, sigma2));
  } catch (const PreconditionError& e) {
    out.push_back(precondition_report("theorem1", e.what()));
  }
  return out;
}

void inject_fault(TrajectoryRecord& traj, const ObjectiveSuite& suite, std::size_t step,
                  double magnitude) {
  if (step > traj.steps()) throw ArgumentError("inject_fault: step beyond trajectory");
  const auto& x_star = traj.reference.x_star;
  const std::size_t d = suite.dim();

  const auto snap = std::find(traj.snapshot_steps.begin(), traj.snapshot_steps.end(), step);
  const bool has_snapshot = snap != traj.snapshot_steps.end();

  // Unit direction from x* to hat_x (first axis if unknown or zero).
  Vector dir(d, 0.0);
  const double r_norm = std::sqrt(traj.r2[step]);
  if (has_snapshot && r_norm > 0.0) {
    dir = subtract(traj.hat_x[static_cast<std::size_t>(snap - traj.snapshot_steps.begin())], x_star);
    for (auto& v : dir) v /= r_norm;
  } else {
    dir[0] = 1.0;
  }

  Vector hat = x_star;
  axpy(r_norm + magnitude * (1.0 + r_norm), dir, hat);

  const Vector r = subtract(hat, x_star);
  const Vector grad_star = suite.grad(x_star);
  traj.r2[step] = squared_norm(r);
  traj.f_hat[step] = suite.value(hat);
  traj.D[step] = traj.f_hat[step] - traj.reference.f_star - dot(grad_star, r);
  if (has_snapshot) {
    const std::size_t k = static_cast<std::size_t>(snap - traj.snapshot_steps.begin());
    traj.inner_rg[step] = dot(r, traj.avg_grad[k]);
    traj.hat_x[k] = hat;
  }
}

InstanceOutcome run_instance(const SweepInstance& inst, const SweepOptions& opts) {
  InstanceOutcome out;
  out.instance = inst;
  try {
    const ObjectiveSuite suite = build_suite(inst);
    ReferenceSolution ref;
    try {
      ref = solve_reference(suite, opts.tol);
    } catch (const ConvergenceError& e) {
      ref = e.partial();
      out.reference_degraded = true;
    }
    out.smoothness = suite.smoothness();
    out.sigma2 = ref.sigma2;
    out.reference_residual = ref.grad_norm_residual;
    out.gamma = opts.gamma.resolve(out.smoothness, inst.interval);

    std::mt19937_64 rng(inst.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x0(inst.dim);
    for (auto& v : x0) v = normal(rng);

    TrajectoryRecord traj = run_local_gd(suite, ref, out.gamma,
                                         make_uniform_schedule(inst.interval, inst.total_steps), x0);
    if (opts.fault_step) inject_fault(traj, suite, std::min(*opts.fault_step, traj.steps()));
    out.reports = check_all(traj, out.smoothness, out.sigma2, opts.constants);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<InstanceOutcome> run_property_sweep(const SweepOptions& opts) {
  std::vector<InstanceOutcome> results(opts.instances);
  parallel_for(opts.instances, opts.threads, [&](std::size_t k) {
    results[k] = run_instance(sweep_instance(k, opts.seed), opts);
  });
  return results;
}

}  // namespace localgd
