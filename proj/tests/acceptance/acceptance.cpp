// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "localgd/errors.hpp"
#include "localgd/experiment.hpp"
#include "localgd/parallel.hpp"

using namespace localgd;
namespace fs = std::filesystem;

namespace {

const fs::path kData = LOCALGD_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vector random_point(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector x(d);
  for (auto& v : x) v = n(rng);
  return x;
}

// 1. Every check over the standard sweep.
Outcome lemma_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  SweepOptions opts;
  opts.threads = thread_budget();
  const auto results = run_property_sweep(opts);
  std::size_t checks = 0;
  for (const auto& r : results) {
    o.require(r.error.empty(), "instance " + std::to_string(r.instance.index) + ": " + r.error);
    o.require(r.reports.size() == 5, "instance " + std::to_string(r.instance.index) + " incomplete");
    for (const auto& rep : r.reports) {
      ++checks;
      o.require(rep.status == CheckStatus::Passed,
                "instance " + std::to_string(r.instance.index) + ": " + rep.name + " " +
                    std::string(to_string(rep.status)));
      if (rep.name == "lemma1" && r.gamma * r.smoothness <= 0.25)
        o.require(rep.total_points == 2 * r.instance.total_steps, "lemma1 simplified form not run");
      if (rep.name == "lemma2")
        o.require(rep.total_points == 2 * (r.instance.total_steps / r.instance.interval),
                  "lemma2 form count");
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 120.0, "sweep took " + fmt(secs) + " s");
  if (o.pass)
    o.detail = std::to_string(results.size()) + " instances, " + std::to_string(checks) +
               " reports, 0 violations, " + fmt(secs) + " s";
  return o;
}

// 2. H=1 is GD bitwise; M=1 is centralized GD.
Outcome gd_equivalence() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t d = 1 + k % 7;
    const auto suite = k % 2 ? make_logistic_suite(1 + k % 5, d, k) : make_quadratic_suite(1 + k % 5, d, k);
    const auto ref = solve_reference(suite);
    const auto x0 = random_point(rng, d);
    const double gamma = 1.0 / suite.smoothness();
    const auto local = run_local_gd(suite, ref, gamma, make_uniform_schedule(1, 30), x0);
    const auto gd = run_gd(suite, ref, gamma, 30, x0);
    o.require(local.hat_x == gd.hat_x && local.V == gd.V && local.r2 == gd.r2 &&
                  local.f_hat == gd.f_hat && local.f_bar == gd.f_bar,
              "H=1 differs from run_gd on instance " + std::to_string(k));

    const auto single = k % 2 ? make_logistic_suite(1, d, k + 100) : make_quadratic_suite(1, d, k + 100);
    const auto sref = solve_reference(single);
    const double sg = 1.0 / single.smoothness();
    const std::size_t H = 1 + k % 6;
    const auto run = run_local_gd(single, sref, sg, make_uniform_schedule(H, 6 * H), x0);
    Vector x = x0;
    for (std::size_t t = 0; t <= 6 * H; ++t) {
      for (std::size_t j = 0; j < d; ++j) {
        const double e = std::abs(run.hat_x[t][j] - x[j]) / std::max(std::abs(x[j]), 1e-300);
        if (x[j] != 0.0) worst = std::max(worst, e);
        o.require(x[j] != 0.0 ? e <= 1e-12 : run.hat_x[t][j] == 0.0,
                  "M=1 deviates from GD on instance " + std::to_string(k));
      }
      const Vector g = eval_grad(single.function(0), x);
      for (std::size_t j = 0; j < d; ++j) x[j] -= sg * g[j];
    }
  }
  if (o.pass) o.detail = "20 instances, H=1 bitwise, M=1 worst rel " + fmt(worst);
  return o;
}

// 3. Two shifted quadratics by hand.
Outcome analytic_oracle() {
  Outcome o;
  const ObjectiveSuite suite({make_quadratic({0.0}), make_quadratic({2.0})}, 1);
  const auto ref = solve_reference(suite, 1e-12);
  o.require(std::abs(ref.x_star[0] - 1.0) <= 1e-10, "x* = " + fmt(ref.x_star[0]));
  o.require(std::abs(ref.sigma2 - 1.0) <= 1e-10, "sigma2 = " + fmt(ref.sigma2));
  double a = 0.0, b = 0.0;
  for (int t = 0; t < 2; ++t) {
    a -= 0.25 * (a - 0.0);
    b -= 0.25 * (b - 2.0);
  }
  const auto traj = run_local_gd(suite, ref, 0.25, make_uniform_schedule(2, 2), Vector{0.0});
  o.require(b == 0.875 && (a + b) / 2 == 0.4375, "hand recurrence");
  o.require(std::abs(traj.hat_x[2][0] - 0.4375) <= 1e-15, "hat_x_2 = " + fmt(traj.hat_x[2][0]));
  if (o.pass) o.detail = "hat_x_2 = 0.4375, x* = 1, sigma2 = 1";
  return o;
}

// 4. Central finite differences.
Outcome gradient_correctness() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (auto variant : {Variant::Quadratic, Variant::Logistic}) {
    for (std::uint64_t k = 0; k < 100; ++k) {
      const std::size_t d = 1 + k % 20;
      const auto suite = variant == Variant::Quadratic ? make_quadratic_suite(2, d, k)
                                                       : make_logistic_suite(2, d, k);
      const auto& fm = suite.function(k % 2);
      Vector x = random_point(rng, d);
      const Vector g = eval_grad(fm, x);
      double xn = 0.0;
      for (double v : x) xn += v * v;
      const double h = 1e-6 * (1.0 + std::sqrt(xn));
      double err = 0.0, ref = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = eval_value(fm, x);
        x[i] = xi - h;
        const double fmn = eval_value(fm, x);
        x[i] = xi;
        const double fd = (fp - fmn) / (2 * h);
        err += (g[i] - fd) * (g[i] - fd);
        ref += fd * fd;
      }
      const double r = std::sqrt(err / ref);
      worst = std::max(worst, r);
      o.require(r <= 1e-6, std::string(to_string(variant)) + " pair " + std::to_string(k) +
                               " relative error " + fmt(r));
    }
  }
  if (o.pass) o.detail = "200 pairs, worst relative error " + fmt(worst);
  return o;
}

// 5. Planner closed form and attained lower bound.
Outcome planner_closed_form() {
  Outcome o;
  std::size_t points = 0;
  for (double eps : {1e-6, 1e-4, 1e-2, 0.3, 1.0, 30.0})
    for (double L : {0.01, 0.5, 1.0, 20.0})
      for (double s2 : {1e-8, 1e-3, 1.0, 100.0}) {
        const auto p = plan_communication(eps, L, s2, 1.0, 1.0 / (4.0 * L));
        const double expect = std::min(1.0, std::sqrt(eps * L / (3.0 * s2)));
        o.require(rel(p.interval, expect) <= 1e-12, "H(1/(4L)) mismatch at eps=" + fmt(eps));
        const double m = std::max(L, std::sqrt(s2) * std::sqrt(3.0 * L / eps));
        const double lower = 16.0 * 2.5 / eps * m;
        for (int k = 1; k <= 10; ++k) {
          const double gamma = k / (40.0 * L);
          const auto q = plan_communication(eps, L, s2, 2.5, gamma);
          o.require(rel(q.total_steps / q.interval, lower) <= 1e-12,
                    "T/H differs from the lower bound at gamma=" + fmt(gamma));
          ++points;
        }
      }
  if (o.pass) o.detail = std::to_string(points) + " (eps, L, sigma2, gamma) points";
  return o;
}

// 6. Corollary against the theorem at its stepsize.
Outcome corollary_consistency() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(1e-3, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t M = 1 + rng() % 64, T = 1 + rng() % 1000000;
    const double cap = std::sqrt(static_cast<double>(T) / static_cast<double>(M));
    if (cap < 1.0) continue;
    const std::size_t H = 1 + rng() % static_cast<std::size_t>(cap);
    const double L = u(rng), s2 = u(rng), r0 = u(rng);
    const double gamma = std::sqrt(static_cast<double>(M)) / (4.0 * L * std::sqrt(static_cast<double>(T)));
    const double r = rel(corollary_bound(T, M, H, L, s2, r0), theorem1_bound(gamma, T, H, L, s2, r0));
    worst = std::max(worst, r);
    o.require(r <= 1e-12, "relative gap " + fmt(r));
  }
  if (o.pass) o.detail = "worst relative gap " + fmt(worst);
  return o;
}

// Instance of criteria 7 and 8.
Problem default_instance() {
  ExperimentConfig c;  // defaults: logistic, M=10, d=50, n=2000, lambda=1/n
  return build_problem(c);
}

// Communication rounds until (f(hat_x_t) - f*) / (f(x0) - f*) <= level, at sync times.
std::optional<std::size_t> rounds_to(const TrajectoryRecord& traj, double level) {
  const double f_star = traj.reference.f_star;
  const double scale = traj.f_hat[0] - f_star;
  for (std::size_t t : traj.schedule.sync_times())
    if (traj.f_hat[t] - f_star <= level * scale) return traj.schedule.rounds_until(t);
  return std::nullopt;
}

// 7. Local steps win at low accuracy, only H=1 reaches high accuracy.
Outcome local_steps_tradeoff(const Problem& p) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t T = 3072;
  const std::vector<std::size_t> hs{1, 4, 16};
  std::vector<std::optional<std::size_t>> low(3), high(3);
  const Vector x0(p.suite.dim(), 0.0);
  const double gamma = 1.0 / p.suite.smoothness();
  parallel_for(3, thread_budget(), [&](std::size_t k) {
    const auto traj = run_local_gd(p.suite, p.reference, gamma, make_uniform_schedule(hs[k], T), x0,
                                   {.thin = true, .track_running_average = false});
    low[k] = rounds_to(traj, 1e-3);
    high[k] = rounds_to(traj, 1e-9);
  });
  o.require(!p.reference_degraded, "reference solution degraded");
  o.require(low[0].has_value(), "H=1 never reaches 1e-3");
  for (std::size_t k : {1, 2}) {
    o.require(low[k].has_value() && low[0] && *low[k] < *low[0],
              "H=" + std::to_string(hs[k]) + " is not faster to 1e-3");
    o.require(!high[k].has_value(), "H=" + std::to_string(hs[k]) + " reaches 1e-9");
  }
  o.require(high[0].has_value(), "H=1 does not reach 1e-9 within T");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 60.0, "took " + fmt(secs) + " s");
  auto show = [](const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string("-"); };
  if (o.pass)
    o.detail = "rounds to 1e-3: H=1 " + show(low[0]) + ", H=4 " + show(low[1]) + ", H=16 " +
               show(low[2]) + "; to 1e-9: H=1 " + show(high[0]) + ", " + fmt(secs) + " s";
  return o;
}

// 8. Theorem 1 at every sync time with gamma = 1/(64L), H=16.
Outcome plateau_bound(const Problem& p) {
  Outcome o;
  const double L = p.suite.smoothness();
  const double gamma = 1.0 / (4.0 * L * 16.0);
  const Vector x0(p.suite.dim(), 0.0);
  const auto traj = run_local_gd(p.suite, p.reference, gamma, make_uniform_schedule(16, 3072), x0,
                                 {.thin = true});
  const auto rep = check_theorem1(traj, L, p.reference.sigma2);
  o.require(rep.pass, std::to_string(rep.violations.size()) + " sync times violate the bound");
  o.require(rep.total_points == 3072 / 16, "not every sync time checked");
  double r0sq = 0.0;
  for (double v : p.reference.x_star) r0sq += v * v;
  const double bound = theorem1_bound(gamma, 3072, 16, L, p.reference.sigma2, r0sq);
  const double gap = traj.f_bar_T - p.reference.f_star;
  o.require(gap <= bound, "final gap above bound");
  if (o.pass)
    o.detail = std::to_string(rep.total_points) + " sync times, final gap " + fmt(gap) +
               " <= bound " + fmt(bound);
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 9. Golden parser files and byte-stable round trip.
Outcome parser_golden() {
  Outcome o;
  const auto ds = load_libsvm(kData / "valid.svm");
  o.require(ds.n() == 4 && ds.d == 4, "valid.svm shape");
  o.require(ds.labels == std::vector<double>{1, -1, 1, -1}, "valid.svm labels");
  o.require(ds.rows[0] == SparseRow{{0, 0.5}, {2, 2.0}}, "valid.svm row 1");
  o.require(load_libsvm(kData / "valid.svm.gz") == ds, "gzip input differs");
  const std::string canonical = slurp(kData / "valid.canonical.svm");
  o.require(serialize_libsvm(ds) == canonical, "canonical serialization differs");
  o.require(serialize_libsvm(parse_libsvm(canonical)) == canonical, "round trip not byte-stable");

  const auto empty = load_libsvm(kData / "empty_features.svm");
  o.require(empty.n() == 3 && empty.rows[0].empty() && empty.d == 2, "empty-feature rows");

  const std::pair<const char*, std::size_t> bad[] = {{"malformed_order.svm", 2},
                                                     {"malformed_label.svm", 2},
                                                     {"malformed_pair.svm", 2},
                                                     {"malformed_index.svm", 1}};
  for (const auto& [name, line] : bad) {
    std::size_t got = 0;
    try {
      load_libsvm(kData / name);
    } catch (const ParseError& e) {
      got = e.line();
    }
    o.require(got == line, std::string(name) + " not rejected at line " + std::to_string(line));
  }
  if (o.pass) o.detail = "valid, gz, empty-feature, 4 malformed files, round trip";
  return o;
}

// 10. No heterogeneity, no drift.
Outcome sigma_degeneracy() {
  Outcome o;
  const auto ds = load_libsvm(kData / "duplicated_halves.svm");
  const auto ref = solve_reference(shards_to_suite(ds, partition_by_index(ds, 2), 0.1));
  o.require(ref.sigma2 <= 1e-16, "duplicated shards sigma2 = " + fmt(ref.sigma2));
  for (auto variant : {Variant::Quadratic, Variant::Logistic})
    for (std::size_t M : {2, 5})
      for (std::size_t H : {1, 2, 7, 16}) {
        const auto suite = make_homogeneous_suite(variant, M, 4, 31 + M);
        const auto r = solve_reference(suite);
        const auto traj = run_local_gd(suite, r, 1.0 / suite.smoothness(),
                                       make_uniform_schedule(H, 4 * H), Vector(4, 1.5));
        o.require(std::all_of(traj.V.begin(), traj.V.end(), [](double v) { return v == 0.0; }),
                  "V != 0 for a homogeneous suite at H=" + std::to_string(H));
      }
  if (o.pass) o.detail = "sigma2 = " + fmt(ref.sigma2) + ", V = 0 on 16 homogeneous runs";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* what, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << what << " ("
              << o.detail << ")" << std::endl;
  };

  report(1, "lemma suite over the standard sweep", lemma_suite);
  report(2, "GD equivalence", gd_equivalence);
  report(3, "analytic two-worker oracle", analytic_oracle);
  report(4, "gradient correctness", gradient_correctness);
  report(5, "planner closed form", planner_closed_form);
  report(6, "theorem/corollary consistency", corollary_consistency);
  std::optional<Problem> problem;
  try {
    problem = default_instance();
  } catch (const std::exception& e) {
    std::cout << "error building the default instance: " << e.what() << std::endl;
  }
  report(7, "local steps trade accuracy for communication", [&] {
    if (!problem) throw std::runtime_error("no instance");
    return local_steps_tradeoff(*problem);
  });
  report(8, "plateau bound at every sync time", [&] {
    if (!problem) throw std::runtime_error("no instance");
    return plateau_bound(*problem);
  });
  report(9, "parser golden files", parser_golden);
  report(10, "sigma2 degeneracy", sigma_degeneracy);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
