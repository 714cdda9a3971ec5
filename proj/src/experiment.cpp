#include "localgd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "localgd/errors.hpp"
#include "localgd/parallel.hpp"

namespace localgd {

using nlohmann::json;

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path.string());
  out << text;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

json optional_size(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LambdaPolicy LambdaPolicy::parse(std::string_view text) {
  if (text == "1/n") return {true, 0.0};
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !(v >= 0.0) || !std::isfinite(v))
    throw ArgumentError("lambda must be '1/n' or a number >= 0, got '" + std::string(text) + "'");
  return {false, v};
}

double LambdaPolicy::resolve(std::size_t rows) const {
  if (!one_over_n) return value;
  return rows == 0 ? 0.0 : 1.0 / static_cast<double>(rows);
}

std::string LambdaPolicy::describe() const { return one_over_n ? "1/n" : format_real(value); }

ExperimentConfig ExperimentConfig::from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  // null means "keep the default", so to_json output reads back unchanged.
  auto has = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };
  try {
    if (has("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (has("dim")) c.dim_override = j.at("dim").get<std::size_t>();
    if (has("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    if (has("M")) c.workers = j.at("M").get<std::size_t>();
    if (has("d")) c.dim = j.at("d").get<std::size_t>();
    if (has("n")) c.rows = j.at("n").get<std::size_t>();
    if (has("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (has("lambda")) {
      const auto& v = j.at("lambda");
      c.lambda = v.is_string() ? LambdaPolicy::parse(v.get<std::string>())
                               : LambdaPolicy{false, v.get<double>()};
    }
    if (has("gamma")) {
      const auto& v = j.at("gamma");
      c.gamma = v.is_string() ? GammaPolicy::parse(v.get<std::string>())
                              : GammaPolicy{GammaPolicy::Kind::Explicit, v.get<double>()};
    }
    if (has("H")) c.intervals = j.at("H").get<std::vector<std::size_t>>();
    if (has("T")) c.total_steps = j.at("T").get<std::size_t>();
    if (has("rho")) c.rho = j.at("rho").get<std::vector<double>>();
    if (has("out")) c.out = j.at("out").get<std::string>();
    if (has("tol")) c.tol = j.at("tol").get<double>();
    if (has("strict")) c.strict = j.at("strict").get<bool>();
    if (has("instances")) c.instances = j.at("instances").get<std::size_t>();
    if (has("fault_step")) c.fault_step = j.at("fault_step").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) { return from_json(j, {}); }

json ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = dataset ? json(dataset->string()) : json(nullptr);
  j["dim"] = optional_size(dim_override);
  j["variant"] = std::string(to_string(variant));
  j["M"] = workers;
  j["d"] = dim;
  j["n"] = rows;
  j["seed"] = seed;
  j["lambda"] = lambda.describe();
  j["gamma"] = gamma ? json(gamma->describe()) : json(nullptr);
  j["H"] = intervals;
  j["T"] = total_steps;
  j["rho"] = rho;
  j["out"] = out.string();
  j["tol"] = tol;
  j["strict"] = strict;
  j["instances"] = instances;
  j["fault_step"] = optional_size(fault_step);
  return j;
}

void ExperimentConfig::validate() const {
  if (intervals.empty()) throw ArgumentError("config: H list must not be empty");
  for (auto h : intervals)
    if (h == 0) throw ArgumentError("config: every H must be >= 1");
  if (total_steps < *std::max_element(intervals.begin(), intervals.end()))
    throw ArgumentError("config: T must be >= max(H)");
  for (double r : rho)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("config: every rho must be >= 0");
  if (!(tol > 0.0)) throw ArgumentError("config: tol must be > 0");
  if (workers == 0) throw ArgumentError("config: M must be >= 1");
  if (!dataset) {
    if (dim == 0) throw ArgumentError("config: d must be >= 1");
    if (variant == Variant::Logistic && rows < workers)
      throw ArgumentError("config: n must be >= M");
  }
}

Problem build_problem(const ExperimentConfig& config) {
  config.validate();
  auto make = [&](ObjectiveSuite suite, std::size_t rows, double lambda, std::string source) {
    Problem p{std::move(suite), {}, false, rows, lambda, std::move(source)};
    try {
      p.reference = solve_reference(p.suite, config.tol);
    } catch (const ConvergenceError& e) {
      p.reference = e.partial();
      p.reference_degraded = true;
    }
    return p;
  };

  if (config.dataset) {
    const SparseDataset ds = load_libsvm(*config.dataset);
    const double lambda = config.lambda.resolve(ds.n());
    return make(shards_to_suite(ds, partition_by_index(ds, config.workers), lambda,
                                config.dim_override),
                ds.n(), lambda, config.dataset->string());
  }
  if (config.variant == Variant::Quadratic)
    return make(make_quadratic_suite(config.workers, config.dim, config.seed), 0, 0.0,
                "synthetic:quadratic");
  const SparseDataset ds = make_separable_dataset(config.rows, config.dim, config.seed, true);
  const double lambda = config.lambda.resolve(ds.n());
  return make(shards_to_suite(ds, partition_by_index(ds, config.workers), lambda), ds.n(), lambda,
              "synthetic:logistic");
}

int RunSummary::exit_code() const {
  for (const auto& r : runs)
    if (r.theorem1 && !r.theorem1->pass) return 1;
  return 0;
}

std::string trajectory_csv(const TrajectoryRecord& traj, const std::vector<double>& rho) {
  const double f_star = traj.reference.f_star;
  std::string out = "step,comm_rounds";
  for (double r : rho) out += ",wall_clock_rho_" + format_short(r);
  out += ",subopt_hat,subopt_bar,V,r2\n";

  std::vector<CostModel> models;
  for (double r : rho) models.push_back({r});
  const bool has_bar = traj.f_bar.size() == traj.steps() + 1;
  for (std::size_t t = 0; t <= traj.steps(); ++t) {
    const std::size_t rounds = traj.schedule.rounds_until(t);
    out += std::to_string(t);
    out += ',';
    out += std::to_string(rounds);
    for (const auto& m : models) {
      out += ',';
      out += format_real(m.wall_clock(static_cast<double>(t), static_cast<double>(rounds)));
    }
    out += ',';
    out += format_real(traj.f_hat[t] - f_star);
    out += ',';
    out += has_bar ? format_real(traj.f_bar[t] - f_star) : std::string("nan");
    out += ',';
    out += format_real(traj.V[t]);
    out += ',';
    out += format_real(traj.r2[t]);
    out += '\n';
  }
  return out;
}

json to_json(const CheckReport& rep) {
  json j;
  j["name"] = rep.name;
  j["status"] = std::string(to_string(rep.status));
  j["pass"] = rep.pass;
  j["total_points"] = rep.total_points;
  j["slack_used"] = rep.slack_used;
  if (!rep.note.empty()) j["note"] = rep.note;
  json v = json::array();
  for (const auto& x : rep.violations)
    v.push_back({{"index", x.index}, {"form", x.form}, {"lhs", x.lhs}, {"rhs", x.rhs},
                 {"gap", x.gap}});
  j["violations"] = std::move(v);
  return j;
}

RunSummary cmd_run(const ExperimentConfig& config, std::ostream& log) {
  const Problem problem = build_problem(config);
  const double smoothness = problem.suite.smoothness();
  const double sigma2 = problem.reference.sigma2;
  const GammaPolicy policy = config.gamma.value_or(GammaPolicy{GammaPolicy::Kind::Experiment, 0.0});
  std::filesystem::create_directories(config.out);

  log << "problem " << problem.source << ": M=" << problem.suite.workers()
      << " d=" << problem.suite.dim() << " L=" << format_real(smoothness)
      << " sigma2=" << format_real(sigma2) << " f*=" << format_real(problem.reference.f_star)
      << (problem.reference_degraded ? " (reference degraded)" : "") << '\n';

  RunSummary summary;
  summary.runs.resize(config.intervals.size());
  const Vector x0(problem.suite.dim(), 0.0);

  parallel_for(config.intervals.size(), thread_budget(), [&](std::size_t k) {
    const std::size_t h = config.intervals[k];
    RunOutcome& outcome = summary.runs[k];
    outcome.interval = h;
    outcome.gamma = policy.resolve(smoothness, h);
    outcome.csv_path = config.out / ("run_H" + std::to_string(h) + ".csv");
    outcome.meta_path = config.out / ("run_H" + std::to_string(h) + ".json");

    json meta;
    meta["config"] = config.to_json();
    meta["source"] = problem.source;
    meta["H"] = h;
    meta["T"] = config.total_steps;
    meta["M"] = problem.suite.workers();
    meta["d"] = problem.suite.dim();
    meta["n"] = problem.rows;
    meta["lambda"] = problem.lambda;
    meta["L"] = smoothness;
    meta["sigma2"] = sigma2;
    meta["f_star"] = problem.reference.f_star;
    meta["gamma"] = outcome.gamma;
    meta["gamma_policy"] = policy.describe();
    meta["rho"] = config.rho;
    meta["x_star_residual"] = problem.reference.grad_norm_residual;
    meta["reference_tolerance"] = config.tol;
    meta["reference_degraded"] = problem.reference_degraded;

    try {
      const TrajectoryRecord traj =
          run_local_gd(problem.suite, problem.reference, outcome.gamma,
                       make_schedule_with_tail(h, config.total_steps), x0, {.thin = true});
      if (stepsize_admissible(outcome.gamma, smoothness, traj.schedule.interval()))
        outcome.theorem1 = check_theorem1(traj, smoothness, sigma2);
      write_file(outcome.csv_path, trajectory_csv(traj, config.rho));
      meta["diverged"] = false;
      meta["divergence_step"] = nullptr;
      meta["final_subopt_hat"] = traj.f_hat.back() - problem.reference.f_star;
      meta["final_subopt_bar"] = traj.f_bar_T - problem.reference.f_star;
      meta["comm_rounds"] = traj.schedule.rounds_until(traj.steps());
    } catch (const DivergenceError& e) {
      outcome.divergence_step = e.step();
      meta["diverged"] = true;
      meta["divergence_step"] = e.step();
    }
    meta["theorem1"] = outcome.theorem1 ? to_json(*outcome.theorem1)
                                        : json{{"name", "theorem1"}, {"status", "precondition"}};
    write_file(outcome.meta_path, meta.dump(2) + "\n");
  });

  for (const auto& r : summary.runs) {
    log << "H=" << r.interval << " gamma=" << format_real(r.gamma) << " -> " << r.csv_path.string();
    if (r.divergence_step) log << " (diverged at step " << *r.divergence_step << ")";
    if (r.theorem1) log << " theorem1=" << to_string(r.theorem1->status);
    log << '\n';
  }
  return summary;
}

namespace {

json outcome_json(const InstanceOutcome& o) {
  json j;
  j["index"] = o.instance.index;
  j["variant"] = std::string(to_string(o.instance.variant));
  j["M"] = o.instance.workers;
  j["d"] = o.instance.dim;
  j["H"] = o.instance.interval;
  j["T"] = o.instance.total_steps;
  j["seed"] = o.instance.seed;
  j["L"] = o.smoothness;
  j["sigma2"] = o.sigma2;
  j["gamma"] = o.gamma;
  j["reference_residual"] = o.reference_residual;
  j["reference_degraded"] = o.reference_degraded;
  if (!o.error.empty()) j["error"] = o.error;
  json reps = json::array();
  for (const auto& r : o.reports) reps.push_back(to_json(r));
  j["reports"] = std::move(reps);
  return j;
}

}  // namespace

VerifySummary cmd_verify(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const GammaPolicy policy = config.gamma.value_or(GammaPolicy{});
  const Lemma2Constants constants =
      config.strict ? Lemma2Constants::Strict : Lemma2Constants::Stated;
  std::filesystem::create_directories(config.out);

  std::vector<InstanceOutcome> outcomes;
  VerifySummary summary;
  json& report = summary.report;

  if (config.dataset) {
    report["mode"] = "dataset";
    const Problem problem = build_problem(config);
    const Vector x0(problem.suite.dim(), 0.0);
    outcomes.resize(config.intervals.size());
    parallel_for(config.intervals.size(), thread_budget(), [&](std::size_t k) {
      InstanceOutcome& o = outcomes[k];
      o.instance.index = k;
      o.instance.variant = Variant::Logistic;
      o.instance.workers = problem.suite.workers();
      o.instance.dim = problem.suite.dim();
      o.instance.interval = config.intervals[k];
      o.instance.total_steps = config.total_steps;
      o.instance.seed = config.seed;
      o.smoothness = problem.suite.smoothness();
      o.sigma2 = problem.reference.sigma2;
      o.reference_residual = problem.reference.grad_norm_residual;
      o.reference_degraded = problem.reference_degraded;
      o.gamma = policy.resolve(o.smoothness, o.instance.interval);
      try {
        TrajectoryRecord traj = run_local_gd(
            problem.suite, problem.reference, o.gamma,
            make_schedule_with_tail(o.instance.interval, config.total_steps), x0);
        if (config.fault_step)
          inject_fault(traj, problem.suite, std::min(*config.fault_step, traj.steps()));
        o.reports = check_all(traj, o.smoothness, o.sigma2, constants);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    });
  } else {
    report["mode"] = "sweep";
    SweepOptions opts;
    opts.instances = config.instances;
    opts.seed = config.seed;
    opts.gamma = policy;
    opts.constants = constants;
    opts.tol = config.tol;
    opts.threads = thread_budget();
    opts.fault_step = config.fault_step;
    outcomes = run_property_sweep(opts);
  }

  std::size_t passed = 0, skipped = 0;
  json items = json::array();
  for (const auto& o : outcomes) {
    items.push_back(outcome_json(o));
    if (!o.error.empty()) {
      ++summary.failed_runs;
      log << "instance " << o.instance.index << ": error: " << o.error << '\n';
    }
    for (const auto& r : o.reports) {
      switch (r.status) {
        case CheckStatus::Passed: ++passed; break;
        case CheckStatus::PreconditionNotMet: ++skipped; break;
        case CheckStatus::Failed:
          ++summary.failed_checks;
          log << "instance " << o.instance.index << ": " << r.name << " FAILED ("
              << r.violations.size() << " of " << r.total_points << " points)\n";
          break;
      }
    }
  }
  report["gamma_policy"] = policy.describe();
  report["strict"] = config.strict;
  report["fault_step"] = optional_size(config.fault_step);
  report["instances"] = std::move(items);
  report["summary"] = {{"runs", outcomes.size()},
                       {"failed_runs", summary.failed_runs},
                       {"passed_checks", passed},
                       {"failed_checks", summary.failed_checks},
                       {"precondition_skipped", skipped}};
  write_file(config.out / "verify_report.json", report.dump(2) + "\n");

  log << "verify: " << outcomes.size() << " runs, " << passed << " checks passed, "
      << summary.failed_checks << " failed, " << skipped << " skipped (precondition), "
      << summary.failed_runs << " run errors\n";
  return summary;
}

PlanReport make_plan_report(double epsilon, double smoothness, double sigma2, double r0sq,
                            std::optional<double> gamma) {
  PlanReport rep;
  rep.smoothness = smoothness;
  rep.sigma2 = sigma2;
  rep.r0sq = r0sq;
  rep.plan = plan_communication(epsilon, smoothness, sigma2, r0sq,
                                gamma.value_or(1.0 / (4.0 * smoothness)));
  rep.gd_equivalent = rep.plan.regime == AccuracyRegime::LowAccuracy;

  // H(gamma) < 1 cannot be realized; shrink gamma until H(gamma) = 1 instead.
  const double rate = planner_rate_constant(epsilon, smoothness, sigma2);
  if (rep.plan.interval < 1.0) {
    rep.rounded_gamma = 1.0 / (4.0 * rate);
    rep.rounded_interval = 1;
  } else {
    rep.rounded_gamma = rep.plan.gamma;
    rep.rounded_interval = static_cast<std::size_t>(std::floor(rep.plan.interval));
  }
  const double steps = 4.0 * r0sq / (epsilon * rep.rounded_gamma);
  const auto h = static_cast<double>(rep.rounded_interval);
  rep.rounded_total_steps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(steps / h))) * rep.rounded_interval;
  rep.rounded_comm_rounds = rep.rounded_total_steps / rep.rounded_interval;
  rep.rounded_admissible = stepsize_admissible(rep.rounded_gamma, smoothness, rep.rounded_interval);
  if (rep.rounded_admissible)
    rep.rounded_bound = theorem1_bound(rep.rounded_gamma, rep.rounded_total_steps,
                                       rep.rounded_interval, smoothness, sigma2, r0sq);
  return rep;
}

json to_json(const PlanReport& rep) {
  const auto& p = rep.plan;
  json j;
  j["epsilon"] = p.epsilon;
  j["L"] = rep.smoothness;
  j["sigma2"] = rep.sigma2;
  j["r0sq"] = rep.r0sq;
  j["gamma"] = p.gamma;
  j["T"] = p.total_steps;
  j["H"] = p.interval;
  j["comm_rounds"] = p.comm_rounds;
  j["lower_bound_comm"] = p.lower_bound_comm;
  j["regime"] = std::string(to_string(p.regime));
  j["gd_equivalent"] = rep.gd_equivalent;
  j["rounded"] = {{"gamma", rep.rounded_gamma},
                  {"H", rep.rounded_interval},
                  {"T", rep.rounded_total_steps},
                  {"comm_rounds", rep.rounded_comm_rounds},
                  {"admissible", rep.rounded_admissible},
                  {"bound", rep.rounded_admissible ? json(rep.rounded_bound) : json(nullptr)}};
  return j;
}

std::string plan_table(const PlanReport& rep) {
  const auto& p = rep.plan;
  std::ostringstream os;
  os << "                 continuous              rounded\n";
  os << "gamma        " << format_real(p.gamma) << "   " << format_real(rep.rounded_gamma) << '\n';
  os << "T            " << format_real(p.total_steps) << "   " << rep.rounded_total_steps << '\n';
  os << "H            " << format_real(p.interval) << "   " << rep.rounded_interval << '\n';
  os << "T/H          " << format_real(p.comm_rounds) << "   " << rep.rounded_comm_rounds << '\n';
  os << "lower bound  " << format_real(p.lower_bound_comm) << '\n';
  os << "regime       " << to_string(p.regime) << '\n';
  if (rep.rounded_admissible)
    os << "bound at rounded plan  " << format_real(rep.rounded_bound) << '\n';
  if (rep.gd_equivalent)
    os << "note: eps >= 3 sigma^2 / L, so local GD needs as many communication rounds as "
          "gradient descent needs iterations (16 L r0^2 / eps).\n";
  return os.str();
}

DatasetSummary summarize(const SparseDataset& ds) {
  DatasetSummary s;
  s.rows = ds.n();
  s.dim = ds.d;
  s.min_row_nnz = ds.n() == 0 ? 0 : std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < ds.n(); ++i) {
    (ds.labels[i] > 0.0 ? s.positives : s.negatives)++;
    const std::size_t k = ds.rows[i].size();
    s.nnz += k;
    s.min_row_nnz = std::min(s.min_row_nnz, k);
    s.max_row_nnz = std::max(s.max_row_nnz, k);
  }
  s.mean_row_nnz = s.rows == 0 ? 0.0 : static_cast<double>(s.nnz) / static_cast<double>(s.rows);
  return s;
}

std::string summary_text(const DatasetSummary& s) {
  std::ostringstream os;
  os << "n=" << s.rows << '\n'
     << "d=" << s.dim << '\n'
     << "labels: +1=" << s.positives << " -1=" << s.negatives << '\n'
     << "nnz=" << s.nnz << " per-row min=" << s.min_row_nnz << " max=" << s.max_row_nnz
     << " mean=" << format_short(s.mean_row_nnz) << '\n';
  return os.str();
}

}  // namespace localgd
