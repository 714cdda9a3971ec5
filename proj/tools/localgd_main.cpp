// localgd: run, verify, plan and parse subcommands.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "localgd/errors.hpp"
#include "localgd/experiment.hpp"

namespace {

using localgd::ExperimentConfig;

constexpr int kUsageError = 2;

// Raw flag values; only the flags actually given override the config file.
struct ConfigFlags {
  std::string config;
  std::string dataset;
  std::size_t dim = 0;
  std::string variant;
  std::size_t workers = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string lambda;
  std::string gamma;
  std::vector<std::size_t> intervals;
  std::size_t total_steps = 0;
  std::vector<double> rho;
  std::string out;
  double tol = 0.0;
  bool strict = false;
  std::size_t instances = 0;
  std::size_t fault_step = 0;

  std::vector<CLI::Option*> opts;

  void attach(CLI::App* app, bool verify) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--dataset", dataset, "LIBSVM file (.gz accepted)");
    app->add_option("--dim", dim, "pad the dataset feature dimension");
    app->add_option("--variant", variant, "synthetic instance: logistic or quadratic");
    app->add_option("--M", workers, "number of workers");
    app->add_option("--d", d, "synthetic dimension");
    app->add_option("--n", n, "synthetic rows");
    app->add_option("--seed", seed, "instance seed");
    app->add_option("--lambda", lambda, "1/n or a value");
    app->add_option("--gamma", gamma, "theory, experiment or a value");
    app->add_option("--H", intervals, "sync intervals, comma separated")->delimiter(',');
    app->add_option("--T", total_steps, "total local steps");
    app->add_option("--rho", rho, "communication cost ratios, comma separated")->delimiter(',');
    app->add_option("--out", out, "output directory");
    app->add_option("--tol", tol, "reference solver tolerance");
    if (verify) {
      app->add_flag("--strict", strict, "also check the tighter lemma 2 constants");
      app->add_option("--instances", instances, "sweep size");
      app->add_option("--inject-fault", fault_step, "perturb hat_x at this step before checking");
    }
  }

  ExperimentConfig build(CLI::App* app) const {
    ExperimentConfig c;
    if (!config.empty()) {
      std::ifstream in(config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw localgd::ArgumentError(config + ": " + e.what());
      }
      c = ExperimentConfig::from_json(j);
    }
    auto given = [&](const char* name) { return app->count(name) > 0; };
    if (given("--dataset")) c.dataset = dataset;
    if (given("--dim")) c.dim_override = dim;
    if (given("--variant")) c.variant = localgd::parse_variant(variant);
    if (given("--M")) c.workers = workers;
    if (given("--d")) c.dim = d;
    if (given("--n")) c.rows = n;
    if (given("--seed")) c.seed = seed;
    if (given("--lambda")) c.lambda = localgd::LambdaPolicy::parse(lambda);
    if (given("--gamma")) c.gamma = localgd::GammaPolicy::parse(gamma);
    if (given("--H")) c.intervals = intervals;
    if (given("--T")) c.total_steps = total_steps;
    if (given("--rho")) c.rho = rho;
    if (given("--out")) c.out = out;
    if (given("--tol")) c.tol = tol;
    if (app->get_option_no_throw("--strict") && given("--strict")) c.strict = strict;
    if (app->get_option_no_throw("--instances") && given("--instances")) c.instances = instances;
    if (app->get_option_no_throw("--inject-fault") && given("--inject-fault"))
      c.fault_step = fault_step;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local gradient descent experiments and bound checks"};
  app.require_subcommand(1);

  ConfigFlags run_flags, verify_flags;
  CLI::App* run = app.add_subcommand("run", "run local GD for each H and write CSV + JSON");
  run_flags.attach(run, false);
  CLI::App* verify = app.add_subcommand("verify", "run the bound checks, exit 1 on any failure");
  verify_flags.attach(verify, true);

  CLI::App* plan = app.add_subcommand("plan", "communication plan for a target accuracy");
  double epsilon = 0.0, smoothness = 0.0, sigma2 = 0.0, r0sq = 0.0, plan_gamma = 0.0;
  plan->add_option("--epsilon", epsilon, "target accuracy")->required();
  plan->add_option("--L", smoothness, "smoothness constant")->required();
  plan->add_option("--sigma2", sigma2, "heterogeneity at the optimum")->required();
  plan->add_option("--r0sq", r0sq, "squared initial distance")->required();
  plan->add_option("--gamma", plan_gamma, "stepsize, default 1/(4L)");

  CLI::App* parse = app.add_subcommand("parse", "summarize a LIBSVM file");
  std::string parse_path;
  parse->add_option("path", parse_path, "LIBSVM file (.gz accepted)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig c = run_flags.build(run);
      return localgd::cmd_run(c, std::cout).exit_code();
    }
    if (*verify) {
      const ExperimentConfig c = verify_flags.build(verify);
      return localgd::cmd_verify(c, std::cout).exit_code();
    }
    if (*plan) {
      std::optional<double> g;
      if (plan->count("--gamma") > 0) g = plan_gamma;
      const auto rep = localgd::make_plan_report(epsilon, smoothness, sigma2, r0sq, g);
      std::cout << localgd::to_json(rep).dump(2) << '\n' << localgd::plan_table(rep);
      return 0;
    }
    if (*parse) {
      const auto ds = localgd::load_libsvm(parse_path);
      std::cout << localgd::summary_text(localgd::summarize(ds));
      return 0;
    }
  } catch (const localgd::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
