// tprophet: simulate, verify and thresholds front end.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tprophet/experiment.hpp"

using namespace tprophet;

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> instance;
  std::optional<double> eps;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> phases;
  std::optional<std::size_t> k;
  std::optional<std::string> dist;
  std::optional<std::string> process;
  std::optional<std::string> trader;
  std::optional<double> margin;
  std::optional<double> eps_pi;
  std::optional<double> eps_sigma;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<unsigned> workers;
  std::optional<std::string> which;
  std::optional<std::size_t> random_instances;
  std::vector<std::size_t> grid;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; explicit flags override it");
  app->add_option("--instance", f.instance, "prop-adv | prop-iid | appendix-fail | phase");
  app->add_option("--eps", f.eps, "instance parameter in (0,1)");
  app->add_option("--T", f.horizon, "horizon");
  app->add_option("--phases", f.phases, "phase adversary: number of phases");
  app->add_option("--k", f.k, "phase adversary: lookahead / block length");
  app->add_option("--dist", f.dist, "i.i.d. distribution: uniform01 or a JSON file");
  app->add_option("--process", f.process, "JSON process file");
  app->add_option("--trader", f.trader,
                  "blsh | bbsa | eps-margin | lookahead:<k>[:greedy|:blsh]");
  app->add_option("--margin", f.margin, "eps-margin trader margin (default eps-sigma)");
  app->add_option("--eps-pi", f.eps_pi, "multiplicative cost in [0,1)");
  app->add_option("--eps-sigma", f.eps_sigma, "additive cost >= 0");
  app->add_option("--trials", f.trials, "Monte Carlo trials");
  app->add_option("--seed", f.seed, "master seed (required for anything random)");
  app->add_option("--out", f.out, "output file (default stdout)");
  app->add_option("--format", f.format, "csv | json");
  app->add_option("--workers", f.workers, "worker threads, 0 = all cores");
  app->add_option("--which", f.which, "lowerbound: adversarial|iid; appendix: phase|eps-margin|all");
  app->add_option("--random-instances", f.random_instances, "theorem1 sweep size");
  app->add_option("--T-grid", f.grid, "comma separated horizons for a ratio fit")->delimiter(',');
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig cfg = f.config ? load_config_file(*f.config) : ExperimentConfig{};
  if (f.instance) cfg.instance.name = *f.instance;
  if (f.eps) cfg.instance.eps = *f.eps;
  if (f.horizon) cfg.instance.horizon = *f.horizon;
  if (f.phases) cfg.instance.phases = *f.phases;
  if (f.k) cfg.instance.k = *f.k;
  if (f.dist) {
    cfg.instance.name = "dist";
    cfg.instance.path = *f.dist;
  }
  if (f.process) {
    cfg.instance.name = "process";
    cfg.instance.path = *f.process;
  }
  if (f.trader) cfg.trader.name = *f.trader;
  if (f.margin) cfg.trader.margin = *f.margin;
  if (f.eps_pi) cfg.costs.eps_pi = *f.eps_pi;
  if (f.eps_sigma) cfg.costs.eps_sigma = *f.eps_sigma;
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output = *f.out;
  if (f.format) cfg.format = *f.format;
  if (f.workers) cfg.workers = *f.workers;
  if (f.which) cfg.which = *f.which;
  if (f.random_instances) cfg.random_instances = *f.random_instances;
  if (!f.grid.empty()) cfg.horizons = f.grid;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trading prophets: online trading against stochastic prices"};
  app.require_subcommand(1);

  Flags sim_flags;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo batch, per-trial rows");
  add_flags(simulate, sim_flags);

  Flags ver_flags;
  std::string target;
  CLI::App* verify = app.add_subcommand("verify", "check a bound and print a slack table");
  verify->add_option("target", target, "theorem1 | theorem2 | lowerbound | appendix")->required();
  add_flags(verify, ver_flags);

  std::string th_dist;
  double th_pi = 0.0;
  double th_sigma = 0.0;
  CLI::App* thresholds = app.add_subcommand("thresholds", "solve BBSA thresholds");
  thresholds->add_option("dist,--dist", th_dist, "uniform01 or a JSON distribution file")
      ->required();
  thresholds->add_option("--eps-pi", th_pi, "multiplicative cost in [0,1)");
  thresholds->add_option("--eps-sigma", th_sigma, "additive cost >= 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(resolve(sim_flags), std::cout, std::cerr);
    if (*verify) {
      ExperimentConfig cfg = resolve(ver_flags);
      cfg.target = target;
      return cmd_verify(cfg, std::cout, std::cerr);
    }
    if (*thresholds) return cmd_thresholds(th_dist, {th_pi, th_sigma}, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return kExitConfigError;
}
