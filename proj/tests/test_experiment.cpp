#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tprophet/errors.hpp"
#include "tprophet/experiment.hpp"

using namespace tprophet;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig cfg;
  cfg.instance = {"prop-adv", 0.05, 1000, 7, 2, ""};
  cfg.trader = {"lookahead:2:blsh", 0.3};
  cfg.costs = {0.1, 0.25};
  cfg.horizons = {10, 20, 40};
  cfg.trials = 123;
  cfg.seed = 18446744073709551615ULL;
  cfg.output = "out.csv";
  cfg.format = "json";
  cfg.workers = 3;
  cfg.target = "theorem2";
  cfg.which = "iid";
  cfg.random_instances = 9;
  const std::string text = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(text);
  CHECK(back == cfg);
  CHECK(config_to_json(back) == text);

  ExperimentConfig plain;
  CHECK(config_from_json(config_to_json(plain)) == plain);
  CHECK(!config_from_json(config_to_json(plain)).seed);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"schema_version": 99})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"trials": "many"})"), ConfigError);
  try {
    load_config_file("/nonexistent/cfg.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/cfg.json") != std::string::npos);
  }
}

TEST_CASE("validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  auto bad = [&](auto mutate, const std::string& field) {
    ExperimentConfig c = cfg;
    mutate(c);
    try {
      validate(c);
      FAIL("expected ConfigError for " << field);
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  bad([](auto& c) { c.instance.eps = 0.0; }, "eps");
  bad([](auto& c) { c.instance.eps = 1.0; }, "eps");
  bad([](auto& c) { c.costs.eps_pi = 1.0; }, "eps_pi");
  bad([](auto& c) { c.costs.eps_sigma = -0.5; }, "eps_sigma");
  bad([](auto& c) { c.instance.name = "nope"; }, "instance");
  bad([](auto& c) { c.trader.name = "oracle"; }, "trader");
  bad([](auto& c) { c.format = "xml"; }, "format");
  bad(
      [](auto& c) {
        c.instance.name = "prop-adv";
        c.instance.horizon = 3;
      },
      "T");
  bad([](auto& c) { c.instance.name = "phase"; }, "eps_sigma");
}

TEST_CASE("distribution files") {
  const auto path = temp_file("tp_dist.json", R"({"atoms": [[1, 0.5], [3, 0.5]], "delta": 0.2})");
  const PriceDistribution d = load_distribution(path);
  CHECK(d.mean() == doctest::Approx(2.0));
  CHECK(d.perturb_delta() == 0.2);
  CHECK(load_distribution("uniform01").mean() == 0.5);
  try {
    load_distribution("/missing/dist.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/missing/dist.json") != std::string::npos);
  }
  CHECK_THROWS_AS(distribution_from_json(R"({"atoms": [[1, 0.5]]})"), ConfigError);
}

TEST_CASE("process files") {
  CHECK(process_from_json(R"({"variant":"deterministic","prices":[2,1,3]})").horizon() == 3);
  const PriceProcess iid = process_from_json(
      R"({"variant":"iid","horizon":5,"distribution":{"atoms":[[1,1]]}})");
  CHECK(iid.is_iid());
  CHECK(iid.horizon() == 5);
  const PriceProcess ind = process_from_json(
      R"({"variant":"independent","distributions":[{"atoms":[[1,1]]},{"atoms":[[0,0.5],[4,0.5]]}]})");
  CHECK(ind.mean(2) == 2.0);
  const PriceProcess gen =
      process_from_json(R"({"variant":"generator","instance":"prop-adv","eps":0.25,"horizon":4})");
  CHECK(gen.mean(1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(process_from_json(R"({"variant":"markov"})"), ConfigError);
}

TEST_CASE("trader factories") {
  ExperimentConfig cfg;
  cfg.instance.name = "dist";
  cfg.instance.path = "uniform01";
  cfg.costs = {0.0, 0.1};
  for (const char* name : {"blsh", "bbsa", "eps-margin", "lookahead:1", "lookahead:3:blsh"}) {
    cfg.trader.name = name;
    validate(cfg);
    const PriceProcess p = build_process(cfg);
    auto t = build_trader_factory(cfg, p)();
    CHECK(t != nullptr);
  }
  cfg.trader.name = "bbsa";
  cfg.instance.name = "prop-adv";
  cfg.instance.horizon = 4;
  CHECK_THROWS_AS(build_trader_factory(cfg, build_process(cfg)), ConfigError);
  cfg.instance.name = "prop-iid";
  CHECK_THROWS_AS(build_trader_factory(cfg, build_process(cfg)), ConfigError);
}

TEST_CASE("simulate output") {
  ExperimentConfig cfg;
  cfg.instance = {"prop-iid", 0.2, 50, 1, 1, ""};
  cfg.trials = 200;
  std::ostringstream out1, err1, out2, err2;
  CHECK(cmd_simulate(cfg, out1, err1) == kExitConfigError);
  CHECK(err1.str().find("seed") != std::string::npos);
  cfg.seed = 7;
  std::ostringstream o1, o2, e;
  CHECK(cmd_simulate(cfg, o1, e) == kExitOk);
  cfg.workers = 4;
  CHECK(cmd_simulate(cfg, o2, e) == kExitOk);
  // the config line records the worker count; compare everything after it
  const auto body = [](const std::string& s) { return s.substr(s.find("# alg_mean")); };
  CHECK(body(o1.str()) == body(o2.str()));
  CHECK(o1.str().rfind("# schema_version=1\n", 0) == 0);
  CHECK(o1.str().find("trial,seed,alg_profit,opt_profit\n") != std::string::npos);

  cfg.format = "json";
  std::ostringstream j;
  CHECK(cmd_simulate(cfg, j, e) == kExitOk);
  CHECK(j.str().find("\"schema_version\": 1") != std::string::npos);
}

TEST_CASE("simulate with a horizon grid") {
  ExperimentConfig cfg;
  cfg.instance = {"prop-adv", 0.05, 2, 1, 1, ""};
  cfg.horizons = {200, 400, 800};
  cfg.trials = 2000;
  cfg.seed = 1;
  std::ostringstream out, err;
  CHECK(cmd_simulate(cfg, out, err) == kExitOk);
  CHECK(out.str().find("# alpha_hat=") != std::string::npos);
  cfg.horizons = {200, 400};
  std::ostringstream o2, e2;
  CHECK(cmd_simulate(cfg, o2, e2) == kExitConfigError);
}

TEST_CASE("verify commands") {
  ExperimentConfig cfg;
  std::ostringstream out, err;
  cfg.target = "theorem1";
  cfg.random_instances = 50;
  CHECK(cmd_verify(cfg, out, err) == kExitConfigError);  // no seed
  cfg.seed = 3;
  CHECK(cmd_verify(cfg, out, err) == kExitOk);

  ExperimentConfig lb;
  lb.target = "lowerbound";
  lb.which = "adversarial";
  lb.instance.eps = 0.05;
  lb.instance.horizon = 10000;
  std::ostringstream lo;
  CHECK(cmd_verify(lb, lo, err) == kExitOk);
  CHECK(lo.str().find("result: PASS") != std::string::npos);

  ExperimentConfig ap;
  ap.target = "appendix";
  ap.which = "phase";
  ap.instance.eps = 0.1;
  ap.instance.phases = 100;
  std::ostringstream ao;
  CHECK(cmd_verify(ap, ao, err) == kExitOk);

  ExperimentConfig unknown;
  unknown.target = "theorem9";
  CHECK(cmd_verify(unknown, out, err) == kExitConfigError);
}

TEST_CASE("thresholds command") {
  std::ostringstream out, err;
  CHECK(cmd_thresholds("uniform01", {0.0, 0.1}, out, err) == kExitOk);
  CHECK(out.str().find("z_high=0.6") != std::string::npos);
  const auto two = temp_file("tp_two.json", R"({"atoms": [[1, 0.5], [3, 0.5]]})");
  std::ostringstream o2, e2;
  CHECK(cmd_thresholds(two, {0.0, 0.1}, o2, e2) == kExitConfigError);
  CHECK(e2.str().find("delta") != std::string::npos);
}

TEST_CASE("random instance generators") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const PriceDistribution d = random_distribution(rng, 4, 10.0, true);
    CHECK(d.atoms().size() <= 4);
    CHECK(d.max_support() <= 10.0 + d.perturb_delta());
    CHECK(d.min_support() >= 0.0);
    const PriceProcess p = random_independent_process(rng, 50, 4);
    CHECK(p.horizon() >= 1);
    CHECK(p.horizon() <= 50);
  }
}
