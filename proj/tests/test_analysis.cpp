#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tprophet/adversary.hpp"
#include "tprophet/analysis.hpp"
#include "tprophet/errors.hpp"
#include "tprophet/experiment.hpp"
#include "tprophet/oracle.hpp"

using namespace tprophet;

TEST_CASE("closed form blsh profit") {
  const PriceProcess det = PriceProcess::deterministic({2, 1, 3});
  CHECK(expected_alg_blsh(det) == 4.0);
  for (double eps : {0.05, 0.1, 0.25}) {
    for (std::size_t T : {2, 10, 100}) {
      CHECK(expected_alg_blsh(gen_prop_adversarial(eps, T)) ==
            doctest::Approx(T / 2.0 + 1 / eps - 1).epsilon(1e-12));
      // the first step earns 1/2 from the free unit, later steps eps/4 each
      const double alg = expected_alg_blsh(gen_prop_iid(eps, T));
      CHECK(alg == doctest::Approx(0.5 + (T - 1) * eps / 4).epsilon(1e-12));
      CHECK(alg <= 0.5 + T * eps / 4);
    }
  }
  CHECK_THROWS(expected_alg_blsh(det, {0.0, 0.1}));
  CHECK_THROWS(expected_alg_blsh(gen_phase_adversary(0.1, 1, 2)));
}

TEST_CASE("closed form agrees with exhaustive enumeration") {
  Rng rng(6);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<PriceDistribution> steps;
    const std::size_t T = 1 + rng.below(5);
    for (std::size_t i = 0; i < T; ++i) steps.push_back(random_distribution(rng, 3, 10.0, false));
    const PriceProcess p = PriceProcess::independent(steps);
    auto blsh = make_blsh();
    const double e = oracle::enumerate_expectation(
        p, [&](const std::vector<double>& x) { return oracle::replay_profit(*blsh, p, x); });
    CHECK(expected_alg_blsh(p) == doctest::Approx(e).epsilon(1e-12));
    CHECK(best_online_upper_bound(p) == expected_alg_blsh(p));
  }
}

TEST_CASE("deterministic sequences: online equals prophet") {
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(1 + rng.below(20));
    for (double& v : x) v = rng.uniform(0.0, 5.0);
    const PriceProcess p = PriceProcess::deterministic(x);
    CHECK(best_online_upper_bound(p) == doctest::Approx(opt_telescoping(Realization(x))));
  }
}

TEST_CASE("bbsa lower bound") {
  const auto u = PriceDistribution::uniform(0.0, 1.0);
  const CostModel cm{0.0, 0.1};
  const Thresholds th = solve_thresholds(u, cm);
  CHECK(bbsa_expected_profit_lower_bound(u, cm, 100, th) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(bbsa_expected_profit_lower_bound(u, cm, 0, th) == 0.0);
  const Thresholds th0 = solve_thresholds(u, CostModel::zero());
  CHECK(bbsa_expected_profit_lower_bound(u, CostModel::zero(), 40, th0) ==
        doctest::Approx(10 * (th0.mean_above - th0.mean_below)).epsilon(1e-12));
  const auto mc = monte_carlo(PriceProcess::iid(u, 100), [th] { return make_bbsa(th); }, cm,
                              20000, 17, 0);
  CHECK(mc.stats.alg_mean >= 8.0 - 4 * mc.stats.alg_se);
}

TEST_CASE("upper bound theorem") {
  Rng rng(44);
  for (int rep = 0; rep < 200; ++rep) {
    const UpperBoundReport g = verify_upper_bound_theorem(random_independent_process(rng, 50, 4));
    CHECK(g.record.pass);
    const UpperBoundReport e = verify_upper_bound_theorem(random_iid_process(rng, 50, 4));
    CHECK(e.equal_means);
    CHECK(e.factor == 2.0);
    CHECK(e.ratio <= 2.0 + 1e-9);
  }
  const UpperBoundReport adv = verify_upper_bound_theorem(gen_prop_adversarial(0.05, 10000));
  CHECK(adv.ratio >= 2.6);
  CHECK(adv.ratio <= 3.0);
  CHECK(adv.record.slack >= 0.0);
  CHECK(adv.factor == 3.0);
}

TEST_CASE("lower bound families") {
  const auto adv = gen_prop_adversarial(0.05, 10000);
  const double r = expected_opt_zero_cost(adv) / best_online_upper_bound(adv);
  CHECK(r >= (3 - 6 * 0.05) / (1 + 2 / (0.05 * 10000)));
  const auto iid = gen_prop_iid(0.1, 100000);
  const double ri = expected_opt_zero_cost(iid) / best_online_upper_bound(iid);
  CHECK(ri >= 1.85);
  CHECK(ri >= (0.05 - 0.0025) * 1e5 / (0.5 + 1e5 * 0.1 / 4) * (1 - 1e-12));
}

TEST_CASE("ratio fit") {
  // exact line
  Eigen::VectorXd a(4), o(4);
  a << 1, 2, 3, 5;
  o = 2.5 * a.array() + 0.75;
  const CompetitiveEstimate est = fit_competitive_ratio({1, 2, 3, 5}, a, o);
  CHECK(est.alpha_hat == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(est.c_hat == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(est.residual_norm <= 1e-12);

  CHECK_THROWS_AS(fit_competitive_ratio({1, 2}, a.head(2), o.head(2)), DegenerateFit);
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 4.0);
  CHECK_THROWS_AS(fit_competitive_ratio({1, 2, 3}, flat, flat), DegenerateFit);
}

TEST_CASE("ratio fit on the adversarial family") {
  const auto est = estimate_competitive_ratio_closed_form(
      [](std::size_t T) { return gen_prop_adversarial(0.05, T); }, {2000, 10000, 50000});
  CHECK(est.alpha_hat >= 2.6);
  CHECK(est.alpha_hat <= 3.0);
}

TEST_CASE("ratio fit on point masses") {
  const auto family = [](std::size_t T) {
    std::vector<double> x(T);
    for (std::size_t i = 0; i < T; ++i) x[i] = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 2.5 : 0.5);
    return PriceProcess::deterministic(x);
  };
  const auto est = estimate_competitive_ratio_closed_form(family, {10, 20, 40, 80});
  CHECK(est.alpha_hat == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(est.c_hat) <= 1e-9);
  const auto mc = estimate_competitive_ratio(family, [] { return make_blsh(); }, CostModel::zero(),
                                             {10, 20, 40}, 50, 1, 0);
  CHECK(mc.alpha_hat == doctest::Approx(1.0).epsilon(1e-9));
}
