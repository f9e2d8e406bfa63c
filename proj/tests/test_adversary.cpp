#include <doctest.h>

#include <cmath>

#include "tprophet/adversary.hpp"
#include "tprophet/analysis.hpp"
#include "tprophet/engine.hpp"
#include "tprophet/errors.hpp"
#include "tprophet/oracle.hpp"

using namespace tprophet;

namespace {

std::vector<double> atoms_of(const PriceDistribution& d) {
  std::vector<double> out;
  for (const auto& a : d.atoms()) out.push_back(a.value);
  return out;
}

TraderFactory fixed_policy(bool buys) {
  return [buys] {
    return make_lookahead(1, {1,
                              [buys](bool h, double, std::span<const double>) {
                                return !h && buys ? Action::Buy : Action::Hold;
                              },
                              buys ? "always-buy" : "never-trade"});
  };
}

}  // namespace

TEST_CASE("adversarial family") {
  const PriceDistribution odd = prop_adversarial_odd(0.25);
  const PriceDistribution even = prop_adversarial_even(0.25);
  CHECK(atoms_of(odd) == std::vector<double>{0.0, 4.0});
  CHECK(odd.cdf(0.0) == doctest::Approx(0.25));
  CHECK(atoms_of(even) == std::vector<double>{3.0, 7.0});
  CHECK(even.cdf(3.0) == doctest::Approx(0.75));
  for (double eps : {0.05, 0.25, 0.5}) {
    CHECK(prop_adversarial_odd(eps).mean() == doctest::Approx(1 / eps - 1));
    CHECK(prop_adversarial_even(eps).mean() == doctest::Approx(1 / eps));
  }
  const PriceProcess p = gen_prop_adversarial(0.25, 4);
  // one odd-even pair past the first step contributes 1 + 0
  const double pair = expected_positive_part_gap(p.distribution(2), p.mean(3)) +
                      expected_positive_part_gap(p.distribution(3), p.mean(4));
  CHECK(pair == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(expected_alg_blsh(gen_prop_adversarial(0.25, 100)) == doctest::Approx(53.0).epsilon(1e-13));
  CHECK_THROWS(gen_prop_adversarial(0.25, 3));
  CHECK_THROWS(gen_prop_adversarial(0.0, 4));
  CHECK_THROWS(gen_prop_adversarial(1.0, 4));
}

TEST_CASE("iid family") {
  const PriceDistribution d = prop_iid_distribution(0.2);
  CHECK(d.mean() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(expected_positive_part_gap(d, 0.5) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(expected_positive_pair_gap(d, d) == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(gen_prop_iid(0.2, 7).is_iid());
  CHECK(gen_prop_iid(0.2, 7).horizon() == 7);
}

TEST_CASE("appendix failure family") {
  const double eps = 0.1;
  const PriceDistribution d = appendix_failure_distribution(eps);
  CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-14));
  // per step the prophet gains at least Pr[low then high] * (gap - 2 eps)
  const double term = 0.8 * 0.2 * ((1 + 2 * eps) - (1 - eps / 2) - 2 * eps);
  CHECK(term == doctest::Approx(2 * eps / 25).epsilon(1e-12));
}

TEST_CASE("phase branch: victim holds") {
  const double eps = 0.1;
  const CostModel cm{0.0, eps};
  auto trader = fixed_policy(true)();
  const EpisodeResult ep = run_episode(gen_phase_adversary(eps, 1, 1), *trader, cm, 0);
  const std::vector<double> want{1.0, 1 + eps, 1 - eps, 1 + 1.5 * eps};
  REQUIRE(ep.realization.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(ep.realization[i] == doctest::Approx(want[i]));
  CHECK(ep.opt_profit == doctest::Approx(eps / 2).epsilon(1e-12));
  CHECK(ep.alg_profit <= 0.0);
}

TEST_CASE("phase branch: victim empty") {
  const double eps = 0.1;
  const CostModel cm{0.0, eps};
  auto trader = fixed_policy(false)();
  const EpisodeResult ep = run_episode(gen_phase_adversary(eps, 1, 1), *trader, cm, 0);
  const std::vector<double> want{1.0, 1 + eps, 1 + 2.5 * eps};
  REQUIRE(ep.realization.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(ep.realization[i] == doctest::Approx(want[i]));
  CHECK(ep.opt_profit == doctest::Approx(eps / 2).epsilon(1e-12));
  CHECK(ep.alg_profit == 0.0);
}

TEST_CASE("phase adversary against lookahead victims") {
  const double eps = 0.1;
  const CostModel cm{0.0, eps};
  for (std::size_t k : {1, 2, 3}) {
    const std::size_t N = 200;
    const TraderFactory victims[] = {
        [] { return make_lookahead(1, blsh_lookahead_policy()); },
        [k, cm] { return make_lookahead(k, greedy_lookahead_policy(k, cm)); },
        fixed_policy(true),
        fixed_policy(false),
    };
    for (const auto& f : victims) {
      auto t = f();
      const EpisodeResult ep = run_episode(gen_phase_adversary(eps, k, N), *t, cm, 0);
      CHECK(ep.alg_profit <= 1e-9);
      CHECK(std::abs(ep.opt_profit - N * eps / 2) <= 1e-9 * N);
    }
  }
}

TEST_CASE("phase adversary protocol") {
  PhaseAdversary adv(0.1, 2, 2);
  PublicTraderState pub;
  std::vector<double> revealed;
  std::size_t steps = 0;
  while (!adv.finished()) {
    const double x = adv.next(pub, revealed);
    CHECK(revealed.size() == 2);
    CHECK(x > 0.0);
    ++steps;
  }
  CHECK(steps == 2 * 3 * 2);  // empty branch: three blocks of k per phase
  CHECK(adv.branches().size() == 2);
  CHECK(adv.branches()[0] == PhaseAdversary::Branch::TraderEmpty);
  CHECK(adv.invariant_held());
  CHECK_THROWS_AS(adv.next(pub, revealed), ProtocolViolation);
}

TEST_CASE("phase adversary needs its cost model and lookahead") {
  auto blsh = make_blsh();
  CHECK_THROWS_AS(run_episode(gen_phase_adversary(0.1, 1, 3), *blsh, CostModel::zero(), 0),
                  std::invalid_argument);
  auto deep = make_lookahead(2, blsh_lookahead_policy());
  CHECK_THROWS_AS(run_episode(gen_phase_adversary(0.1, 1, 3), *deep, {0.0, 0.1}, 0),
                  std::invalid_argument);
}
