#include "tprophet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tprophet/errors.hpp"
#include "tprophet/traders.hpp"

namespace tprophet {

Realization::Realization(std::vector<double> prices) : prices_(std::move(prices)) {
  if (prices_.empty()) throw std::invalid_argument("realization needs at least one price");
  for (double x : prices_) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("realized prices must be finite and >= 0");
    }
  }
}

double opt_telescoping(const Realization& r, const CostModel& cm) {
  if (!cm.is_zero()) {
    throw std::invalid_argument("telescoping OPT only holds without transaction costs");
  }
  double prev = 0.0;
  double total = 0.0;
  for (double x : r.prices()) {
    total += std::max(x - prev, 0.0);
    prev = x;
  }
  return total;
}

double opt_with_costs_dp(const Realization& r, const CostModel& cm, bool initial_stock) {
  constexpr double kForbidden = -std::numeric_limits<double>::infinity();
  double holding = initial_stock ? 0.0 : kForbidden;
  double flat = initial_stock ? kForbidden : 0.0;
  for (double x : r.prices()) {
    const double next_holding = std::max(holding, flat - cm.buy_price(x));
    const double next_flat = std::max(flat, holding + cm.sell_price(x));
    holding = next_holding;
    flat = next_flat;
  }
  return std::max(holding, flat);
}

double opt_bruteforce(const Realization& r, const CostModel& cm, bool initial_stock) {
  const std::size_t T = r.size();
  if (T > kBruteforceMaxHorizon) {
    throw HorizonTooLarge("brute force limited to " + std::to_string(kBruteforceMaxHorizon) +
                          " steps, got " + std::to_string(T));
  }
  // Bit i of mask set means "trade at step i"; starting from the endowed
  // state, trades necessarily alternate.
  double best = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << T;
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    bool holding = initial_stock;
    double cash = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      if (!((mask >> i) & 1U)) continue;
      cash += holding ? cm.sell_price(r[i]) : -cm.buy_price(r[i]);
      holding = !holding;
    }
    best = std::max(best, cash);
  }
  return best;
}

double expected_opt_zero_cost(const PriceProcess& process) {
  if (process.is_adaptive()) {
    throw std::invalid_argument("closed-form E[OPT] needs an explicit price process");
  }
  const std::size_t T = process.horizon();
  double total = 0.0;
  for (std::size_t i = 1; i <= T; ++i) {
    total += expected_positive_pair_gap(process.distribution(i - 1), process.distribution(i));
  }
  return total;
}

double expected_opt_upper_bound_iid_costs(const PriceDistribution& /*d*/, const CostModel& cm,
                                          std::size_t horizon, const Thresholds& th) {
  const double per_round = th.mean_above * (1.0 - cm.eps_pi) -
                           th.mean_below * (1.0 + cm.eps_pi) - 2.0 * cm.eps_sigma;
  return th.common_price + th.tail_prob * static_cast<double>(horizon) * per_round;
}

}  // namespace tprophet
