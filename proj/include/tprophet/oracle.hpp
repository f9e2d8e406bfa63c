#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tprophet/market.hpp"

namespace tprophet {

struct Thresholds;

/// Realized prices x_1..x_T. The sentinels x_0 = x_{T+1} = 0 are implicit.
class Realization {
 public:
  /// Throws std::invalid_argument on an empty list or a negative entry.
  explicit Realization(std::vector<double> prices);

  std::span<const double> prices() const noexcept { return prices_; }
  std::size_t size() const noexcept { return prices_.size(); }
  double operator[](std::size_t i) const noexcept { return prices_[i]; }

 private:
  std::vector<double> prices_;
};

/// Zero-cost prophet profit, sum of (x_i - x_{i-1})_+ with x_0 = 0.
/// Throws std::invalid_argument for a nonzero cost model.
double opt_telescoping(const Realization& r, const CostModel& cm = CostModel::zero());

/// Maximum profit over all feasible trade sequences with at most one unit
/// held. Two-state dynamic program over best cash while holding / while flat.
/// Unsold terminal inventory is worth zero. With `initial_stock` the trader
/// starts holding one free unit.
double opt_with_costs_dp(const Realization& r, const CostModel& cm, bool initial_stock);

inline constexpr std::size_t kBruteforceMaxHorizon = 20;

/// Exhaustive search over every set of trade times. Exponential; throws
/// HorizonTooLarge beyond kBruteforceMaxHorizon steps.
double opt_bruteforce(const Realization& r, const CostModel& cm, bool initial_stock);

/// Closed-form E[OPT] for a zero-cost explicit process:
/// sum over i of E[(X_i - X_{i-1})_+] with X_0 = 0.
/// Throws std::invalid_argument for adaptive processes.
double expected_opt_zero_cost(const PriceProcess& process);

/// Upper bound on E[OPT] for i.i.d. prices under costs:
/// v + p T [v_H (1 - eps_pi) - v_L (1 + eps_pi) - 2 eps_sigma].
double expected_opt_upper_bound_iid_costs(const PriceDistribution& d, const CostModel& cm,
                                          std::size_t horizon, const Thresholds& th);

}  // namespace tprophet
