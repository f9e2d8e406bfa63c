#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tprophet/market.hpp"

namespace tprophet {

enum class Action { Hold, Buy, Sell };

const char* to_string(Action a) noexcept;

struct Trade {
  std::size_t step;
  Action action;       // Buy or Sell
  double base_price;
  double effective_price;
};

/// Inventory and running cash of one trader during an episode.
struct TraderState {
  bool holding = true;
  double cash = 0.0;
  std::vector<Trade> trade_log;
};

/// Everything a trader sees at step i.
struct MarketView {
  std::size_t step = 0;
  double price = 0.0;
  /// mu_{i+1}; zero at the last step. Empty when the process has no known
  /// next-step mean (adaptive adversaries without one-step lookahead).
  std::optional<double> next_mean;
  /// Revealed future realizations x_{i+1}..x_{i+k}; sentinel zeros past T.
  std::span<const double> lookahead;
};

/// Buy-low-sell-high: sell iff holding and x_i > mu_{i+1}; buy iff flat and
/// x_i <= mu_{i+1}. Throws std::logic_error when next_mean is unavailable.
Action blsh_decide(const TraderState& state, const MarketView& view);

/// Buy/sell thresholds for i.i.d. prices under a cost model.
///
/// z_low and z_high equalize the tails, Pr[X <= z_low] = Pr[X >= z_high] = p,
/// and the effective prices, z_high (1 - eps_pi) - eps_sigma =
/// z_low (1 + eps_pi) + eps_sigma = v.
struct Thresholds {
  double z_low = 0.0;
  double z_high = 0.0;
  double common_price = 0.0;  // v
  double tail_prob = 0.0;     // p
  double mean_below = 0.0;    // v_L = E[X | X <= z_low]
  double mean_above = 0.0;    // v_H = E[X | X >= z_high]
  double median = 0.0;

  /// |Pr[X >= z_high] - Pr[X <= z_low]| under d.
  double tail_residual(const PriceDistribution& d) const noexcept;
  /// |effective sell at z_high - effective buy at z_low|.
  double price_residual(const CostModel& cm) const noexcept;
};

inline constexpr double kThresholdTolerance = 1e-10;

/// Bisection on f(h) = Pr[X >= h] - Pr[X <= l(h)] with
/// l(h) = (h (1 - eps_pi) - 2 eps_sigma) / (1 + eps_pi).
///
/// Needs a continuous CDF (delta > 0); a point mass is accepted and handled
/// degenerately. Throws DiscontinuousCdf when no root exists to tolerance.
Thresholds solve_thresholds(const PriceDistribution& d, const CostModel& cm);

/// Buy-below-sell-above: sell iff holding and x_i >= z_high; buy iff flat and
/// x_i <= z_low.
Action bbsa_decide(const TraderState& state, const MarketView& view, const Thresholds& th);

/// Buy iff flat and x_i <= mu_{i+1} - margin; sell iff holding and
/// x_i >= mu_{i+1} + margin.
Action eps_margin_blsh_decide(const TraderState& state, const MarketView& view, double margin);

/// An online trading strategy. Handles carry per-episode state and belong to
/// one episode at a time.
class Trader {
 public:
  virtual ~Trader() = default;
  virtual std::string name() const = 0;
  /// Number of revealed future prices the trader needs; 0 for none.
  virtual std::size_t lookahead() const { return 0; }
  virtual Action decide(const TraderState& state, const MarketView& view) = 0;
};

using TraderFactory = std::function<std::unique_ptr<Trader>()>;

std::unique_ptr<Trader> make_blsh();
std::unique_ptr<Trader> make_bbsa(const Thresholds& th);
std::unique_ptr<Trader> make_eps_margin(double margin);

/// A decision rule over the current price and the first `depth` revealed
/// future prices.
struct LookaheadPolicy {
  std::size_t depth = 1;
  std::function<Action(bool holding, double price, std::span<const double> ahead)> rule;
  std::string label = "custom";
};

/// Wraps a lookahead policy restricted to k revealed prices. Throws
/// std::invalid_argument if k == 0 or the policy needs more than k prices.
std::unique_ptr<Trader> make_lookahead(std::size_t k, LookaheadPolicy policy);

/// BLSH with the revealed next realization standing in for the next mean.
LookaheadPolicy blsh_lookahead_policy();

/// Buys when a revealed price beats the current one by more than the round
/// trip cost; sells when no revealed price is higher than the current one.
LookaheadPolicy greedy_lookahead_policy(std::size_t depth, const CostModel& cm);

}  // namespace tprophet
