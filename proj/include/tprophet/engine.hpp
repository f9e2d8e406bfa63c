#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tprophet/market.hpp"
#include "tprophet/oracle.hpp"
#include "tprophet/traders.hpp"

namespace tprophet {

struct EpisodeResult {
  Realization realization;
  std::vector<Trade> trade_log;
  /// holding_before[i] is whether the trader held the stock at step i+1
  /// before its price was revealed.
  std::vector<std::uint8_t> holding_before;
  double alg_profit = 0.0;
  double opt_profit = 0.0;
  std::uint64_t seed = 0;
  bool initial_stock = true;

  std::size_t buys() const noexcept;
  std::size_t sells() const noexcept;
};

/// Plays one episode of `trader` against `process` under `cm`.
///
/// The trader starts with one free unit (unless an adaptive source says
/// otherwise), sees steps 1..T with next_mean = mu_{i+1} (0 at T) and, if it
/// asks for them, the next k realized prices. Actions execute at the quoted
/// effective prices; inventory left at T expires worthless. The prophet's
/// profit is computed on the same realization with the same endowment.
///
/// Throws InfeasibleAction on a buy while holding or a sell while flat, and
/// std::invalid_argument if an adaptive source is paired with the wrong costs.
EpisodeResult run_episode(const PriceProcess& process, Trader& trader, const CostModel& cm,
                          std::uint64_t seed);

/// Per-trial summary kept by a Monte Carlo batch.
struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double alg_profit = 0.0;
  double opt_profit = 0.0;
  std::size_t buys = 0;
  std::size_t sells = 0;
};

struct BatchStats {
  std::size_t trials = 0;
  double alg_mean = 0.0;
  double alg_se = 0.0;
  double opt_mean = 0.0;
  double opt_se = 0.0;
  /// opt_mean / alg_mean with a delta-method 95% interval.
  double ratio = 0.0;
  double ratio_lo = 0.0;
  double ratio_hi = 0.0;

  friend bool operator==(const BatchStats&, const BatchStats&) = default;
};

struct MonteCarloResult {
  BatchStats stats;
  std::vector<TrialRecord> records;
};

/// Mean and standard error of a sample; order of summation is the order given.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_and_se(const std::vector<double>& xs);

BatchStats summarize(const std::vector<TrialRecord>& records);

/// Runs `trials` independent episodes with per-trial seeds
/// derive_seed(master_seed, trial). Trials may run on `workers` threads
/// (0 = hardware concurrency); results are reduced in trial order, so the
/// outcome does not depend on the worker count.
MonteCarloResult monte_carlo(const PriceProcess& process, const TraderFactory& make_trader,
                             const CostModel& cm, std::size_t trials, std::uint64_t master_seed,
                             unsigned workers = 0);

/// CSV rows: trial,seed,alg_profit,opt_profit.
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);

}  // namespace tprophet
