#include "tprophet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "tprophet/errors.hpp"
#include "tprophet/format.hpp"
#include "tprophet/rng.hpp"

namespace tprophet {

std::size_t EpisodeResult::buys() const noexcept {
  return static_cast<std::size_t>(std::count_if(trade_log.begin(), trade_log.end(),
                                                [](const Trade& t) { return t.action == Action::Buy; }));
}

std::size_t EpisodeResult::sells() const noexcept { return trade_log.size() - buys(); }

namespace {

void execute(TraderState& state, Action action, std::size_t step, double price,
             const CostModel& cm) {
  switch (action) {
    case Action::Hold:
      return;
    case Action::Buy: {
      if (state.holding) {
        throw InfeasibleAction("buy at step " + std::to_string(step) + " while holding");
      }
      const double paid = cm.buy_price(price);
      state.cash -= paid;
      state.holding = true;
      state.trade_log.push_back({step, action, price, paid});
      return;
    }
    case Action::Sell: {
      if (!state.holding) {
        throw InfeasibleAction("sell at step " + std::to_string(step) + " while empty");
      }
      const double got = cm.sell_price(price);
      state.cash += got;
      state.holding = false;
      state.trade_log.push_back({step, action, price, got});
      return;
    }
  }
}

// next_means[i - 1] = mu_{i+1}
std::vector<double> next_means_of(const PriceProcess& process) {
  const std::size_t T = process.horizon();
  std::vector<double> out(T);
  for (std::size_t i = 1; i <= T; ++i) out[i - 1] = process.mean(i + 1);
  return out;
}

EpisodeResult run_explicit(const PriceProcess& process, const std::vector<double>& next_means,
                           Trader& trader, const CostModel& cm, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> prices = process.sample(rng);
  const std::size_t T = prices.size();
  const std::size_t k = trader.lookahead();

  TraderState state;
  state.holding = true;
  state.trade_log.reserve(T);
  std::vector<std::uint8_t> holding_before(T);
  std::vector<double> window(k);
  for (std::size_t i = 1; i <= T; ++i) {
    holding_before[i - 1] = state.holding ? 1 : 0;
    for (std::size_t j = 0; j < k; ++j) window[j] = i + j < T ? prices[i + j] : 0.0;
    const MarketView view{i, prices[i - 1], next_means[i - 1], window};
    execute(state, trader.decide(state, view), i, prices[i - 1], cm);
  }

  Realization realization(std::move(prices));
  const double opt = opt_with_costs_dp(realization, cm, true);
  return {std::move(realization), std::move(state.trade_log), std::move(holding_before),
          state.cash, opt, seed, true};
}

EpisodeResult run_adaptive(const PriceProcess::Adaptive& spec, Trader& trader,
                           const CostModel& cm, std::uint64_t seed) {
  std::unique_ptr<AdaptiveSource> source = spec.make_source();
  if (const auto required = source->required_costs(); required && !(*required == cm)) {
    throw std::invalid_argument("adaptive source requires eps_pi=" +
                                std::to_string(required->eps_pi) + " eps_sigma=" +
                                std::to_string(required->eps_sigma));
  }
  if (trader.lookahead() > source->lookahead()) {
    throw std::invalid_argument("trader needs " + std::to_string(trader.lookahead()) +
                                " revealed prices, source reveals " +
                                std::to_string(source->lookahead()));
  }
  const bool endowed = source->endows_initial_stock();

  TraderState state;
  state.holding = endowed;
  PublicTraderState pub{endowed, std::nullopt};
  std::vector<double> prices;
  std::vector<std::uint8_t> holding_before;
  std::vector<double> revealed;
  for (std::size_t i = 1; !source->finished(); ++i) {
    if (i > spec.max_steps) throw ProtocolViolation("adaptive source exceeded its step bound");
    holding_before.push_back(state.holding ? 1 : 0);
    const double price = source->next(pub, revealed);
    prices.push_back(price);
    // A committed next price is the only meaningful next mean here.
    std::optional<double> next_mean;
    if (source->lookahead() == 1) next_mean = revealed.front();
    const MarketView view{i, price, next_mean, revealed};
    const std::size_t logged = state.trade_log.size();
    execute(state, trader.decide(state, view), i, price, cm);
    pub.holding = state.holding;
    if (state.trade_log.size() != logged) pub.last_trade_price = price;
  }

  Realization realization(std::move(prices));
  const double opt = opt_with_costs_dp(realization, cm, endowed);
  return {std::move(realization), std::move(state.trade_log), std::move(holding_before),
          state.cash, opt, seed, endowed};
}

}  // namespace

EpisodeResult run_episode(const PriceProcess& process, Trader& trader, const CostModel& cm,
                          std::uint64_t seed) {
  if (const auto* adaptive = std::get_if<PriceProcess::Adaptive>(&process.variant())) {
    return run_adaptive(*adaptive, trader, cm, seed);
  }
  return run_explicit(process, next_means_of(process), trader, cm, seed);
}

MeanSe mean_and_se(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

BatchStats summarize(const std::vector<TrialRecord>& records) {
  BatchStats s;
  s.trials = records.size();
  if (records.empty()) return s;
  std::vector<double> alg;
  std::vector<double> opt;
  alg.reserve(records.size());
  opt.reserve(records.size());
  for (const TrialRecord& r : records) {
    alg.push_back(r.alg_profit);
    opt.push_back(r.opt_profit);
  }
  const MeanSe a = mean_and_se(alg);
  const MeanSe o = mean_and_se(opt);
  s.alg_mean = a.mean;
  s.alg_se = a.se;
  s.opt_mean = o.mean;
  s.opt_se = o.se;
  if (a.mean != 0.0) {
    s.ratio = o.mean / a.mean;
    // Delta method on the ratio of means: residuals opt - R * alg.
    std::vector<double> resid(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) resid[i] = opt[i] - s.ratio * alg[i];
    const double se = mean_and_se(resid).se / std::abs(a.mean);
    s.ratio_lo = s.ratio - 1.96 * se;
    s.ratio_hi = s.ratio + 1.96 * se;
  } else {
    s.ratio = s.ratio_lo = s.ratio_hi = std::numeric_limits<double>::infinity();
  }
  return s;
}

MonteCarloResult monte_carlo(const PriceProcess& process, const TraderFactory& make_trader,
                             const CostModel& cm, std::size_t trials, std::uint64_t master_seed,
                             unsigned workers) {
  if (trials == 0) throw std::invalid_argument("monte carlo needs at least one trial");
  std::vector<TrialRecord> records(trials);
  const std::vector<double> next_means =
      process.is_adaptive() ? std::vector<double>{} : next_means_of(process);

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t seed = derive_seed(master_seed, t);
      auto trader = make_trader();
      const EpisodeResult ep =
          process.is_adaptive() ? run_episode(process, *trader, cm, seed)
                                : run_explicit(process, next_means, *trader, cm, seed);
      records[t] = {t, seed, ep.alg_profit, ep.opt_profit, ep.buys(), ep.sells()};
    }
  };

  unsigned n_workers = workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : workers;
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, trials));
  if (n_workers <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    const std::size_t chunk = (trials + n_workers - 1) / n_workers;
    for (unsigned w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MonteCarloResult out;
  out.stats = summarize(records);
  out.records = std::move(records);
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial,seed,alg_profit,opt_profit\n";
  for (const TrialRecord& r : records) {
    out << r.trial << ',' << r.seed << ',' << format_double(r.alg_profit) << ','
        << format_double(r.opt_profit) << '\n';
  }
}

}  // namespace tprophet
