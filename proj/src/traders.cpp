#include "tprophet/traders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tprophet/errors.hpp"

namespace tprophet {

const char* to_string(Action a) noexcept {
  switch (a) {
    case Action::Buy: return "buy";
    case Action::Sell: return "sell";
    case Action::Hold: return "hold";
  }
  return "?";
}

Action blsh_decide(const TraderState& state, const MarketView& view) {
  if (!view.next_mean) {
    throw std::logic_error("BLSH needs the expected next price at step " +
                           std::to_string(view.step));
  }
  const double next = *view.next_mean;
  if (state.holding) return view.price > next ? Action::Sell : Action::Hold;
  return view.price <= next ? Action::Buy : Action::Hold;
}

Action bbsa_decide(const TraderState& state, const MarketView& view, const Thresholds& th) {
  // Holding is checked first, so z_low == z_high never triggers both rules.
  if (state.holding) return view.price >= th.z_high ? Action::Sell : Action::Hold;
  return view.price <= th.z_low ? Action::Buy : Action::Hold;
}

Action eps_margin_blsh_decide(const TraderState& state, const MarketView& view, double margin) {
  if (!view.next_mean) {
    throw std::logic_error("margin trader needs the expected next price at step " +
                           std::to_string(view.step));
  }
  const double next = *view.next_mean;
  if (state.holding) return view.price >= next + margin ? Action::Sell : Action::Hold;
  return view.price <= next - margin ? Action::Buy : Action::Hold;
}

// ---------------------------------------------------------------------------
// Thresholds

double Thresholds::tail_residual(const PriceDistribution& d) const noexcept {
  return std::abs(d.prob_at_least(z_high) - d.cdf(z_low));
}

double Thresholds::price_residual(const CostModel& cm) const noexcept {
  return std::abs(cm.sell_price(z_high) - cm.buy_price(z_low));
}

namespace {

// Leftmost and rightmost medians of d, by bisection on the CDF.
std::pair<double, double> median_interval(const PriceDistribution& d) {
  double lo = d.min_support();
  double hi = d.max_support();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket down to adjacent doubles
    (d.cdf(mid) >= 0.5 ? hi : lo) = mid;
  }
  const double left = hi;
  lo = d.min_support();
  hi = d.max_support();
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket down to adjacent doubles
    (d.prob_at_least(mid) >= 0.5 ? lo : hi) = mid;
  }
  return {left, std::max(left, lo)};
}

void fill_conditionals(Thresholds& th, const PriceDistribution& d) {
  const double p_low = d.cdf(th.z_low);
  const double p_high = d.prob_at_least(th.z_high);
  th.tail_prob = 0.5 * (p_low + p_high);
  th.mean_below = p_low > 0.0 ? d.partial_mean_below(th.z_low) / p_low : th.z_low;
  th.mean_above = p_high > 0.0 ? d.partial_mean_above(th.z_high) / p_high : th.z_high;
  const auto [left, right] = median_interval(d);
  th.median = std::clamp(0.5 * (left + right), th.z_low, th.z_high);
}

}  // namespace

Thresholds solve_thresholds(const PriceDistribution& d, const CostModel& cm) {
  const double pi = cm.eps_pi;
  const double sigma = cm.eps_sigma;
  const auto lower_of = [&](double h) { return (h * (1.0 - pi) - 2.0 * sigma) / (1.0 + pi); };

  Thresholds th;
  if (d.is_point_mass()) {
    // Both effective prices meet at the atom itself; the tails are then both
    // 1 (no costs) or both 0.
    const double c = d.atoms().front().value;
    th.z_high = (c + sigma) / (1.0 - pi);
    th.z_low = lower_of(th.z_high);
    th.common_price = cm.sell_price(th.z_high);
    fill_conditionals(th, d);
    th.median = c;
    return th;
  }

  const auto f = [&](double h) { return d.prob_at_least(h) - d.cdf(lower_of(h)); };

  // At hi, Pr[X >= hi] = 0 and lower_of(hi) lies above the support, so f = -1.
  double lo = 0.0;
  double hi = (d.max_support() * (1.0 + pi) + 2.0 * sigma) / (1.0 - pi) + 1.0;
  for (int it = 0; it < 4000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket down to adjacent doubles
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double h = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
  if (std::abs(f(h)) > kThresholdTolerance) {
    throw DiscontinuousCdf(
        "no threshold equalizes the tails (residual " + std::to_string(std::abs(f(h))) +
        "); the CDF jumps over the root, add a perturbation delta > 0");
  }

  th.z_high = h;
  th.z_low = lower_of(h);
  th.common_price = cm.sell_price(h);
  fill_conditionals(th, d);
  return th;
}

// ---------------------------------------------------------------------------
// Trader handles

namespace {

class BlshTrader final : public Trader {
 public:
  std::string name() const override { return "blsh"; }
  Action decide(const TraderState& s, const MarketView& v) override { return blsh_decide(s, v); }
};

class BbsaTrader final : public Trader {
 public:
  explicit BbsaTrader(const Thresholds& th) : th_(th) {}
  std::string name() const override { return "bbsa"; }
  Action decide(const TraderState& s, const MarketView& v) override {
    return bbsa_decide(s, v, th_);
  }

 private:
  Thresholds th_;
};

class EpsMarginTrader final : public Trader {
 public:
  explicit EpsMarginTrader(double margin) : margin_(margin) {}
  std::string name() const override { return "eps-margin"; }
  Action decide(const TraderState& s, const MarketView& v) override {
    return eps_margin_blsh_decide(s, v, margin_);
  }

 private:
  double margin_;
};

class LookaheadTrader final : public Trader {
 public:
  LookaheadTrader(std::size_t k, LookaheadPolicy policy) : k_(k), policy_(std::move(policy)) {}
  std::string name() const override { return "lookahead:" + std::to_string(k_) + ":" + policy_.label; }
  std::size_t lookahead() const override { return k_; }
  Action decide(const TraderState& s, const MarketView& v) override {
    if (v.lookahead.size() < k_) {
      throw std::logic_error("lookahead trader expected " + std::to_string(k_) +
                             " revealed prices at step " + std::to_string(v.step));
    }
    return policy_.rule(s.holding, v.price, v.lookahead.first(policy_.depth));
  }

 private:
  std::size_t k_;
  LookaheadPolicy policy_;
};

}  // namespace

std::unique_ptr<Trader> make_blsh() { return std::make_unique<BlshTrader>(); }

std::unique_ptr<Trader> make_bbsa(const Thresholds& th) { return std::make_unique<BbsaTrader>(th); }

std::unique_ptr<Trader> make_eps_margin(double margin) {
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  return std::make_unique<EpsMarginTrader>(margin);
}

std::unique_ptr<Trader> make_lookahead(std::size_t k, LookaheadPolicy policy) {
  if (k == 0) throw std::invalid_argument("lookahead depth k must be >= 1");
  if (!policy.rule) throw std::invalid_argument("lookahead policy has no rule");
  if (policy.depth == 0 || policy.depth > k) {
    throw std::invalid_argument("policy reads " + std::to_string(policy.depth) +
                                " future prices but only " + std::to_string(k) +
                                " are revealed");
  }
  return std::make_unique<LookaheadTrader>(k, std::move(policy));
}

LookaheadPolicy blsh_lookahead_policy() {
  return {1,
          [](bool holding, double price, std::span<const double> ahead) {
            const double next = ahead.front();
            if (holding) return price > next ? Action::Sell : Action::Hold;
            return price <= next ? Action::Buy : Action::Hold;
          },
          "blsh"};
}

LookaheadPolicy greedy_lookahead_policy(std::size_t depth, const CostModel& cm) {
  return {depth,
          [cm](bool holding, double price, std::span<const double> ahead) {
            const double best = *std::max_element(ahead.begin(), ahead.end());
            if (holding) return price >= best ? Action::Sell : Action::Hold;
            return cm.sell_price(best) > cm.buy_price(price) ? Action::Buy : Action::Hold;
          },
          "greedy"};
}

}  // namespace tprophet
