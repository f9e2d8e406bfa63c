#pragma once
// Reference computations used only by the tests. Each one is deliberately
// computed differently from the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tprophet/market.hpp"
#include "tprophet/traders.hpp"

namespace oracle {

using tprophet::PriceDistribution;
using tprophet::PriceProcess;

// Midpoint rule over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        std::size_t n = 200000) {
  if (b <= a) return 0.0;
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}

// Integral of g over [a, b] where g is linear between the breakpoints of d
// (atoms and atom +- delta); midpoints per piece make this exact.
inline double integrate_piecewise(const PriceDistribution& d,
                                  const std::function<double(double)>& g, double a, double b) {
  std::vector<double> cuts{a, b};
  for (const auto& at : d.atoms()) {
    for (double c : {at.value - d.perturb_delta(), at.value, at.value + d.perturb_delta()}) {
      if (c > a && c < b) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += integrate(g, cuts[i], cuts[i + 1], 16);
  return s;
}

// E[X] = integral of the survival function.
inline double mean_by_quadrature(const PriceDistribution& d) {
  return integrate_piecewise(d, [&](double x) { return 1.0 - d.cdf(x); }, 0.0, d.max_support());
}

// E[(t - X)_+] = integral_0^t F(x) dx.
inline double positive_part_gap_by_quadrature(const PriceDistribution& d, double t) {
  return integrate_piecewise(d, [&](double x) { return d.cdf(x); }, 0.0, std::max(0.0, t));
}

// E[(Y - X)_+] for independent X ~ prev, Y ~ cur, by a 2-d midpoint grid over
// the two perturbations of every atom pair.
inline double pair_gap_by_quadrature(const PriceDistribution& prev, const PriceDistribution& cur,
                                     std::size_t n = 1500) {
  const double h1 = prev.perturb_delta();
  const double h2 = cur.perturb_delta();
  const std::size_t n1 = h1 > 0 ? n : 1;
  const std::size_t n2 = h2 > 0 ? n : 1;
  double total = 0.0;
  for (const auto& a : prev.atoms()) {
    for (const auto& b : cur.atoms()) {
      double s = 0.0;
      for (std::size_t i = 0; i < n1; ++i) {
        const double u = h1 > 0 ? -h1 + 2.0 * h1 * (static_cast<double>(i) + 0.5) / n1 : 0.0;
        for (std::size_t j = 0; j < n2; ++j) {
          const double v = h2 > 0 ? -h2 + 2.0 * h2 * (static_cast<double>(j) + 0.5) / n2 : 0.0;
          s += std::max(0.0, (b.value + v) - (a.value + u));
        }
      }
      total += a.prob * b.prob * s / static_cast<double>(n1 * n2);
    }
  }
  return total;
}

inline const PriceDistribution& step_dist(const PriceProcess& p, std::size_t i) {
  return p.distribution(i);
}

// Exact expectation of f(prices) over a process of pure atoms, by enumerating
// every realization.
inline double enumerate_expectation(const PriceProcess& p,
                                    const std::function<double(const std::vector<double>&)>& f) {
  const std::size_t T = p.horizon();
  std::vector<double> prices(T);
  double total = 0.0;
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double prob) {
    if (i == T) {
      total += prob * f(prices);
      return;
    }
    for (const auto& a : step_dist(p, i + 1).atoms()) {
      prices[i] = a.value;
      rec(i + 1, prob * a.prob);
    }
  };
  rec(0, 1.0);
  return total;
}

// Best expected profit of any online policy (zero costs, start holding,
// terminal stock worthless) by backward induction. The process is pure atoms
// and independent across steps, so (step, holding, price) is a sufficient state.
inline double best_online_by_backward_induction(const PriceProcess& p) {
  const std::size_t T = p.horizon();
  // w[h] = E over X_{i+1} of the value at step i+1 in holding state h.
  double w_flat = 0.0;
  double w_hold = 0.0;
  for (std::size_t i = T; i >= 1; --i) {
    double nf = 0.0;
    double nh = 0.0;
    for (const auto& a : step_dist(p, i).atoms()) {
      const double x = a.value;
      nh += a.prob * std::max(w_hold, x + w_flat);
      nf += a.prob * std::max(w_flat, -x + w_hold);
    }
    w_flat = nf;
    w_hold = nh;
  }
  return w_hold;
}

// Profit of a trader replayed on one fixed realization, with next means taken
// from the process.
inline double replay_profit(tprophet::Trader& trader, const PriceProcess& p,
                            const std::vector<double>& prices) {
  tprophet::TraderState st;
  st.holding = true;
  for (std::size_t i = 1; i <= prices.size(); ++i) {
    const tprophet::MarketView view{i, prices[i - 1], p.mean(i + 1), {}};
    const auto act = trader.decide(st, view);
    if (act == tprophet::Action::Sell) {
      st.cash += prices[i - 1];
      st.holding = false;
    } else if (act == tprophet::Action::Buy) {
      st.cash -= prices[i - 1];
      st.holding = true;
    }
  }
  return st.cash;
}

// Max over all buy/sell subsets, by recursion over (step, holding) without
// memoization; independent of the library's bitmask and DP implementations.
inline double opt_by_recursion(const std::vector<double>& x, double eps_pi, double eps_sigma,
                               bool holding, std::size_t i = 0) {
  if (i == x.size()) return 0.0;
  const double stay = opt_by_recursion(x, eps_pi, eps_sigma, holding, i + 1);
  const double trade =
      holding ? (1.0 - eps_pi) * x[i] - eps_sigma + opt_by_recursion(x, eps_pi, eps_sigma, false, i + 1)
              : -(1.0 + eps_pi) * x[i] - eps_sigma + opt_by_recursion(x, eps_pi, eps_sigma, true, i + 1);
  return std::max(stay, trade);
}

}  // namespace oracle
