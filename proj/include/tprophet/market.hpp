#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tprophet/rng.hpp"

namespace tprophet {

struct Atom {
  double value;
  double prob;
};

/// A nonnegative finite discrete distribution, optionally smeared by an
/// independent uniform perturbation on [-delta, +delta].
///
/// With delta > 0 every atom becomes a uniform block of width 2*delta, so the
/// CDF is continuous and piecewise linear. All probability primitives below
/// are exact for this representation (no quadrature).
///
/// Instances are immutable and cheap to copy; atoms are shared.
class PriceDistribution {
 public:
  /// Atoms are sorted by value and duplicates merged. Zero-probability atoms
  /// are dropped. Throws std::invalid_argument unless the probabilities sum
  /// to 1 within 1e-12, every value is >= 0 and, when delta > 0, every value
  /// is >= delta.
  explicit PriceDistribution(std::vector<Atom> atoms, double perturb_delta = 0.0);

  static PriceDistribution point_mass(double value);
  /// Uniform on [lo, hi], i.e. one atom at the midpoint perturbed by half the width.
  static PriceDistribution uniform(double lo, double hi);

  std::span<const Atom> atoms() const noexcept;
  double perturb_delta() const noexcept;

  bool is_point_mass() const noexcept;
  bool has_continuous_cdf() const noexcept { return perturb_delta() > 0.0; }

  double min_support() const noexcept;
  double max_support() const noexcept;

  double mean() const noexcept;
  /// Pr[X <= x].
  double cdf(double x) const noexcept;
  /// Pr[X >= x].
  double prob_at_least(double x) const noexcept;
  /// E[X ; X <= z], the unnormalized lower partial mean.
  double partial_mean_below(double z) const noexcept;
  /// E[X ; X >= z].
  double partial_mean_above(double z) const noexcept;

  /// Perturbed with probability zero at any given point, so this is also
  /// Pr[X >= x] there; for pure atoms it is the strict tail Pr[X > x].
  double prob_above(double x) const noexcept;

  double sample(Rng& rng) const;

  /// Same atoms with a different perturbation half-width.
  PriceDistribution with_delta(double perturb_delta) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

double mean(const PriceDistribution& d) noexcept;
double cdf(const PriceDistribution& d, double x) noexcept;

/// E[X | X <= z]. Throws ZeroProbabilityEvent when Pr[X <= z] = 0.
double conditional_mean_below(const PriceDistribution& d, double z);
/// E[X | X >= z]. Throws ZeroProbabilityEvent when Pr[X >= z] = 0.
double conditional_mean_above(const PriceDistribution& d, double z);

/// E[(threshold - X)_+] for X ~ d.
double expected_positive_part_gap(const PriceDistribution& d, double threshold) noexcept;

/// E[(Y - X)_+] for independent X ~ prev and Y ~ cur.
///
/// Evaluated atom pair by atom pair. For perturbed atoms the difference of the
/// two uniform perturbations is a trapezoid, and E[(c + W)_+] over it has a
/// piecewise-cubic closed form, so the result is exact up to rounding.
double expected_positive_pair_gap(const PriceDistribution& prev,
                                  const PriceDistribution& cur) noexcept;

/// Multiplicative (eps_pi) and additive (eps_sigma) transaction costs.
struct CostModel {
  double eps_pi = 0.0;
  double eps_sigma = 0.0;

  /// Throws std::invalid_argument unless 0 <= eps_pi < 1 and eps_sigma >= 0.
  static CostModel make(double eps_pi, double eps_sigma);
  static CostModel zero() { return {}; }

  bool is_zero() const noexcept { return eps_pi == 0.0 && eps_sigma == 0.0; }
  double buy_price(double base) const noexcept { return (1.0 + eps_pi) * base + eps_sigma; }
  /// May be negative; never clamped.
  double sell_price(double base) const noexcept { return (1.0 - eps_pi) * base - eps_sigma; }

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct PriceQuote {
  double base;
  double buy_price;
  double sell_price;
};

inline PriceQuote quote(const CostModel& cm, double base) noexcept {
  return {base, cm.buy_price(base), cm.sell_price(base)};
}

/// What an adaptive adversary may observe about the trader: inventory and the
/// base price of the last executed trade. Never the trader's policy.
struct PublicTraderState {
  bool holding = false;
  std::optional<double> last_trade_price;
};

/// A price generator that reacts to the trader's public state.
class AdaptiveSource {
 public:
  virtual ~AdaptiveSource() = default;

  virtual bool finished() const = 0;
  /// Number of future prices revealed alongside each emitted price.
  virtual std::size_t lookahead() const = 0;
  /// Cost model the construction is calibrated for, if any.
  virtual std::optional<CostModel> required_costs() const { return std::nullopt; }
  /// Whether trader and prophet start with one free unit.
  virtual bool endows_initial_stock() const { return true; }

  /// Emits the price of the next step given the trader's state before that
  /// step, and writes exactly lookahead() revealed future prices.
  virtual double next(const PublicTraderState& trader, std::vector<double>& revealed) = 0;
};

/// Sequence of prices X_1..X_T. Conceptual sentinel steps 0 and T+1 carry
/// price 0 with probability one.
class PriceProcess {
 public:
  struct IndependentSequence {
    std::vector<PriceDistribution> steps;
  };
  struct Iid {
    PriceDistribution dist;
    std::size_t horizon;
  };
  struct Deterministic {
    std::vector<double> prices;
  };
  struct Adaptive {
    std::function<std::unique_ptr<AdaptiveSource>()> make_source;
    /// Upper bound on the number of steps the source emits.
    std::size_t max_steps;
  };
  using Variant = std::variant<IndependentSequence, Iid, Deterministic, Adaptive>;

  static PriceProcess independent(std::vector<PriceDistribution> steps);
  static PriceProcess iid(PriceDistribution dist, std::size_t horizon);
  static PriceProcess deterministic(std::vector<double> prices);
  static PriceProcess adaptive(std::function<std::unique_ptr<AdaptiveSource>()> make_source,
                               std::size_t max_steps);

  const Variant& variant() const noexcept { return variant_; }
  bool is_adaptive() const noexcept { return std::holds_alternative<Adaptive>(variant_); }
  bool is_iid() const noexcept { return std::holds_alternative<Iid>(variant_); }

  /// T for explicit processes; the step bound for adaptive ones.
  std::size_t horizon() const noexcept;

  /// D_step for step in [0, T+1]; sentinels and deterministic prices are point
  /// masses. Throws std::logic_error for adaptive processes and
  /// std::out_of_range past T+1.
  const PriceDistribution& distribution(std::size_t step) const;
  /// mu_step, with mu_0 = mu_{T+1} = 0.
  double mean(std::size_t step) const;

  /// Draws X_1..X_T. Throws std::logic_error for adaptive processes.
  std::vector<double> sample(Rng& rng) const;

 private:
  explicit PriceProcess(Variant v);

  Variant variant_;
  // Point masses for Deterministic, so distribution() can hand out references.
  std::vector<PriceDistribution> point_masses_;
};

}  // namespace tprophet
