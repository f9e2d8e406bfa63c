#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "tprophet/market.hpp"

namespace tprophet {

/// Alternating two-point distributions on which no online algorithm beats a
/// third of the prophet: odd steps take 1/eps w.p. 1-eps and 0 w.p. eps,
/// even steps take 1/eps - 1 w.p. 1-eps and 2/eps - 1 w.p. eps.
/// Requires 0 < eps < 1 and an even horizon >= 2.
PriceProcess gen_prop_adversarial(double eps, std::size_t horizon);

/// The odd-step and even-step distributions of gen_prop_adversarial.
PriceDistribution prop_adversarial_odd(double eps);
PriceDistribution prop_adversarial_even(double eps);

/// I.i.d. prices 1 w.p. eps/2, 1/2 w.p. 1-eps, 0 w.p. eps/2 (mean 1/2).
PriceProcess gen_prop_iid(double eps, std::size_t horizon);
PriceDistribution prop_iid_distribution(double eps);

/// I.i.d. prices 1+2 eps w.p. 1/5, 1-eps/2 w.p. 4/5 (mean 1); defeats the
/// margin variant of BLSH under additive cost eps.
PriceProcess gen_appendix_failure(double eps, std::size_t horizon);
PriceDistribution appendix_failure_distribution(double eps);

/// Adaptive adversary against k-lookahead traders under additive cost eps.
///
/// Each phase opens with price 1 while revealing 1+eps. If the trader holds
/// once the 1-block is over, the phase continues 1-eps, 1+3eps/2; otherwise
/// it continues 1+5eps/2. Every price is repeated k times so that a k-step
/// window reveals no more than one step does for k = 1. The prophet earns
/// eps/2 per phase; the trader cannot profit. Phases restart immediately.
class PhaseAdversary final : public AdaptiveSource {
 public:
  enum class Branch { Undecided, TraderHeld, TraderEmpty };

  /// Requires eps > 0, k >= 1, phases >= 1.
  PhaseAdversary(double eps, std::size_t k, std::size_t phases);

  bool finished() const override;
  std::size_t lookahead() const override { return k_; }
  std::optional<CostModel> required_costs() const override { return CostModel{0.0, eps_}; }
  /// The construction is about trading without an endowment.
  bool endows_initial_stock() const override { return false; }

  /// Throws ProtocolViolation once all phases have been emitted.
  double next(const PublicTraderState& trader, std::vector<double>& revealed) override;

  std::size_t phases_started() const noexcept { return phase_starts_.size(); }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  /// False if some phase saw the trader holding after the 1-block with a
  /// last purchase below price 1.
  bool invariant_held() const noexcept { return invariant_held_; }

  /// Largest number of steps `phases` phases can take.
  static std::size_t max_steps(std::size_t k, std::size_t phases) noexcept {
    return 4 * k * phases;
  }

 private:
  void open_phase();
  void decide_branch(const PublicTraderState& trader);

  double eps_;
  std::size_t k_;
  std::size_t phases_;
  std::vector<double> committed_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> phase_starts_;
  std::vector<Branch> branches_;
  bool invariant_held_ = true;
};

PriceProcess gen_phase_adversary(double eps, std::size_t k, std::size_t phases);

}  // namespace tprophet
