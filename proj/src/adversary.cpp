#include "tprophet/adversary.hpp"

#include <stdexcept>
#include <string>

#include "tprophet/errors.hpp"

namespace tprophet {

namespace {

void require_unit_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0,1), got " + std::to_string(eps));
  }
}

}  // namespace

PriceDistribution prop_adversarial_odd(double eps) {
  require_unit_eps(eps);
  return PriceDistribution({{1.0 / eps, 1.0 - eps}, {0.0, eps}});
}

PriceDistribution prop_adversarial_even(double eps) {
  require_unit_eps(eps);
  return PriceDistribution({{1.0 / eps - 1.0, 1.0 - eps}, {2.0 / eps - 1.0, eps}});
}

PriceProcess gen_prop_adversarial(double eps, std::size_t horizon) {
  if (horizon == 0 || horizon % 2 != 0) {
    throw std::invalid_argument("horizon must be a positive even number, got " +
                                std::to_string(horizon));
  }
  const PriceDistribution odd = prop_adversarial_odd(eps);
  const PriceDistribution even = prop_adversarial_even(eps);
  std::vector<PriceDistribution> steps;
  steps.reserve(horizon);
  for (std::size_t i = 1; i <= horizon; ++i) steps.push_back(i % 2 == 1 ? odd : even);
  return PriceProcess::independent(std::move(steps));
}

PriceDistribution prop_iid_distribution(double eps) {
  require_unit_eps(eps);
  return PriceDistribution({{1.0, 0.5 * eps}, {0.5, 1.0 - eps}, {0.0, 0.5 * eps}});
}

PriceProcess gen_prop_iid(double eps, std::size_t horizon) {
  return PriceProcess::iid(prop_iid_distribution(eps), horizon);
}

PriceDistribution appendix_failure_distribution(double eps) {
  require_unit_eps(eps);
  return PriceDistribution({{1.0 + 2.0 * eps, 0.2}, {1.0 - 0.5 * eps, 0.8}});
}

PriceProcess gen_appendix_failure(double eps, std::size_t horizon) {
  return PriceProcess::iid(appendix_failure_distribution(eps), horizon);
}

// ---------------------------------------------------------------------------
// PhaseAdversary

PhaseAdversary::PhaseAdversary(double eps, std::size_t k, std::size_t phases)
    : eps_(eps), k_(k), phases_(phases) {
  if (!(eps > 0.0)) throw std::invalid_argument("phase adversary needs eps > 0");
  if (k == 0) throw std::invalid_argument("phase adversary needs k >= 1");
  if (phases == 0) throw std::invalid_argument("phase adversary needs at least one phase");
  open_phase();
}

void PhaseAdversary::open_phase() {
  phase_starts_.push_back(committed_.size());
  branches_.push_back(Branch::Undecided);
  committed_.insert(committed_.end(), k_, 1.0);
  committed_.insert(committed_.end(), k_, 1.0 + eps_);
}

void PhaseAdversary::decide_branch(const PublicTraderState& trader) {
  Branch& branch = branches_.back();
  if (trader.holding) {
    branch = Branch::TraderHeld;
    if (trader.last_trade_price && *trader.last_trade_price < 1.0) invariant_held_ = false;
    committed_.insert(committed_.end(), k_, 1.0 - eps_);
    committed_.insert(committed_.end(), k_, 1.0 + 1.5 * eps_);
  } else {
    branch = Branch::TraderEmpty;
    committed_.insert(committed_.end(), k_, 1.0 + 2.5 * eps_);
  }
  if (phase_starts_.size() < phases_) open_phase();
}

bool PhaseAdversary::finished() const {
  return cursor_ >= committed_.size() && branches_.back() != Branch::Undecided;
}

double PhaseAdversary::next(const PublicTraderState& trader, std::vector<double>& revealed) {
  if (finished()) {
    throw ProtocolViolation("phase adversary queried after its last phase ended");
  }
  // The branch of the newest phase is fixed right after its 1-block, from
  // the trader's inventory at that moment.
  if (branches_.back() == Branch::Undecided && cursor_ == phase_starts_.back() + k_) {
    decide_branch(trader);
  }
  const double price = committed_[cursor_++];
  revealed.assign(k_, 0.0);
  for (std::size_t j = 0; j < k_ && cursor_ + j < committed_.size(); ++j) {
    revealed[j] = committed_[cursor_ + j];
  }
  return price;
}

PriceProcess gen_phase_adversary(double eps, std::size_t k, std::size_t phases) {
  // Validate eagerly rather than inside the factory.
  PhaseAdversary probe(eps, k, phases);
  return PriceProcess::adaptive(
      [eps, k, phases] { return std::make_unique<PhaseAdversary>(eps, k, phases); },
      PhaseAdversary::max_steps(k, phases));
}

}  // namespace tprophet
