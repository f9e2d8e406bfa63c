#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tprophet/engine.hpp"
#include "tprophet/market.hpp"
#include "tprophet/traders.hpp"

namespace tprophet {

/// Closed-form BLSH profit on a zero-cost explicit process:
/// sum over i of E[(mu_i - X_{i-1})_+] with X_0 = 0.
/// Throws std::invalid_argument for nonzero costs or adaptive processes.
double expected_alg_blsh(const PriceProcess& process, const CostModel& cm = CostModel::zero());

/// Upper bound on the expected profit of any online algorithm. Same value as
/// expected_alg_blsh; kept separate so lower-bound experiments divide by the
/// best-online bound rather than by one particular algorithm.
double best_online_upper_bound(const PriceProcess& process,
                               const CostModel& cm = CostModel::zero());

/// Probability that BLSH holds the stock when step `step` opens:
/// Pr[X_{step-1} <= mu_step].
double blsh_hold_probability(const PriceProcess& process, std::size_t step);

/// (p T / 2) [v_H (1 - eps_pi) - v_L (1 + eps_pi) - 2 eps_sigma].
double bbsa_expected_profit_lower_bound(const PriceDistribution& d, const CostModel& cm,
                                        std::size_t horizon, const Thresholds& th);

/// One row of a verification report.
struct VerificationRecord {
  std::string instance;
  std::size_t horizon = 0;
  double e_alg = 0.0;
  double e_opt = 0.0;
  double bound = 0.0;  // the quantity e_opt is compared against
  double slack = 0.0;  // bound - e_opt
  bool pass = false;
};

struct UpperBoundReport {
  VerificationRecord record;
  double factor = 3.0;  // 2 when all means coincide
  bool equal_means = false;
  double ratio = 0.0;   // e_opt / e_alg
};

/// Relative tolerance of the closed-form upper-bound checks.
inline constexpr double kBoundRelTolerance = 1e-9;

/// Checks E[OPT] <= 3 E[ALG] on a zero-cost explicit process, tightened to
/// 2 E[ALG] when every mu_i, i in [1,T], agrees within 1e-12. Throws
/// BoundViolated, with the whole instance in the message, on failure.
UpperBoundReport verify_upper_bound_theorem(const PriceProcess& process,
                                            const std::string& label = "instance");

/// Readable dump of an explicit process, for failure messages.
std::string describe_process(const PriceProcess& process);

/// Fit of E[OPT](T) ~ alpha * E[ALG](T) + c over a grid of horizons.
struct CompetitiveEstimate {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  std::vector<std::size_t> horizons;
  std::vector<double> e_alg;
  std::vector<double> e_opt;
  Eigen::VectorXd residuals;
  double residual_norm = 0.0;
  /// Standard errors of (alpha_hat, c_hat) when the inputs carry sampling
  /// error; zero for closed-form inputs.
  double alpha_se = 0.0;
  double c_se = 0.0;
};

/// Least-squares fit. Throws DegenerateFit with fewer than three horizons or
/// when E[ALG] does not vary across the grid.
CompetitiveEstimate fit_competitive_ratio(std::vector<std::size_t> horizons,
                                          const Eigen::VectorXd& e_alg,
                                          const Eigen::VectorXd& e_opt,
                                          const Eigen::VectorXd& e_alg_se = {},
                                          const Eigen::VectorXd& e_opt_se = {});

using InstanceFamily = std::function<PriceProcess(std::size_t horizon)>;

/// BLSH against the zero-cost prophet using the closed forms.
CompetitiveEstimate estimate_competitive_ratio_closed_form(const InstanceFamily& family,
                                                           const std::vector<std::size_t>& horizons);

/// Any trader under any costs, from Monte Carlo batches (one per horizon,
/// seeded with derive_seed(master_seed, horizon index)).
CompetitiveEstimate estimate_competitive_ratio(const InstanceFamily& family,
                                               const TraderFactory& make_trader,
                                               const CostModel& cm,
                                               const std::vector<std::size_t>& horizons,
                                               std::size_t trials, std::uint64_t master_seed,
                                               unsigned workers = 0);

}  // namespace tprophet
