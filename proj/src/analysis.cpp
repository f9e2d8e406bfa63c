#include "tprophet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tprophet/errors.hpp"
#include "tprophet/format.hpp"
#include "tprophet/oracle.hpp"
#include "tprophet/rng.hpp"

namespace tprophet {

namespace {

void require_zero_cost_explicit(const PriceProcess& process, const CostModel& cm) {
  if (!cm.is_zero()) {
    throw std::invalid_argument("the BLSH profit formula only holds without transaction costs");
  }
  if (process.is_adaptive()) {
    throw std::invalid_argument("closed forms need an explicit price process");
  }
}

}  // namespace

double expected_alg_blsh(const PriceProcess& process, const CostModel& cm) {
  require_zero_cost_explicit(process, cm);
  const std::size_t T = process.horizon();
  double total = 0.0;
  for (std::size_t i = 1; i <= T; ++i) {
    total += expected_positive_part_gap(process.distribution(i - 1), process.mean(i));
  }
  return total;
}

double best_online_upper_bound(const PriceProcess& process, const CostModel& cm) {
  return expected_alg_blsh(process, cm);
}

double blsh_hold_probability(const PriceProcess& process, std::size_t step) {
  return process.distribution(step - 1).cdf(process.mean(step));
}

double bbsa_expected_profit_lower_bound(const PriceDistribution& /*d*/, const CostModel& cm,
                                        std::size_t horizon, const Thresholds& th) {
  const double per_round = th.mean_above * (1.0 - cm.eps_pi) -
                           th.mean_below * (1.0 + cm.eps_pi) - 2.0 * cm.eps_sigma;
  return 0.5 * th.tail_prob * static_cast<double>(horizon) * per_round;
}

std::string describe_process(const PriceProcess& process) {
  std::ostringstream out;
  if (process.is_adaptive()) {
    out << "adaptive process, at most " << process.horizon() << " steps";
    return out.str();
  }
  const std::size_t T = process.horizon();
  out << "T=" << T;
  const std::size_t shown = process.is_iid() ? 1 : T;
  for (std::size_t i = 1; i <= shown; ++i) {
    const PriceDistribution& d = process.distribution(i);
    out << (process.is_iid() ? "\n  iid: " : "\n  X_" + std::to_string(i) + ": ");
    out << "delta=" << format_double(d.perturb_delta()) << " atoms=[";
    for (const Atom& a : d.atoms()) {
      out << '(' << format_double(a.value) << ',' << format_double(a.prob) << ')';
    }
    out << ']';
  }
  return out.str();
}

UpperBoundReport verify_upper_bound_theorem(const PriceProcess& process,
                                            const std::string& label) {
  const double e_alg = expected_alg_blsh(process);
  const double e_opt = expected_opt_zero_cost(process);

  const std::size_t T = process.horizon();
  bool equal_means = true;
  const double mu1 = process.mean(1);
  for (std::size_t i = 2; i <= T && equal_means; ++i) {
    equal_means = std::abs(process.mean(i) - mu1) <= 1e-12 * std::max(1.0, std::abs(mu1));
  }

  UpperBoundReport report;
  report.equal_means = equal_means;
  report.factor = equal_means ? 2.0 : 3.0;
  report.ratio = e_alg > 0.0 ? e_opt / e_alg : (e_opt > 0.0 ? INFINITY : 1.0);
  VerificationRecord& rec = report.record;
  rec.instance = label;
  rec.horizon = T;
  rec.e_alg = e_alg;
  rec.e_opt = e_opt;
  rec.bound = report.factor * e_alg;
  rec.slack = rec.bound - e_opt;
  rec.pass = e_opt <= rec.bound * (1.0 + kBoundRelTolerance) + 1e-12;
  if (!rec.pass) {
    std::ostringstream msg;
    msg << "E[OPT]=" << format_double(e_opt) << " exceeds " << report.factor
        << " * E[ALG]=" << format_double(rec.bound) << " on " << label << ": "
        << describe_process(process);
    throw BoundViolated(msg.str());
  }
  return report;
}

CompetitiveEstimate fit_competitive_ratio(std::vector<std::size_t> horizons,
                                          const Eigen::VectorXd& e_alg,
                                          const Eigen::VectorXd& e_opt,
                                          const Eigen::VectorXd& e_alg_se,
                                          const Eigen::VectorXd& e_opt_se) {
  const Eigen::Index n = e_alg.size();
  if (n < 3 || e_opt.size() != n || static_cast<Eigen::Index>(horizons.size()) != n) {
    throw DegenerateFit("ratio fit needs at least three horizons with matching estimates");
  }
  const double spread = e_alg.maxCoeff() - e_alg.minCoeff();
  if (!(spread > 1e-12 * std::max(1.0, e_alg.cwiseAbs().maxCoeff()))) {
    throw DegenerateFit("E[ALG] is constant across the horizon grid");
  }

  Eigen::MatrixXd design(n, 2);
  design.col(0) = e_alg;
  design.col(1).setOnes();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Vector2d beta = qr.solve(e_opt);

  CompetitiveEstimate est;
  est.alpha_hat = beta(0);
  est.c_hat = beta(1);
  est.horizons = std::move(horizons);
  est.e_alg.assign(e_alg.data(), e_alg.data() + n);
  est.e_opt.assign(e_opt.data(), e_opt.data() + n);
  est.residuals = e_opt - design * beta;
  est.residual_norm = est.residuals.norm();

  if (e_alg_se.size() == n && e_opt_se.size() == n) {
    // Sandwich covariance for independent per-horizon noise.
    const Eigen::VectorXd var =
        e_opt_se.array().square() + beta(0) * beta(0) * e_alg_se.array().square();
    const Eigen::Matrix2d bread = (design.transpose() * design).inverse();
    const Eigen::Matrix2d meat = design.transpose() * var.asDiagonal() * design;
    const Eigen::Matrix2d cov = bread * meat * bread;
    est.alpha_se = std::sqrt(cov(0, 0));
    est.c_se = std::sqrt(cov(1, 1));
  }
  return est;
}

CompetitiveEstimate estimate_competitive_ratio_closed_form(
    const InstanceFamily& family, const std::vector<std::size_t>& horizons) {
  const auto n = static_cast<Eigen::Index>(horizons.size());
  Eigen::VectorXd alg(n);
  Eigen::VectorXd opt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PriceProcess process = family(horizons[static_cast<std::size_t>(i)]);
    alg(i) = expected_alg_blsh(process);
    opt(i) = expected_opt_zero_cost(process);
  }
  return fit_competitive_ratio(horizons, alg, opt);
}

CompetitiveEstimate estimate_competitive_ratio(const InstanceFamily& family,
                                               const TraderFactory& make_trader,
                                               const CostModel& cm,
                                               const std::vector<std::size_t>& horizons,
                                               std::size_t trials, std::uint64_t master_seed,
                                               unsigned workers) {
  const auto n = static_cast<Eigen::Index>(horizons.size());
  Eigen::VectorXd alg(n), opt(n), alg_se(n), opt_se(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const PriceProcess process = family(horizons[idx]);
    const BatchStats s =
        monte_carlo(process, make_trader, cm, trials, derive_seed(master_seed, idx), workers).stats;
    alg(i) = s.alg_mean;
    opt(i) = s.opt_mean;
    alg_se(i) = s.alg_se;
    opt_se(i) = s.opt_se;
  }
  return fit_competitive_ratio(horizons, alg, opt, alg_se, opt_se);
}

}  // namespace tprophet
