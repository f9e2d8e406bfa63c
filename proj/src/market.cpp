#include "tprophet/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tprophet/errors.hpp"

namespace tprophet {

struct PriceDistribution::Impl {
  std::vector<Atom> atoms;
  std::vector<double> cumulative;  // cumulative[i] = sum of probs of atoms[0..i]
  double delta = 0.0;
  double mean = 0.0;
};

namespace {

constexpr double kProbSumTolerance = 1e-12;

// Fraction of a uniform block [lo, lo + width] lying at or below x.
double block_fraction_below(double x, double lo, double width) noexcept {
  return std::clamp((x - lo) / width, 0.0, 1.0);
}

}  // namespace

PriceDistribution::PriceDistribution(std::vector<Atom> atoms, double perturb_delta) {
  if (!(perturb_delta >= 0.0) || !std::isfinite(perturb_delta)) {
    throw std::invalid_argument("perturbation half-width must be finite and >= 0");
  }
  if (atoms.empty()) throw std::invalid_argument("distribution needs at least one atom");

  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.value) || a.value < 0.0) {
      throw std::invalid_argument("atom value must be finite and >= 0, got " +
                                  std::to_string(a.value));
    }
    if (!(a.prob >= 0.0 && a.prob <= 1.0)) {
      throw std::invalid_argument("atom probability must lie in [0,1], got " +
                                  std::to_string(a.prob));
    }
    if (perturb_delta > 0.0 && a.prob > 0.0 && a.value < perturb_delta) {
      throw std::invalid_argument("perturbed atom " + std::to_string(a.value) +
                                  " would reach negative prices (delta " +
                                  std::to_string(perturb_delta) + ")");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kProbSumTolerance) {
    throw std::invalid_argument("atom probabilities sum to " + std::to_string(total) +
                                ", expected 1");
  }

  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  auto impl = std::make_shared<Impl>();
  impl->delta = perturb_delta;
  for (const Atom& a : atoms) {
    if (a.prob == 0.0) continue;
    if (!impl->atoms.empty() && impl->atoms.back().value == a.value) {
      impl->atoms.back().prob += a.prob;
    } else {
      impl->atoms.push_back(a);
    }
  }
  double running = 0.0;
  double mean = 0.0;
  for (const Atom& a : impl->atoms) {
    running += a.prob;
    impl->cumulative.push_back(running);
    mean += a.prob * a.value;
  }
  impl->mean = mean;
  impl_ = std::move(impl);
}

PriceDistribution PriceDistribution::point_mass(double value) {
  return PriceDistribution({{value, 1.0}});
}

PriceDistribution PriceDistribution::uniform(double lo, double hi) {
  if (!(lo >= 0.0 && hi > lo)) throw std::invalid_argument("uniform needs 0 <= lo < hi");
  return PriceDistribution({{0.5 * (lo + hi), 1.0}}, 0.5 * (hi - lo));
}

std::span<const Atom> PriceDistribution::atoms() const noexcept { return impl_->atoms; }
double PriceDistribution::perturb_delta() const noexcept { return impl_->delta; }

bool PriceDistribution::is_point_mass() const noexcept {
  return impl_->atoms.size() == 1 && impl_->delta == 0.0;
}

double PriceDistribution::min_support() const noexcept {
  return impl_->atoms.front().value - impl_->delta;
}

double PriceDistribution::max_support() const noexcept {
  return impl_->atoms.back().value + impl_->delta;
}

double PriceDistribution::mean() const noexcept { return impl_->mean; }

double PriceDistribution::cdf(double x) const noexcept {
  const double delta = impl_->delta;
  double acc = 0.0;
  if (delta == 0.0) {
    for (const Atom& a : impl_->atoms) {
      if (a.value > x) break;
      acc += a.prob;
    }
    return std::min(acc, 1.0);
  }
  for (const Atom& a : impl_->atoms) {
    if (a.value - delta >= x) break;
    acc += a.prob * block_fraction_below(x, a.value - delta, 2.0 * delta);
  }
  return std::min(acc, 1.0);
}

double PriceDistribution::prob_at_least(double x) const noexcept {
  const double delta = impl_->delta;
  double acc = 0.0;
  if (delta == 0.0) {
    for (const Atom& a : impl_->atoms) {
      if (a.value >= x) acc += a.prob;
    }
    return std::min(acc, 1.0);
  }
  for (const Atom& a : impl_->atoms) {
    acc += a.prob * (1.0 - block_fraction_below(x, a.value - delta, 2.0 * delta));
  }
  return std::min(acc, 1.0);
}

double PriceDistribution::prob_above(double x) const noexcept {
  if (impl_->delta > 0.0) return prob_at_least(x);
  double acc = 0.0;
  for (const Atom& a : impl_->atoms) {
    if (a.value > x) acc += a.prob;
  }
  return std::min(acc, 1.0);
}

double PriceDistribution::partial_mean_below(double z) const noexcept {
  const double delta = impl_->delta;
  double acc = 0.0;
  for (const Atom& a : impl_->atoms) {
    if (delta == 0.0) {
      if (a.value <= z) acc += a.prob * a.value;
      continue;
    }
    const double lo = a.value - delta;
    const double hi = std::clamp(z, lo, a.value + delta);
    // integral of x / (2 delta) over [lo, hi]
    acc += a.prob * (hi - lo) * (hi + lo) / (4.0 * delta);
  }
  return acc;
}

double PriceDistribution::partial_mean_above(double z) const noexcept {
  const double delta = impl_->delta;
  double acc = 0.0;
  for (const Atom& a : impl_->atoms) {
    if (delta == 0.0) {
      if (a.value >= z) acc += a.prob * a.value;
      continue;
    }
    const double hi = a.value + delta;
    const double lo = std::clamp(z, a.value - delta, hi);
    acc += a.prob * (hi - lo) * (hi + lo) / (4.0 * delta);
  }
  return acc;
}

double PriceDistribution::sample(Rng& rng) const {
  const auto& atoms = impl_->atoms;
  const auto& cum = impl_->cumulative;
  std::size_t idx = 0;
  if (atoms.size() > 1) {
    // Scale by the realized total so rounding in the cumulative sums can
    // never push u past the last bucket.
    const double u = rng.uniform01() * cum.back();
    if (atoms.size() <= 8) {
      while (idx + 1 < atoms.size() && u >= cum[idx]) ++idx;
    } else {
      idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
      idx = std::min(idx, atoms.size() - 1);
    }
  }
  double x = atoms[idx].value;
  if (impl_->delta > 0.0) x += rng.uniform(-impl_->delta, impl_->delta);
  return x;
}

PriceDistribution PriceDistribution::with_delta(double perturb_delta) const {
  return PriceDistribution(impl_->atoms, perturb_delta);
}

double mean(const PriceDistribution& d) noexcept { return d.mean(); }
double cdf(const PriceDistribution& d, double x) noexcept { return d.cdf(x); }

double conditional_mean_below(const PriceDistribution& d, double z) {
  const double p = d.cdf(z);
  if (p <= 0.0) {
    throw ZeroProbabilityEvent("Pr[X <= " + std::to_string(z) + "] is zero");
  }
  return d.partial_mean_below(z) / p;
}

double conditional_mean_above(const PriceDistribution& d, double z) {
  const double p = d.prob_at_least(z);
  if (p <= 0.0) {
    throw ZeroProbabilityEvent("Pr[X >= " + std::to_string(z) + "] is zero");
  }
  return d.partial_mean_above(z) / p;
}

double expected_positive_part_gap(const PriceDistribution& d, double threshold) noexcept {
  return threshold * d.cdf(threshold) - d.partial_mean_below(threshold);
}

namespace {

// Antiderivative of c -> E[(c + U)_+] for U uniform on [-h, h], h > 0.
double ramp_antiderivative(double y, double h) noexcept {
  if (y <= -h) return 0.0;
  if (y < h) {
    const double s = y + h;
    return s * s * s / (12.0 * h);
  }
  return 0.5 * y * y + h * h / 6.0;
}

// E[(c + U + V)_+] for independent U ~ U[-h1, h1], V ~ U[-h2, h2].
double smoothed_positive_part(double c, double h1, double h2) noexcept {
  const double small = std::min(h1, h2);
  const double big = std::max(h1, h2);
  if (c >= small + big) return c;
  if (c <= -(small + big)) return 0.0;
  if (small == 0.0) {
    // here |c| < big
    const double s = c + big;
    return s * s / (4.0 * big);
  }
  return (ramp_antiderivative(c + big, small) - ramp_antiderivative(c - big, small)) /
         (2.0 * big);
}

}  // namespace

double expected_positive_pair_gap(const PriceDistribution& prev,
                                  const PriceDistribution& cur) noexcept {
  const double h_prev = prev.perturb_delta();
  const double h_cur = cur.perturb_delta();
  double acc = 0.0;
  for (const Atom& x : prev.atoms()) {
    for (const Atom& y : cur.atoms()) {
      acc += x.prob * y.prob * smoothed_positive_part(y.value - x.value, h_prev, h_cur);
    }
  }
  return acc;
}

CostModel CostModel::make(double eps_pi, double eps_sigma) {
  if (!(eps_pi >= 0.0 && eps_pi < 1.0)) {
    throw std::invalid_argument("eps_pi must lie in [0,1), got " + std::to_string(eps_pi));
  }
  if (!(eps_sigma >= 0.0) || !std::isfinite(eps_sigma)) {
    throw std::invalid_argument("eps_sigma must be finite and >= 0, got " +
                                std::to_string(eps_sigma));
  }
  return {eps_pi, eps_sigma};
}

// ---------------------------------------------------------------------------
// PriceProcess

namespace {

const PriceDistribution& zero_point_mass() {
  static const PriceDistribution zero = PriceDistribution::point_mass(0.0);
  return zero;
}

}  // namespace

PriceProcess::PriceProcess(Variant v) : variant_(std::move(v)) {}

PriceProcess PriceProcess::independent(std::vector<PriceDistribution> steps) {
  if (steps.empty()) throw std::invalid_argument("horizon must be >= 1");
  return PriceProcess(IndependentSequence{std::move(steps)});
}

PriceProcess PriceProcess::iid(PriceDistribution dist, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  return PriceProcess(Iid{std::move(dist), horizon});
}

PriceProcess PriceProcess::deterministic(std::vector<double> prices) {
  if (prices.empty()) throw std::invalid_argument("horizon must be >= 1");
  std::vector<PriceDistribution> masses;
  masses.reserve(prices.size());
  for (double x : prices) masses.push_back(PriceDistribution::point_mass(x));
  PriceProcess p(Deterministic{std::move(prices)});
  p.point_masses_ = std::move(masses);
  return p;
}

PriceProcess PriceProcess::adaptive(std::function<std::unique_ptr<AdaptiveSource>()> make_source,
                                    std::size_t max_steps) {
  if (!make_source) throw std::invalid_argument("adaptive process needs a source factory");
  if (max_steps == 0) throw std::invalid_argument("horizon must be >= 1");
  return PriceProcess(Adaptive{std::move(make_source), max_steps});
}

std::size_t PriceProcess::horizon() const noexcept {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, IndependentSequence>) return v.steps.size();
        else if constexpr (std::is_same_v<V, Iid>) return v.horizon;
        else if constexpr (std::is_same_v<V, Deterministic>) return v.prices.size();
        else return v.max_steps;
      },
      variant_);
}

const PriceDistribution& PriceProcess::distribution(std::size_t step) const {
  if (is_adaptive()) throw std::logic_error("adaptive processes have no fixed distributions");
  const std::size_t T = horizon();
  if (step > T + 1) throw std::out_of_range("step beyond sentinel T+1");
  if (step == 0 || step == T + 1) return zero_point_mass();
  if (const auto* seq = std::get_if<IndependentSequence>(&variant_)) return seq->steps[step - 1];
  if (const auto* iid = std::get_if<Iid>(&variant_)) return iid->dist;
  return point_masses_[step - 1];
}

double PriceProcess::mean(std::size_t step) const { return distribution(step).mean(); }

std::vector<double> PriceProcess::sample(Rng& rng) const {
  if (is_adaptive()) throw std::logic_error("adaptive processes are realized by the engine");
  if (const auto* det = std::get_if<Deterministic>(&variant_)) return det->prices;
  const std::size_t T = horizon();
  std::vector<double> out(T);
  if (const auto* iid = std::get_if<Iid>(&variant_)) {
    for (double& x : out) x = iid->dist.sample(rng);
    return out;
  }
  const auto& steps = std::get<IndependentSequence>(variant_).steps;
  for (std::size_t i = 0; i < T; ++i) out[i] = steps[i].sample(rng);
  return out;
}

}  // namespace tprophet
