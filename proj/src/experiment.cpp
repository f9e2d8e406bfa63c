#include "tprophet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tprophet/adversary.hpp"
#include "tprophet/errors.hpp"
#include "tprophet/format.hpp"
#include "tprophet/oracle.hpp"
#include "tprophet/rng.hpp"

namespace tprophet {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path, const std::string& field) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError(field, "file not found: " + path);
  }
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::string& text, const std::string& field) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config serialization

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["instance"] = {{"name", cfg.instance.name},     {"eps", cfg.instance.eps},
                   {"T", cfg.instance.horizon},     {"phases", cfg.instance.phases},
                   {"k", cfg.instance.k},           {"path", cfg.instance.path}};
  j["trader"] = {{"name", cfg.trader.name}, {"margin", cfg.trader.margin}};
  j["costs"] = {{"eps_pi", cfg.costs.eps_pi}, {"eps_sigma", cfg.costs.eps_sigma}};
  j["T_grid"] = cfg.horizons;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  j["output"] = cfg.output;
  j["format"] = cfg.format;
  j["workers"] = cfg.workers;
  j["target"] = cfg.target;
  j["which"] = cfg.which;
  j["random_instances"] = cfg.random_instances;
  return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = parse_json(text, "config");
  ExperimentConfig cfg;
  try {
    if (get_or<int>(j, "schema_version", kSchemaVersion) != kSchemaVersion) {
      throw ConfigError("schema_version", "unsupported schema version");
    }
    if (const auto it = j.find("instance"); it != j.end()) {
      const json& in = *it;
      cfg.instance.name = get_or<std::string>(in, "name", cfg.instance.name);
      cfg.instance.eps = get_or<double>(in, "eps", cfg.instance.eps);
      cfg.instance.horizon = get_or<std::size_t>(in, "T", cfg.instance.horizon);
      cfg.instance.phases = get_or<std::size_t>(in, "phases", cfg.instance.phases);
      cfg.instance.k = get_or<std::size_t>(in, "k", cfg.instance.k);
      cfg.instance.path = get_or<std::string>(in, "path", cfg.instance.path);
    }
    if (const auto it = j.find("trader"); it != j.end()) {
      cfg.trader.name = get_or<std::string>(*it, "name", cfg.trader.name);
      cfg.trader.margin = get_or<double>(*it, "margin", cfg.trader.margin);
    }
    if (const auto it = j.find("costs"); it != j.end()) {
      cfg.costs.eps_pi = get_or<double>(*it, "eps_pi", 0.0);
      cfg.costs.eps_sigma = get_or<double>(*it, "eps_sigma", 0.0);
    }
    cfg.horizons = get_or<std::vector<std::size_t>>(j, "T_grid", {});
    cfg.trials = get_or<std::size_t>(j, "trials", cfg.trials);
    if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
      cfg.seed = it->get<std::uint64_t>();
    }
    cfg.output = get_or<std::string>(j, "output", "");
    cfg.format = get_or<std::string>(j, "format", cfg.format);
    cfg.workers = get_or<unsigned>(j, "workers", 0U);
    cfg.target = get_or<std::string>(j, "target", "");
    cfg.which = get_or<std::string>(j, "which", "");
    cfg.random_instances = get_or<std::size_t>(j, "random_instances", cfg.random_instances);
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("bad field type: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  return config_from_json(read_file(path, "config"));
}

// ---------------------------------------------------------------------------
// Distributions and processes from files

namespace {

PriceDistribution distribution_from(const json& j, const std::string& field) {
  try {
    std::vector<Atom> atoms;
    for (const json& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) {
        throw ConfigError(field, "each atom must be a [value, prob] pair");
      }
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    return PriceDistribution(std::move(atoms), get_or<double>(j, "delta", 0.0));
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("bad distribution: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

PriceDistribution distribution_from_json(const std::string& text) {
  return distribution_from(parse_json(text, "dist"), "dist");
}

PriceDistribution load_distribution(const std::string& name_or_path) {
  if (name_or_path == "uniform01") return PriceDistribution::uniform(0.0, 1.0);
  if (name_or_path.empty()) throw ConfigError("dist", "no distribution given");
  return distribution_from_json(read_file(name_or_path, "dist"));
}

PriceProcess process_from_json(const std::string& text) {
  const json j = parse_json(text, "process");
  const std::string variant = get_or<std::string>(j, "variant", "");
  try {
    if (variant == "iid") {
      return PriceProcess::iid(distribution_from(j.at("distribution"), "process.distribution"),
                               j.at("horizon").get<std::size_t>());
    }
    if (variant == "independent") {
      std::vector<PriceDistribution> steps;
      for (const json& d : j.at("distributions")) {
        steps.push_back(distribution_from(d, "process.distributions"));
      }
      if (j.contains("horizon") && j["horizon"].get<std::size_t>() != steps.size()) {
        throw ConfigError("process.horizon", "must equal the number of distributions");
      }
      return PriceProcess::independent(std::move(steps));
    }
    if (variant == "deterministic") {
      return PriceProcess::deterministic(j.at("prices").get<std::vector<double>>());
    }
    if (variant == "generator") {
      ExperimentConfig cfg;
      cfg.instance.name = j.at("instance").get<std::string>();
      cfg.instance.eps = get_or<double>(j, "eps", cfg.instance.eps);
      cfg.instance.horizon = get_or<std::size_t>(j, "horizon", cfg.instance.horizon);
      cfg.instance.phases = get_or<std::size_t>(j, "phases", cfg.instance.phases);
      cfg.instance.k = get_or<std::size_t>(j, "k", cfg.instance.k);
      if (cfg.instance.name == "process" || cfg.instance.name == "dist") {
        throw ConfigError("process.instance", "generator must name a built-in instance");
      }
      return build_process(cfg);
    }
  } catch (const json::exception& e) {
    throw ConfigError("process", std::string("bad process spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("process", e.what());
  }
  throw ConfigError("process.variant", "unknown variant '" + variant + "'");
}

// ---------------------------------------------------------------------------
// Validation and construction

namespace {

bool eps_in_unit_interval(double eps) { return eps > 0.0 && eps < 1.0; }

// Threshold solving from the command line needs a continuous CDF (or a single
// atom), whether or not a flat stretch happens to contain a root.
Thresholds thresholds_for(const PriceDistribution& d, const CostModel& cm) {
  if (!d.has_continuous_cdf() && !d.is_point_mass()) {
    throw DiscontinuousCdf("distribution has several atoms and delta = 0; add a perturbation "
                           "delta > 0");
  }
  return solve_thresholds(d, cm);
}

std::optional<std::size_t> parse_lookahead_k(const std::string& name, std::string* policy) {
  constexpr std::string_view prefix = "lookahead:";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  std::string rest = name.substr(prefix.size());
  std::string pol = "greedy";
  if (const auto colon = rest.find(':'); colon != std::string::npos) {
    pol = rest.substr(colon + 1);
    rest = rest.substr(0, colon);
  }
  if (rest.empty() || !std::all_of(rest.begin(), rest.end(), ::isdigit)) return std::nullopt;
  if (policy) *policy = pol;
  return std::stoul(rest);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  const InstanceSpec& in = cfg.instance;
  const std::string& n = in.name;
  if (n != "prop-adv" && n != "prop-iid" && n != "appendix-fail" && n != "phase" &&
      n != "dist" && n != "process") {
    throw ConfigError("instance", "unknown instance '" + n + "'");
  }
  if ((n == "prop-adv" || n == "prop-iid" || n == "appendix-fail" || n == "phase") &&
      !eps_in_unit_interval(in.eps)) {
    throw ConfigError("eps", "must lie in (0,1)");
  }
  if (n != "phase" && n != "process" && in.horizon == 0) throw ConfigError("T", "must be >= 1");
  if (n == "prop-adv" && in.horizon % 2 != 0) throw ConfigError("T", "must be even for prop-adv");
  if (n == "phase" && (in.phases == 0 || in.k == 0)) {
    throw ConfigError("phases", "phase adversary needs phases >= 1 and k >= 1");
  }
  if ((n == "dist" || n == "process") && in.path.empty()) {
    throw ConfigError(n == "dist" ? "dist" : "process", "no file given");
  }
  if (!(cfg.costs.eps_pi >= 0.0 && cfg.costs.eps_pi < 1.0)) {
    throw ConfigError("eps_pi", "must lie in [0,1)");
  }
  if (!(cfg.costs.eps_sigma >= 0.0)) throw ConfigError("eps_sigma", "must be >= 0");
  if (n == "phase" && !(cfg.costs == CostModel{0.0, in.eps})) {
    throw ConfigError("eps_sigma", "phase adversary requires eps_pi = 0 and eps_sigma = eps");
  }
  const std::string& t = cfg.trader.name;
  if (t != "blsh" && t != "bbsa" && t != "eps-margin" && !parse_lookahead_k(t, nullptr)) {
    throw ConfigError("trader", "unknown trader '" + t + "'");
  }
  if (cfg.trials == 0) throw ConfigError("trials", "must be >= 1");
  if (cfg.format != "csv" && cfg.format != "json") {
    throw ConfigError("format", "must be csv or json");
  }
}

PriceProcess build_process(const ExperimentConfig& cfg) {
  const InstanceSpec& in = cfg.instance;
  try {
    if (in.name == "prop-adv") return gen_prop_adversarial(in.eps, in.horizon);
    if (in.name == "prop-iid") return gen_prop_iid(in.eps, in.horizon);
    if (in.name == "appendix-fail") return gen_appendix_failure(in.eps, in.horizon);
    if (in.name == "phase") return gen_phase_adversary(in.eps, in.k, in.phases);
    if (in.name == "dist") return PriceProcess::iid(load_distribution(in.path), in.horizon);
    if (in.name == "process") return process_from_json(read_file(in.path, "process"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("instance", e.what());
  }
  throw ConfigError("instance", "unknown instance '" + in.name + "'");
}

TraderFactory build_trader_factory(const ExperimentConfig& cfg, const PriceProcess& process) {
  const std::string& name = cfg.trader.name;
  if (name == "blsh") return [] { return make_blsh(); };
  if (name == "eps-margin") {
    const double margin = cfg.trader.margin < 0.0 ? cfg.costs.eps_sigma : cfg.trader.margin;
    return [margin] { return make_eps_margin(margin); };
  }
  if (name == "bbsa") {
    const auto* iid = std::get_if<PriceProcess::Iid>(&process.variant());
    if (!iid) throw ConfigError("trader", "bbsa needs an i.i.d. price process");
    Thresholds th;
    try {
      th = thresholds_for(iid->dist, cfg.costs);
    } catch (const DiscontinuousCdf& e) {
      throw ConfigError("dist", e.what());
    }
    return [th] { return make_bbsa(th); };
  }
  std::string policy;
  if (const auto k = parse_lookahead_k(name, &policy)) {
    if (*k == 0) throw ConfigError("trader", "lookahead k must be >= 1");
    if (policy != "greedy" && policy != "blsh") {
      throw ConfigError("trader", "unknown lookahead policy '" + policy + "'");
    }
    const std::size_t depth = *k;
    const CostModel cm = cfg.costs;
    if (policy == "blsh") return [depth] { return make_lookahead(depth, blsh_lookahead_policy()); };
    return [depth, cm] { return make_lookahead(depth, greedy_lookahead_policy(depth, cm)); };
  }
  throw ConfigError("trader", "unknown trader '" + name + "'");
}

// ---------------------------------------------------------------------------
// Random instances

PriceDistribution random_distribution(Rng& rng, std::size_t max_atoms, double max_value,
                                      bool allow_perturbation) {
  const std::size_t n = 1 + rng.below(max_atoms);
  std::vector<Atom> atoms(n);
  double total = 0.0;
  for (Atom& a : atoms) {
    a.value = rng.uniform(0.0, max_value);
    a.prob = rng.uniform(0.05, 1.0);
    total += a.prob;
  }
  for (Atom& a : atoms) a.prob /= total;
  double delta = 0.0;
  if (allow_perturbation && rng.uniform01() < 0.5) {
    const double lowest =
        std::min_element(atoms.begin(), atoms.end(), [](auto& a, auto& b) {
          return a.value < b.value;
        })->value;
    delta = 0.5 * lowest * rng.uniform01();
  }
  return PriceDistribution(std::move(atoms), delta);
}

PriceProcess random_independent_process(Rng& rng, std::size_t max_horizon, std::size_t max_atoms) {
  const std::size_t T = 1 + rng.below(max_horizon);
  std::vector<PriceDistribution> steps;
  steps.reserve(T);
  for (std::size_t i = 0; i < T; ++i) steps.push_back(random_distribution(rng, max_atoms, 10.0, true));
  return PriceProcess::independent(std::move(steps));
}

PriceProcess random_iid_process(Rng& rng, std::size_t max_horizon, std::size_t max_atoms) {
  const std::size_t T = 1 + rng.below(max_horizon);
  return PriceProcess::iid(random_distribution(rng, max_atoms, 10.0, true), T);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json stats_json(const BatchStats& s) {
  return {{"trials", s.trials},     {"alg_mean", s.alg_mean}, {"alg_se", s.alg_se},
          {"opt_mean", s.opt_mean}, {"opt_se", s.opt_se},     {"ratio", s.ratio},
          {"ratio_lo", s.ratio_lo}, {"ratio_hi", s.ratio_hi}};
}

json record_json(const VerificationRecord& r) {
  return {{"instance", r.instance}, {"T", r.horizon}, {"e_alg", r.e_alg}, {"e_opt", r.e_opt},
          {"bound", r.bound},       {"slack", r.slack}, {"pass", r.pass}};
}

void print_records(std::ostream& out, const std::vector<VerificationRecord>& records) {
  std::size_t w = 10;
  for (const VerificationRecord& r : records) w = std::max(w, r.instance.size() + 2);
  const int name_w = static_cast<int>(w);
  out << std::left << std::setw(name_w) << "instance" << std::setw(10) << "T" << std::setw(24)
      << "e_alg" << std::setw(24) << "e_opt" << std::setw(24) << "bound" << std::setw(24)
      << "slack"
      << "pass\n";
  for (const VerificationRecord& r : records) {
    out << std::left << std::setw(name_w) << r.instance << std::setw(10) << r.horizon << std::setw(24)
        << format_double(r.e_alg) << std::setw(24) << format_double(r.e_opt) << std::setw(24)
        << format_double(r.bound) << std::setw(24) << format_double(r.slack)
        << (r.pass ? "yes" : "NO") << '\n';
  }
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("seed", "--seed is required; there is no implicit seed");
  return *cfg.seed;
}

int finish_verify(const ExperimentConfig& cfg, const std::vector<VerificationRecord>& records,
                  std::ostream& out) {
  print_records(out, records);
  const bool pass = std::all_of(records.begin(), records.end(), [](auto& r) { return r.pass; });
  out << "result: " << (pass ? "PASS" : "FAIL") << '\n';
  if (!cfg.output.empty()) {
    json report;
    report["schema_version"] = kSchemaVersion;
    report["target"] = cfg.target;
    report["records"] = json::array();
    for (const auto& r : records) report["records"].push_back(record_json(r));
    report["pass"] = pass;
    std::ofstream f(cfg.output);
    if (!f) throw ConfigError("output", "cannot write " + cfg.output);
    f << report.dump(2) << '\n';
  }
  return pass ? kExitOk : kExitBoundViolated;
}

int verify_theorem1(const ExperimentConfig& cfg, std::ostream& out) {
  Rng rng(require_seed(cfg));
  const std::size_t n = cfg.random_instances;
  UpperBoundReport worst_general;
  UpperBoundReport worst_equal;
  double worst_general_frac = -1.0;
  double worst_equal_frac = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const PriceProcess general = random_independent_process(rng, 50, 4);
    const UpperBoundReport g =
        verify_upper_bound_theorem(general, "random-independent #" + std::to_string(i));
    const double g_frac = g.record.bound > 0.0 ? g.record.e_opt / g.record.bound : 0.0;
    if (g_frac > worst_general_frac) {
      worst_general_frac = g_frac;
      worst_general = g;
    }
    const PriceProcess equal = random_iid_process(rng, 50, 4);
    const UpperBoundReport e =
        verify_upper_bound_theorem(equal, "equal-mean-iid #" + std::to_string(i));
    if (!e.equal_means) throw BoundViolated("i.i.d. instance not recognized as equal-mean");
    const double e_frac = e.record.bound > 0.0 ? e.record.e_opt / e.record.bound : 0.0;
    if (e_frac > worst_equal_frac) {
      worst_equal_frac = e_frac;
      worst_equal = e;
    }
  }
  out << "theorem1: " << n << " random independent instances (factor 3) and " << n
      << " equal-mean i.i.d. instances (factor 2); tightest of each:\n";
  worst_general.record.instance += " (3x)";
  worst_equal.record.instance += " (2x)";
  return finish_verify(cfg, {worst_general.record, worst_equal.record}, out);
}

int verify_theorem2(const ExperimentConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  const PriceDistribution d = load_distribution(cfg.instance.path.empty() ? "uniform01"
                                                                          : cfg.instance.path);
  const CostModel cm = cfg.costs;
  const std::size_t T = cfg.instance.horizon;
  Thresholds th;
  try {
    th = thresholds_for(d, cm);
  } catch (const DiscontinuousCdf& e) {
    throw ConfigError("dist", e.what());
  }
  const PriceProcess process = PriceProcess::iid(d, T);
  const MonteCarloResult mc =
      monte_carlo(process, [th] { return make_bbsa(th); }, cm, cfg.trials, seed, cfg.workers);
  const BatchStats& s = mc.stats;

  const double alg_bound = bbsa_expected_profit_lower_bound(d, cm, T, th);
  const double opt_bound = expected_opt_upper_bound_iid_costs(d, cm, T, th);
  std::vector<double> diff;
  diff.reserve(mc.records.size());
  for (const auto& r : mc.records) diff.push_back(r.opt_profit - 2.0 * r.alg_profit);
  const MeanSe dse = mean_and_se(diff);

  out << "theorem2: thresholds z_low=" << format_double(th.z_low)
      << " z_high=" << format_double(th.z_high) << " v=" << format_double(th.common_price)
      << " p=" << format_double(th.tail_prob) << "\n";
  out << "monte carlo: " << s.trials << " trials, E[ALG]=" << format_double(s.alg_mean)
      << " (se " << format_double(s.alg_se) << "), E[OPT]=" << format_double(s.opt_mean)
      << " (se " << format_double(s.opt_se) << "), ratio=" << format_double(s.ratio)
      << ", 2 + v/E[ALG]=" << format_double(2.0 + th.common_price / s.alg_mean) << "\n";

  std::vector<VerificationRecord> rows;
  // (a) E[ALG] >= lower bound, one-sided at 4 standard errors.
  rows.push_back({"bbsa profit >= (pT/2)[...]", T, s.alg_mean, s.opt_mean, alg_bound,
                  s.alg_mean - alg_bound, s.alg_mean >= alg_bound - 4.0 * s.alg_se});
  // (b) E[OPT] <= v + pT[...].
  rows.push_back({"prophet <= v + pT[...]", T, s.alg_mean, s.opt_mean, opt_bound,
                  opt_bound - s.opt_mean, s.opt_mean <= opt_bound + 4.0 * s.opt_se});
  // (c) E[OPT] - 2 E[ALG] <= v, paired per trial.
  rows.push_back({"prophet <= 2 E[ALG] + v", T, s.alg_mean, s.opt_mean,
                  2.0 * s.alg_mean + th.common_price, th.common_price - dse.mean,
                  dse.mean <= th.common_price + 4.0 * dse.se});
  return finish_verify(cfg, rows, out);
}

int verify_lowerbound(const ExperimentConfig& cfg, std::ostream& out) {
  const std::string which = cfg.which.empty() ? "adversarial" : cfg.which;
  const double eps = cfg.instance.eps;
  const std::size_t T = cfg.instance.horizon;
  if (!eps_in_unit_interval(eps)) throw ConfigError("eps", "must lie in (0,1)");
  PriceProcess process = [&] {
    if (which == "adversarial") {
      if (T % 2 != 0) throw ConfigError("T", "must be even");
      return gen_prop_adversarial(eps, T);
    }
    if (which == "iid") return gen_prop_iid(eps, T);
    throw ConfigError("which", "must be adversarial or iid");
  }();
  const double e_opt = expected_opt_zero_cost(process);
  const double e_alg = best_online_upper_bound(process);
  const double ratio = e_opt / e_alg;
  const double Td = static_cast<double>(T);
  const double proof_bound = which == "adversarial"
                                 ? (3.0 - 6.0 * eps) / (1.0 + 2.0 / (eps * Td))
                                 : (eps / 2.0 - eps * eps / 4.0) * Td / (0.5 + Td * eps / 4.0);
  out << "lowerbound " << which << ": eps=" << format_double(eps) << " T=" << T
      << " E[OPT]/best-online=" << format_double(ratio)
      << " proof bound=" << format_double(proof_bound) << "\n";

  std::vector<VerificationRecord> rows;
  rows.push_back({"ratio >= proof bound (" + which + ")", T, e_alg, e_opt, proof_bound * e_alg,
                  e_opt - proof_bound * e_alg, ratio >= proof_bound * (1.0 - kBoundRelTolerance)});
  if (cfg.seed) {
    const MonteCarloResult mc = monte_carlo(process, [] { return make_blsh(); }, CostModel::zero(),
                                            cfg.trials, *cfg.seed, cfg.workers);
    const BatchStats& s = mc.stats;
    out << "monte carlo: " << s.trials << " trials, E[ALG]=" << format_double(s.alg_mean)
        << " (se " << format_double(s.alg_se) << "), E[OPT]=" << format_double(s.opt_mean)
        << " (se " << format_double(s.opt_se) << "), ratio 95% CI=[" << format_double(s.ratio_lo)
        << ", " << format_double(s.ratio_hi) << "]\n";
    rows.push_back({"mc blsh profit = closed form", T, s.alg_mean, s.opt_mean, e_alg,
                    e_alg - s.alg_mean, std::abs(s.alg_mean - e_alg) <= 4.0 * s.alg_se});
    rows.push_back({"mc prophet profit = closed form", T, s.alg_mean, s.opt_mean, e_opt,
                    e_opt - s.opt_mean, std::abs(s.opt_mean - e_opt) <= 4.0 * s.opt_se});
  }
  return finish_verify(cfg, rows, out);
}

int verify_appendix(const ExperimentConfig& cfg, std::ostream& out) {
  const std::string which = cfg.which.empty() ? "all" : cfg.which;
  if (which != "all" && which != "phase" && which != "eps-margin") {
    throw ConfigError("which", "must be phase, eps-margin or all");
  }
  const double eps = cfg.instance.eps;
  if (!eps_in_unit_interval(eps)) throw ConfigError("eps", "must lie in (0,1)");
  const CostModel cm{0.0, eps};
  std::vector<VerificationRecord> rows;

  if (which == "all" || which == "phase") {
    const std::size_t phases = cfg.instance.phases;
    const std::size_t k = cfg.instance.k;
    if (phases == 0 || k == 0) throw ConfigError("phases", "need phases >= 1 and k >= 1");
    const PriceProcess process = gen_phase_adversary(eps, k, phases);
    const double prophet_target = static_cast<double>(phases) * eps / 2.0;
    const std::pair<std::string, TraderFactory> victims[] = {
        {"blsh-as-lookahead-1", [] { return make_lookahead(1, blsh_lookahead_policy()); }},
        {"greedy-lookahead-" + std::to_string(k),
         [k, cm] { return make_lookahead(k, greedy_lookahead_policy(k, cm)); }},
    };
    for (const auto& [label, factory] : victims) {
      auto trader = factory();
      const EpisodeResult ep = run_episode(process, *trader, cm, 0);
      const double tol = 1e-9 * static_cast<double>(phases);
      rows.push_back({"phase vs " + label + ": victim <= 0", ep.realization.size(), ep.alg_profit,
                      ep.opt_profit, 0.0, -ep.alg_profit, ep.alg_profit <= tol});
      rows.push_back({"phase vs " + label + ": prophet = N eps/2", ep.realization.size(),
                      ep.alg_profit, ep.opt_profit, prophet_target,
                      prophet_target - ep.opt_profit,
                      std::abs(ep.opt_profit - prophet_target) <= tol});
    }
  }

  if (which == "all" || which == "eps-margin") {
    const std::uint64_t seed = require_seed(cfg);
    const std::size_t T = cfg.instance.horizon;
    const PriceProcess process = gen_appendix_failure(eps, T);
    const MonteCarloResult mc = monte_carlo(process, [eps] { return make_eps_margin(eps); }, cm,
                                            cfg.trials, seed, cfg.workers);
    const BatchStats& s = mc.stats;
    double max_alg = -INFINITY;
    for (const auto& r : mc.records) max_alg = std::max(max_alg, r.alg_profit);
    const double alg_cap = 1.0 + eps;
    const double opt_floor = static_cast<double>(T - 1) * 2.0 * eps / 25.0;
    const double opt_lower = s.opt_mean - 4.0 * s.opt_se;
    out << "eps-margin: max episode profit=" << format_double(max_alg)
        << " E[ALG]=" << format_double(s.alg_mean) << " E[OPT]=" << format_double(s.opt_mean)
        << " (se " << format_double(s.opt_se) << ")\n";
    rows.push_back({"eps-margin profit <= 1 + eps", T, s.alg_mean, s.opt_mean, alg_cap,
                    alg_cap - max_alg, max_alg <= alg_cap + 1e-12});
    rows.push_back({"prophet >= (T-1) 2eps/25", T, s.alg_mean, s.opt_mean, opt_floor,
                    opt_lower - opt_floor, opt_lower >= opt_floor});
    // every episode earns at most 1 + eps, so E[OPT] / E[ALG] >= opt_lower / max_alg
    const double ratio_floor = opt_floor / alg_cap;
    const double ratio_lower = max_alg > 0.0 ? opt_lower / max_alg : INFINITY;
    rows.push_back({"ratio >= (T-1) 2eps / (25 (1+eps))", T, s.alg_mean, s.opt_mean, ratio_floor,
                    ratio_lower - ratio_floor, ratio_lower >= ratio_floor});
  }
  return finish_verify(cfg, rows, out);
}

}  // namespace

namespace {

// simulate with a horizon grid: one batch per T, then the ratio fit.
int simulate_grid(const ExperimentConfig& cfg, std::uint64_t seed, std::ostream& out) {
  if (cfg.instance.name == "phase" || cfg.instance.name == "process") {
    throw ConfigError("T_grid", "a horizon grid needs a generator or dist instance");
  }
  const InstanceFamily family = [&cfg](std::size_t T) {
    ExperimentConfig c = cfg;
    c.instance.horizon = T;
    validate(c);
    return build_process(c);
  };
  const TraderFactory factory = build_trader_factory(cfg, family(cfg.horizons.front()));
  CompetitiveEstimate est;
  try {
    est = estimate_competitive_ratio(family, factory, cfg.costs, cfg.horizons, cfg.trials, seed,
                                     cfg.workers);
  } catch (const DegenerateFit& e) {
    throw ConfigError("T_grid", e.what());
  }
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["config"] = json::parse(config_to_json(cfg));
  doc["alpha_hat"] = est.alpha_hat;
  doc["alpha_se"] = est.alpha_se;
  doc["c_hat"] = est.c_hat;
  doc["c_se"] = est.c_se;
  doc["residual_norm"] = est.residual_norm;
  doc["grid"] = json::array();
  for (std::size_t i = 0; i < est.horizons.size(); ++i) {
    doc["grid"].push_back({{"T", est.horizons[i]},
                           {"e_alg", est.e_alg[i]},
                           {"e_opt", est.e_opt[i]},
                           {"residual", est.residuals(static_cast<Eigen::Index>(i))}});
  }
  std::ostringstream body;
  if (cfg.format == "json") {
    body << doc.dump(2) << '\n';
  } else {
    body << "# schema_version=" << kSchemaVersion << '\n';
    body << "# config=" << config_to_json(cfg) << '\n';
    for (const char* key : {"alpha_hat", "alpha_se", "c_hat", "c_se", "residual_norm"}) {
      body << "# " << key << '=' << doc[key].dump() << '\n';
    }
    body << "T,e_alg,e_opt,residual\n";
    for (const json& row : doc["grid"]) {
      body << row["T"].get<std::size_t>() << ',' << format_double(row["e_alg"].get<double>())
           << ',' << format_double(row["e_opt"].get<double>()) << ','
           << format_double(row["residual"].get<double>()) << '\n';
    }
  }
  if (cfg.output.empty()) {
    out << body.str();
  } else {
    std::ofstream f(cfg.output);
    if (!f) throw ConfigError("output", "cannot write " + cfg.output);
    f << body.str();
    out << "alpha_hat=" << format_double(est.alpha_hat) << " c_hat=" << format_double(est.c_hat)
        << '\n';
  }
  return kExitOk;
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    const std::uint64_t seed = require_seed(cfg);
    if (!cfg.horizons.empty()) return simulate_grid(cfg, seed, out);
    const PriceProcess process = build_process(cfg);
    const TraderFactory factory = build_trader_factory(cfg, process);
    const MonteCarloResult mc =
        monte_carlo(process, factory, cfg.costs, cfg.trials, seed, cfg.workers);

    std::ostringstream body;
    if (cfg.format == "json") {
      json doc;
      doc["schema_version"] = kSchemaVersion;
      doc["config"] = json::parse(config_to_json(cfg));
      doc["stats"] = stats_json(mc.stats);
      doc["trials"] = json::array();
      for (const auto& r : mc.records) {
        doc["trials"].push_back({{"trial", r.trial},
                                 {"seed", r.seed},
                                 {"alg_profit", r.alg_profit},
                                 {"opt_profit", r.opt_profit}});
      }
      body << doc.dump(2) << '\n';
    } else {
      body << "# schema_version=" << kSchemaVersion << '\n';
      body << "# config=" << config_to_json(cfg) << '\n';
      for (const auto& [key, value] : stats_json(mc.stats).items()) {
        body << "# " << key << '=' << value.dump() << '\n';
      }
      write_trials_csv(body, mc.records);
    }

    if (cfg.output.empty()) {
      out << body.str();
    } else {
      std::ofstream f(cfg.output);
      if (!f) throw ConfigError("output", "cannot write " + cfg.output);
      f << body.str();
      const BatchStats& s = mc.stats;
      out << "trials=" << s.trials << " alg_mean=" << format_double(s.alg_mean)
          << " alg_se=" << format_double(s.alg_se) << " opt_mean=" << format_double(s.opt_mean)
          << " opt_se=" << format_double(s.opt_se) << " ratio=" << format_double(s.ratio) << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.trials == 0) throw ConfigError("trials", "must be >= 1");
    if (cfg.target == "theorem1") return verify_theorem1(cfg, out);
    if (cfg.target == "theorem2") return verify_theorem2(cfg, out);
    if (cfg.target == "lowerbound") return verify_lowerbound(cfg, out);
    if (cfg.target == "appendix") return verify_appendix(cfg, out);
    throw ConfigError("target", "unknown verification target '" + cfg.target +
                                    "' (theorem1, theorem2, lowerbound, appendix)");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const BoundViolated& e) {
    err << "bound violated: " << e.what() << '\n';
    return kExitBoundViolated;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

int cmd_thresholds(const std::string& dist, const CostModel& cm, std::ostream& out,
                   std::ostream& err) {
  try {
    if (!(cm.eps_pi >= 0.0 && cm.eps_pi < 1.0)) throw ConfigError("eps_pi", "must lie in [0,1)");
    if (!(cm.eps_sigma >= 0.0)) throw ConfigError("eps_sigma", "must be >= 0");
    const PriceDistribution d = load_distribution(dist);
    const Thresholds th = thresholds_for(d, cm);
    const auto line = [&out](const char* key, double x) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", x);
      out << key << '=' << buf << '\n';
    };
    line("z_low", th.z_low);
    line("z_high", th.z_high);
    line("v", th.common_price);
    line("p", th.tail_prob);
    line("v_low", th.mean_below);
    line("v_high", th.mean_above);
    line("median", th.median);
    out << "residual_tails=" << format_double(th.tail_residual(d)) << '\n'
        << "residual_prices=" << format_double(th.price_residual(cm)) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DiscontinuousCdf& e) {
    err << "config error: dist: " << e.what()
        << "\nhint: add \"delta\": <small positive number> to the distribution file\n";
    return kExitConfigError;
  }
}

}  // namespace tprophet
