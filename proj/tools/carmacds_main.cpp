// carmacds: simulate, price, fit, and compare Levy-driven CARMA models of
// CDS premia under constant and stochastic recovery.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "carmacds/ats.hpp"
#include "carmacds/carma.hpp"
#include "carmacds/credit.hpp"
#include "carmacds/dataio.hpp"
#include "carmacds/errors.hpp"
#include "carmacds/format.hpp"
#include "carmacds/inference.hpp"
#include "carmacds/levy.hpp"
#include "carmacds/random.hpp"
#include "carmacds/version.hpp"

namespace cds = carmacds;
using carmacds::fmt_g17;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& text,
                               const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw cds::UsageError(flag + ": malformed number \"" + tok + "\"");
    }
  }
  if (out.empty()) throw cds::UsageError(flag + ": empty list");
  return out;
}

// Flag > config-file > default, with every effective value recorded for the
// reproducibility header.
class Resolver {
 public:
  explicit Resolver(json cfg) : cfg_(std::move(cfg)) {}

  template <typename T>
  T get(const CLI::Option* opt, const T& flag_value, const std::string& key,
        const T& fallback) {
    T v = fallback;
    if (cfg_.contains(key)) {
      try {
        v = cfg_.at(key).get<T>();
      } catch (const json::exception&) {
        throw cds::UsageError("config: field \"" + key +
                              "\" has the wrong type");
      }
    }
    if (opt != nullptr && opt->count() > 0) v = flag_value;
    resolved_[key] = v;
    return v;
  }

  bool was_set(const CLI::Option* opt, const std::string& key) const {
    return (opt != nullptr && opt->count() > 0) || cfg_.contains(key);
  }

  // Coefficient lists arrive as comma strings on the command line but as
  // JSON arrays in config files (and in emitted headers).
  std::optional<std::vector<double>> get_list(const CLI::Option* opt,
                                              const std::string& flag_value,
                                              const std::string& key) {
    std::optional<std::vector<double>> v;
    if (cfg_.contains(key)) {
      const json& j = cfg_.at(key);
      try {
        if (j.is_string())
          v = parse_list(j.get<std::string>(), "config " + key);
        else
          v = j.get<std::vector<double>>();
      } catch (const json::exception&) {
        throw cds::UsageError("config: field \"" + key +
                              "\" must be a number list");
      }
    }
    if (opt != nullptr && opt->count() > 0)
      v = parse_list(flag_value, "--" + key);
    if (v) resolved_[key] = *v;
    return v;
  }

  void note(const std::string& key, const json& v) { resolved_[key] = v; }
  const json& resolved() const { return resolved_; }

 private:
  json cfg_;
  json resolved_ = json::object();
};

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw cds::IoError("config: cannot open " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw cds::UsageError("config: expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw cds::UsageError(std::string("config: ") + e.what());
  }
}

std::ofstream open_artifact(const std::string& path, const json& resolved,
                            std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw cds::IoError("cannot write " + path);
  out << "# carmacds " << cds::kVersion << "\n";
  out << "# config " << resolved.dump() << "\n";
  out << "# seed " << seed << "\n";
  return out;
}

std::string iso_date_from_index(long day_index) {
  using namespace std::chrono;
  sys_days base = sys_days(year{2000} / month{1} / day{1});
  year_month_day ymd(base + days(day_index));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

// ----------------------------------------------------------------------
// Shared model construction from flags/config.

struct ModelFlags {
  bool car1 = false;
  double a1 = 0.0;
  std::string a_list, b_list;
  std::string driver = "brownian";
  double drift = 0.0, vol = 1.0;
  double rate = 1.0, jump_mean = 0.0, jump_sd = 1.0;
  double alpha = 2.0, nig_beta = 0.0, delta = 1.0, mu = 0.0;
  double R = 0.4;
  double beta0 = 0.0, beta1 = 0.0, beta2 = 0.0;

  CLI::Option *o_car1 = nullptr, *o_a1 = nullptr, *o_a = nullptr,
              *o_b = nullptr, *o_driver = nullptr, *o_drift = nullptr,
              *o_vol = nullptr, *o_rate = nullptr, *o_jm = nullptr,
              *o_jsd = nullptr, *o_alpha = nullptr, *o_nb = nullptr,
              *o_delta = nullptr, *o_mu = nullptr, *o_R = nullptr,
              *o_b0 = nullptr, *o_b1 = nullptr, *o_b2 = nullptr;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m, bool with_recovery) {
  m.o_car1 = cmd->add_flag("--car1", m.car1, "shorthand for p=1, q=0");
  m.o_a1 = cmd->add_option("--a1", m.a1, "CAR(1) coefficient a_1");
  m.o_a = cmd->add_option("--a", m.a_list,
                          "autoregressive coefficients a_1,...,a_p");
  m.o_b = cmd->add_option("--b", m.b_list,
                          "moving-average coefficients b_0,...,b_{p-1}");
  m.o_driver = cmd->add_option("--driver", m.driver,
                               "driver kind: brownian|cpn|nig");
  m.o_drift = cmd->add_option("--drift", m.drift, "Brownian drift");
  m.o_vol = cmd->add_option("--vol", m.vol, "Brownian volatility");
  m.o_rate = cmd->add_option("--rate", m.rate, "compound Poisson jump rate");
  m.o_jm = cmd->add_option("--jump-mean", m.jump_mean, "jump size mean");
  m.o_jsd = cmd->add_option("--jump-sd", m.jump_sd, "jump size sd");
  m.o_alpha = cmd->add_option("--alpha", m.alpha, "NIG alpha");
  m.o_nb = cmd->add_option("--nig-beta", m.nig_beta, "NIG beta");
  m.o_delta = cmd->add_option("--delta", m.delta, "NIG delta");
  m.o_mu = cmd->add_option("--mu", m.mu, "NIG mu");
  if (with_recovery) {
    m.o_R = cmd->add_option("--R", m.R, "constant recovery rate");
    m.o_b0 = cmd->add_option("--beta0", m.beta0, "recovery beta0");
    m.o_b1 = cmd->add_option("--beta1", m.beta1, "recovery beta1");
    m.o_b2 = cmd->add_option("--beta2", m.beta2, "recovery beta2");
  }
}

cds::carma::CarmaSpec resolve_spec(Resolver& res, const ModelFlags& m) {
  bool car1 = res.get(m.o_car1, m.car1, "car1", false);
  auto a_given = res.get_list(m.o_a, m.a_list, "a");
  std::vector<double> a;
  if (res.was_set(m.o_a1, "a1") || car1) {
    double a1 = res.get(m.o_a1, m.a1, "a1", 1.0);
    if (!res.was_set(m.o_a1, "a1"))
      throw cds::UsageError("model: --car1 requires --a1");
    a = {a1};
  } else if (a_given) {
    a = *a_given;
  } else {
    throw cds::UsageError("model: autoregressive coefficients missing "
                          "(--a or --car1 --a1)");
  }
  res.note("a", a);

  auto b_given = res.get_list(m.o_b, m.b_list, "b");
  std::vector<double> b;
  if (b_given) {
    b = *b_given;
    if (b.size() != a.size())
      throw cds::UsageError("model: --b must list p coefficients "
                            "(pad with zeros above b_q)");
  } else {
    // default CAR(p): q = 0
    b.assign(a.size(), 0.0);
    b[0] = 1.0;
  }
  res.note("b", b);
  return cds::carma::CarmaSpec::create(a, b);
}

cds::levy::LevyDriver resolve_driver(Resolver& res, const ModelFlags& m) {
  std::string kind =
      res.get<std::string>(m.o_driver, m.driver, "driver", "brownian");
  if (kind == "brownian")
    return cds::levy::LevyDriver::brownian(
        res.get(m.o_drift, m.drift, "drift", 0.0),
        res.get(m.o_vol, m.vol, "vol", 1.0));
  if (kind == "cpn")
    return cds::levy::LevyDriver::compound_poisson_normal(
        res.get(m.o_rate, m.rate, "rate", 1.0),
        res.get(m.o_jm, m.jump_mean, "jump_mean", 0.0),
        res.get(m.o_jsd, m.jump_sd, "jump_sd", 1.0));
  if (kind == "nig")
    return cds::levy::LevyDriver::nig(
        res.get(m.o_alpha, m.alpha, "alpha", 2.0),
        res.get(m.o_nb, m.nig_beta, "nig_beta", 0.0),
        res.get(m.o_delta, m.delta, "delta", 1.0),
        res.get(m.o_mu, m.mu, "mu", 0.0));
  throw cds::UsageError("model: unknown driver \"" + kind + "\"");
}

cds::credit::RecoveryParams resolve_recovery(Resolver& res,
                                             const ModelFlags& m) {
  bool stochastic = res.was_set(m.o_b0, "beta0") ||
                    res.was_set(m.o_b1, "beta1") ||
                    res.was_set(m.o_b2, "beta2");
  if (stochastic) {
    if (!(res.was_set(m.o_b0, "beta0") && res.was_set(m.o_b1, "beta1") &&
          res.was_set(m.o_b2, "beta2")))
      throw cds::UsageError("model: stochastic recovery needs all of "
                            "--beta0 --beta1 --beta2");
    auto params = cds::credit::RecoveryParams::stochastic(
        res.get(m.o_b0, m.beta0, "beta0", 0.0),
        res.get(m.o_b1, m.beta1, "beta1", 0.0),
        res.get(m.o_b2, m.beta2, "beta2", 0.0));
    res.note("recovery_mode", "stochastic");
    return params;
  }
  auto params = cds::credit::RecoveryParams::constant(
      res.get(m.o_R, m.R, "R", 0.4));
  res.note("recovery_mode", "constant");
  return params;
}

void warn_recovery_range(const cds::credit::RecoveryParams& params) {
  if (params.mode() == cds::credit::RecoveryMode::Stochastic &&
      params.range_warning())
    std::cout << "warning: beta0 + beta2 >= 1; recovery rate can leave (0,1) "
                 "at small intensities\n";
}

// ----------------------------------------------------------------------
// Inference config flags shared by fit/compare.

struct FitFlags {
  int p = 1, q = 0;
  int n_starts = 10, max_iters = 2000;
  int mcmc_samples = 4000, burn_in = 1000;
  double beta1_range = 10.0;
  double credible_level = 0.95;
  double constant_recovery = 0.4;

  CLI::Option *o_p = nullptr, *o_q = nullptr, *o_starts = nullptr,
              *o_iters = nullptr, *o_samples = nullptr, *o_burn = nullptr,
              *o_brange = nullptr, *o_level = nullptr, *o_crr_R = nullptr;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
  f.o_p = cmd->add_option("--p", f.p, "autoregressive order");
  f.o_q = cmd->add_option("--q", f.q, "moving-average order");
  f.o_starts = cmd->add_option("--n-starts", f.n_starts,
                               "optimizer random starts");
  f.o_iters = cmd->add_option("--max-iters", f.max_iters,
                              "optimizer iteration cap");
  f.o_samples = cmd->add_option("--mcmc-samples", f.mcmc_samples,
                                "kept MCMC draws");
  f.o_burn = cmd->add_option("--burn-in", f.burn_in, "MCMC burn-in");
  f.o_brange = cmd->add_option("--beta1-range", f.beta1_range,
                               "beta1 prior range B in Uniform(-B,0]");
  f.o_level = cmd->add_option("--credible-level", f.credible_level,
                              "credible interval level");
  f.o_crr_R = cmd->add_option("--constant-recovery", f.constant_recovery,
                              "constant recovery value for CRR reports");
}

cds::inference::FitConfig resolve_fit_config(Resolver& res,
                                             const FitFlags& f) {
  cds::inference::FitConfig config;
  config.p = res.get(f.o_p, f.p, "p", 1);
  config.q = res.get(f.o_q, f.q, "q", 0);
  config.optimizer.n_starts = res.get(f.o_starts, f.n_starts, "n_starts", 10);
  config.optimizer.max_iters =
      res.get(f.o_iters, f.max_iters, "max_iters", 2000);
  config.mcmc.n_samples =
      res.get(f.o_samples, f.mcmc_samples, "mcmc_samples", 4000);
  config.mcmc.burn_in = res.get(f.o_burn, f.burn_in, "burn_in", 1000);
  config.mcmc.beta1_prior_range =
      res.get(f.o_brange, f.beta1_range, "beta1_range", 10.0);
  config.mcmc.credible_level =
      res.get(f.o_level, f.credible_level, "credible_level", 0.95);
  config.constant_recovery =
      res.get(f.o_crr_R, f.constant_recovery, "constant_recovery", 0.4);
  return config;
}

// ----------------------------------------------------------------------
// Summary statistics for cmd_simulate.

double lag1_autocorr(const std::vector<double>& y) {
  const size_t n = y.size();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < n; ++k) {
    den += (y[k] - mean) * (y[k] - mean);
    if (k + 1 < n) num += (y[k] - mean) * (y[k + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

// ----------------------------------------------------------------------
// Commands.

int cmd_simulate(Resolver& res, const ModelFlags& m, double h, int n_steps,
                 std::uint64_t seed, double c0, double gamma0,
                 const std::string& primitive, double tenor,
                 const std::string& out_prefix) {
  auto spec = resolve_spec(res, m);
  auto driver = resolve_driver(res, m);
  auto recovery = resolve_recovery(res, m);

  // Default: the spread is the primitive, except that with beta0 + beta2
  // >= 1 the spread map is not invertible, so the intensity takes over.
  bool spread_primitive;
  if (primitive == "spread") {
    spread_primitive = true;
  } else if (primitive == "intensity") {
    spread_primitive = false;
  } else if (primitive == "auto") {
    spread_primitive =
        !(recovery.mode() == cds::credit::RecoveryMode::Stochastic &&
          recovery.range_warning());
  } else {
    throw cds::UsageError("--primitive must be auto, spread, or intensity");
  }
  res.note("primitive", spread_primitive ? "spread" : "intensity");

  cds::RandomStream rng(seed);
  cds::credit::GeneratedPaths paths;
  if (spread_primitive) {
    paths = cds::credit::generate_spread_path(spec, driver, recovery, c0, h,
                                              n_steps, rng, tenor);
  } else {
    // Raw credit-triangle values here: recovery above 1 makes the premium
    // non-positive, which is flagged by the range warning rather than
    // rejected, so the whole path is still written for inspection.
    paths.state = cds::carma::simulate(spec, driver, h, n_steps,
                                       std::nullopt, rng);
    paths.spread.times = paths.state.times;
    paths.spread.tenor = tenor;
    paths.intensity.times = paths.state.times;
    double log_g = std::log(gamma0);
    for (size_t k = 0; k < paths.state.times.size(); ++k) {
      if (k > 0) log_g += h * paths.state.outputs[k];
      double g = std::exp(log_g);
      paths.intensity.gamma.push_back(g);
      paths.spread.premium.push_back(
          (1.0 - cds::credit::recovery_rate(recovery, g)) * g);
    }
  }
  warn_recovery_range(recovery);

  const json& resolved = res.resolved();
  {
    auto out = open_artifact(out_prefix + "_state.csv", resolved, seed);
    out << "time";
    for (int j = 0; j < spec.p; ++j) out << ",x" << (j + 1);
    out << ",y\n";
    for (size_t k = 0; k < paths.state.times.size(); ++k) {
      out << fmt_g17(paths.state.times[k]);
      for (int j = 0; j < spec.p; ++j)
        out << "," << fmt_g17(paths.state.states(static_cast<long>(k), j));
      out << "," << fmt_g17(paths.state.outputs[k]) << "\n";
    }
  }
  {
    auto out = open_artifact(out_prefix + "_path.csv", resolved, seed);
    out << "time,premium,gamma,recovery\n";
    for (size_t k = 0; k < paths.spread.times.size(); ++k) {
      double g = paths.intensity.gamma[k];
      out << fmt_g17(paths.spread.times[k]) << ","
          << fmt_g17(paths.spread.premium[k]) << "," << fmt_g17(g) << ","
          << fmt_g17(cds::credit::recovery_rate(recovery, g)) << "\n";
    }
  }
  {
    // date,value form so the fit/compare pipeline ingests simulated premia.
    cds::dataio::RawSeries series;
    series.entity = out_prefix;
    for (size_t k = 0; k < paths.spread.times.size(); ++k) {
      series.dates.push_back(iso_date_from_index(static_cast<long>(k)));
      series.values.push_back(paths.spread.premium[k]);
    }
    std::vector<std::string> header{
        std::string("carmacds ") + cds::kVersion,
        "config " + resolved.dump(), "seed " + std::to_string(seed)};
    cds::dataio::save_csv(series, {}, out_prefix + "_premium.csv", header);
  }

  const auto& y = paths.state.outputs;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size() - 1);
  double rmin = 1e300, rmax = -1e300;
  for (double g : paths.intensity.gamma) {
    double r = cds::credit::recovery_rate(recovery, g);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  std::cout << "output mean " << fmt_g17(mean) << "\n"
            << "output variance " << fmt_g17(var) << "\n"
            << "output lag-1 autocorrelation " << fmt_g17(lag1_autocorr(y))
            << "\n"
            << "recovery min " << fmt_g17(rmin) << " max " << fmt_g17(rmax)
            << "\n"
            << "wrote " << out_prefix << "_state.csv, " << out_prefix
            << "_path.csv, " << out_prefix << "_premium.csv\n";
  return 0;
}

int cmd_price(Resolver& res, const ModelFlags& m, bool bond_mode,
              bool cds_mode, double h, std::uint64_t seed, double r,
              double tau_max, int tau_points, int ensemble, double settle,
              double tenor, double c0, double const_gamma, bool has_cg,
              const std::string& out_prefix) {
  if (bond_mode == cds_mode)
    throw cds::UsageError("price: choose exactly one of --bond or --cds");
  auto spec = resolve_spec(res, m);
  const json& resolved = res.resolved();

  if (bond_mode) {
    auto sys = cds::carma::build_system(spec);
    if (spec.p != 1)
      throw cds::UnsupportedConfigError(
          "price --bond: pricing is defined for p = 1 only");
    auto out = open_artifact(out_prefix + "_bond.csv", resolved, seed);
    out << "tau,A,B,price,yield\n";
    for (int i = 0; i <= tau_points; ++i) {
      double tau = tau_max * static_cast<double>(i) /
                   static_cast<double>(tau_points);
      auto coeffs = cds::ats::affine_coeffs_closed(sys, tau);
      auto quote = cds::ats::bond_price(coeffs, r);
      out << fmt_g17(tau) << "," << fmt_g17(coeffs.A_val) << ","
          << fmt_g17(coeffs.B_val(0, 0)) << "," << fmt_g17(quote.price)
          << "," << fmt_g17(quote.yield) << "\n";
    }
    std::cout << "wrote " << out_prefix << "_bond.csv\n";
    return 0;
  }

  auto recovery = resolve_recovery(res, m);
  warn_recovery_range(recovery);
  cds::credit::DiscountCurve curve{r};
  std::vector<cds::credit::IntensityPath> paths;
  int n_steps =
      static_cast<int>(std::ceil((settle + tenor) / h - 1e-9));
  if (has_cg) {
    cds::credit::IntensityPath path;
    for (int k = 0; k <= n_steps; ++k) {
      path.times.push_back(h * k);
      path.gamma.push_back(const_gamma);
    }
    paths.assign(static_cast<size_t>(std::max(ensemble, 1)), path);
  } else {
    auto driver = resolve_driver(res, m);
    cds::RandomStream rng(seed);
    for (int i = 0; i < ensemble; ++i) {
      cds::RandomStream sub = rng.substream(static_cast<std::uint64_t>(i));
      auto gen = cds::credit::generate_spread_path(spec, driver, recovery,
                                                   c0, h, n_steps, sub,
                                                   tenor);
      paths.push_back(std::move(gen.intensity));
    }
  }
  auto fair =
      cds::credit::fair_spread_mc(paths, recovery, curve, settle, tenor);
  auto out = open_artifact(out_prefix + "_cds.csv", resolved, seed);
  out << "fair_spread,std_error,ensemble\n";
  out << fmt_g17(fair.value) << "," << fmt_g17(fair.std_error) << ","
      << paths.size() << "\n";
  std::cout << "fair spread " << fmt_g17(fair.value) << " (MC se "
            << fmt_g17(fair.std_error) << ", ensemble " << paths.size()
            << ")\n"
            << "wrote " << out_prefix << "_cds.csv\n";
  return 0;
}

cds::credit::SpreadPath spread_path_from_csv(const std::string& input,
                                             double h, double tenor) {
  auto raw = cds::dataio::load_csv(input);
  auto filled = cds::dataio::impute_missing(raw);
  cds::credit::SpreadPath path;
  path.tenor = tenor;
  path.premium.reserve(filled.values.size());
  for (size_t k = 0; k < filled.values.size(); ++k) {
    path.times.push_back(h * static_cast<double>(k));
    double v = filled.values[k].value();
    if (!(v > 0.0))
      throw cds::DataQualityError(
          "fit: non-positive premium at index " + std::to_string(k) + " (" +
          filled.dates[k] + ")");
    path.premium.push_back(v);
  }
  return path;
}

void write_fit_report(const cds::inference::FitReport& report,
                      const std::string& entity, const json& resolved,
                      std::uint64_t seed, const std::string& out_prefix) {
  {
    std::ofstream out(out_prefix + "_report.json");
    if (!out) throw cds::IoError("cannot write " + out_prefix +
                                 "_report.json");
    json j;
    j["tool_version"] = cds::kVersion;
    j["config"] = resolved;
    j["seed"] = seed;
    j["entity"] = entity;
    j["report"] = report.to_json();
    out << j.dump(2) << "\n";
  }
  {
    auto out = open_artifact(out_prefix + "_report.csv", resolved, seed);
    out << "entity,model,loglik,bic,converged\n";
    out << entity << ","
        << (report.model == cds::inference::Model::Srr ? "srr" : "crr") << ","
        << fmt_g17(report.loglik) << "," << fmt_g17(report.bic_value) << ","
        << (report.converged ? 1 : 0) << "\n";
  }
}

int cmd_fit(Resolver& res, const FitFlags& f, const std::string& input,
            const std::string& model, double h, double tenor,
            std::uint64_t seed, const std::string& entity_flag,
            const std::string& out_prefix) {
  if (model != "crr" && model != "srr")
    throw cds::UsageError("fit: --model must be crr or srr");
  auto config = resolve_fit_config(res, f);
  auto path = spread_path_from_csv(input, h, tenor);
  std::string entity = entity_flag;
  if (entity.empty())
    entity = cds::dataio::load_csv(input).entity;
  const json& resolved = res.resolved();

  cds::RandomStream rng(seed);
  cds::inference::FitReport report;
  if (model == "crr") {
    config.model = cds::inference::Model::Crr;
    std::vector<double> returns(path.premium.size() - 1);
    for (size_t k = 1; k < path.premium.size(); ++k)
      returns[k - 1] = std::log(path.premium[k]) -
                       std::log(path.premium[k - 1]);
    auto fit = cds::inference::fit_carma(returns, h, config, rng);
    report.model = cds::inference::Model::Crr;
    report.a.assign(fit.spec.a.data(), fit.spec.a.data() + config.p);
    report.b.assign(fit.spec.b.data(), fit.spec.b.data() + config.p);
    report.mean_rate = fit.mean_rate;
    report.variance_rate = fit.variance_rate;
    report.recovery =
        cds::credit::RecoveryParams::constant(config.constant_recovery);
    report.loglik = fit.loglik;
    report.k_free = config.p + config.q + 2;
    report.n_obs = static_cast<int>(returns.size());
    report.bic_value =
        cds::inference::bic(report.loglik, report.k_free, report.n_obs);
    report.converged = fit.converged;
    report.warnings = fit.warnings;
  } else {
    config.model = cds::inference::Model::Srr;
    auto comparison = cds::inference::compare_models(path, config, rng);
    report = comparison.srr;
  }
  write_fit_report(report, entity, resolved, seed, out_prefix);
  std::cout << "entity " << entity << " model " << model << " loglik "
            << fmt_g17(report.loglik) << " bic " << fmt_g17(report.bic_value)
            << " converged " << (report.converged ? 1 : 0) << "\n";
  for (const std::string& w : report.warnings)
    std::cout << "warning: " << w << "\n";
  return 0;
}

struct ManifestEntry {
  std::string entity;
  std::string path;
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cds::IoError("compare: cannot open manifest " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "entity,path") continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw cds::DataQualityError("compare: manifest row lacks a comma: " +
                                  line);
    entries.push_back({line.substr(0, comma), line.substr(comma + 1)});
  }
  if (entries.empty())
    throw cds::UsageError("compare: manifest has no entries");
  return entries;
}

int cmd_compare(Resolver& res, const FitFlags& f, const std::string& manifest,
                double h, double tenor, std::uint64_t seed,
                const std::string& out_prefix) {
  auto config = resolve_fit_config(res, f);
  config.model = cds::inference::Model::Srr;
  auto entries = load_manifest(manifest);
  const json& resolved = res.resolved();

  struct Row {
    std::string text;
    bool failed = false;
    bool preferred_srr = false;
    std::string warning;
  };
  std::vector<Row> rows(entries.size());

  // Entries run in parallel on independent substreams; rows are emitted in
  // manifest order.
  auto work = [&](size_t idx) {
    Row row;
    try {
      auto path = spread_path_from_csv(entries[idx].path, h, tenor);
      cds::RandomStream rng =
          cds::RandomStream(seed).substream(1000 + idx);
      auto result = cds::inference::compare_models(path, config, rng);
      row.text = result.csv_row(entries[idx].entity);
      row.preferred_srr = result.preferred == cds::inference::Model::Srr;
      if (!result.srr.converged || !result.crr.converged)
        row.warning = entries[idx].entity + ": a model branch did not "
                                           "converge";
    } catch (const cds::Error& e) {
      row.text = entries[idx].entity + ",NA,NA,failed";
      row.failed = true;
      row.warning = entries[idx].entity + ": " + e.what();
    }
    return row;
  };

  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  size_t next = 0;
  while (next < entries.size()) {
    size_t batch = std::min<size_t>(hw, entries.size() - next);
    std::vector<std::future<Row>> futs;
    for (size_t j = 0; j < batch; ++j)
      futs.push_back(std::async(std::launch::async, work, next + j));
    for (size_t j = 0; j < batch; ++j) rows[next + j] = futs[j].get();
    next += batch;
  }

  size_t ok = 0, srr_count = 0;
  for (const Row& row : rows) {
    if (!row.failed) {
      ++ok;
      if (row.preferred_srr) ++srr_count;
    }
  }
  double fraction = ok > 0 ? static_cast<double>(srr_count) /
                                 static_cast<double>(ok)
                           : 0.0;

  auto out = open_artifact(out_prefix + "_compare.csv", resolved, seed);
  out << "entity,bic_srr,bic_crr,preferred\n";
  for (const Row& row : rows) out << row.text << "\n";
  out << "# srr_preferred_fraction " << fmt_g17(fraction) << "\n";

  for (const Row& row : rows)
    if (!row.warning.empty()) std::cout << "warning: " << row.warning << "\n";
  std::cout << "compared " << ok << " of " << entries.size()
            << " entities; fraction preferring srr " << fmt_g17(fraction)
            << "\n"
            << "wrote " << out_prefix << "_compare.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levy-driven CARMA models of CDS premia"};
  app.require_subcommand(1);
  // --h is a model flag below, so help must not claim the short -h.
  app.set_help_flag("--help", "print help");

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")
      ->expected(1);

  // simulate
  auto* sim = app.add_subcommand("simulate",
                                 "simulate state, premium, intensity paths");
  sim->set_help_flag("--help", "print help");
  ModelFlags sim_m;
  add_model_flags(sim, sim_m, true);
  double sim_h = 1.0, sim_c0 = 0.01, sim_g0 = 0.05, sim_tenor = 5.0;
  int sim_n = 3000;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "sim";
  auto* sim_oh = sim->add_option("--h", sim_h, "grid spacing");
  auto* sim_on = sim->add_option("--n", sim_n, "number of steps");
  auto* sim_oseed = sim->add_option("--seed", sim_seed, "random seed");
  auto* sim_oc0 = sim->add_option("--c0", sim_c0, "initial premium");
  auto* sim_og0 = sim->add_option("--gamma0", sim_g0,
                                  "initial intensity (intensity primitive)");
  std::string sim_primitive = "auto";
  auto* sim_oprim = sim->add_option(
      "--primitive", sim_primitive,
      "path primitive: auto, spread, or intensity");
  auto* sim_otenor = sim->add_option("--tenor", sim_tenor, "CDS tenor");
  auto* sim_oout = sim->add_option("--out", sim_out, "output prefix");

  // price
  auto* price = app.add_subcommand("price", "bond curve or fair CDS spread");
  price->set_help_flag("--help", "print help");
  ModelFlags price_m;
  add_model_flags(price, price_m, true);
  bool price_bond = false, price_cds = false;
  double price_h = 0.05, price_r = 0.03, price_tau_max = 30.0;
  double price_settle = 0.0, price_tenor = 5.0, price_c0 = 0.01;
  double price_cg = 0.05;
  int price_tau_points = 60, price_ensemble = 200;
  std::uint64_t price_seed = 1;
  std::string price_out = "price";
  auto* price_obond = price->add_flag("--bond", price_bond,
                                      "bond pricing mode");
  auto* price_ocdsm = price->add_flag("--cds", price_cds, "fair-spread mode");
  auto* price_oh = price->add_option("--h", price_h, "grid spacing");
  auto* price_or = price->add_option("--r", price_r, "constant short rate");
  auto* price_otau = price->add_option("--tau-max", price_tau_max,
                                       "largest maturity");
  auto* price_otaun = price->add_option("--tau-points", price_tau_points,
                                        "maturity grid points");
  auto* price_oens = price->add_option("--ensemble", price_ensemble,
                                       "Monte Carlo ensemble size");
  auto* price_osettle = price->add_option("--settle", price_settle,
                                          "settlement time s");
  auto* price_otenor = price->add_option("--tenor", price_tenor, "CDS tenor");
  auto* price_oc0 = price->add_option("--c0", price_c0, "initial premium");
  auto* price_ocg = price->add_option("--constant-gamma", price_cg,
                                      "constant intensity level");
  auto* price_oseed = price->add_option("--seed", price_seed, "random seed");
  auto* price_oout = price->add_option("--out", price_out, "output prefix");

  // fit
  auto* fit = app.add_subcommand("fit", "fit CRR or SRR model to a series");
  fit->set_help_flag("--help", "print help");
  FitFlags fit_f;
  add_fit_flags(fit, fit_f);
  std::string fit_input, fit_model = "srr", fit_entity;
  double fit_h = 1.0, fit_tenor = 5.0;
  std::uint64_t fit_seed = 1;
  std::string fit_out = "fit";
  auto* fit_oinput =
      fit->add_option("--input", fit_input, "premium CSV (date,value)");
  auto* fit_omodel = fit->add_option("--model", fit_model, "crr or srr");
  auto* fit_oh = fit->add_option("--h", fit_h, "grid spacing");
  auto* fit_otenor = fit->add_option("--tenor", fit_tenor, "CDS tenor");
  auto* fit_oseed = fit->add_option("--seed", fit_seed, "random seed");
  auto* fit_oentity = fit->add_option("--entity", fit_entity,
                                      "entity name override");
  auto* fit_oout = fit->add_option("--out", fit_out, "output prefix");

  // compare
  auto* cmp = app.add_subcommand("compare", "batch SRR vs CRR comparison");
  cmp->set_help_flag("--help", "print help");
  FitFlags cmp_f;
  add_fit_flags(cmp, cmp_f);
  std::string cmp_manifest;
  double cmp_h = 1.0, cmp_tenor = 5.0;
  std::uint64_t cmp_seed = 1;
  std::string cmp_out = "compare";
  auto* cmp_omanifest =
      cmp->add_option("--manifest", cmp_manifest, "entity,path manifest");
  auto* cmp_oh = cmp->add_option("--h", cmp_h, "grid spacing");
  auto* cmp_otenor = cmp->add_option("--tenor", cmp_tenor, "CDS tenor");
  auto* cmp_oseed = cmp->add_option("--seed", cmp_seed, "random seed");
  auto* cmp_oout = cmp->add_option("--out", cmp_out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Resolver res(load_config_file(config_path));
    if (sim->parsed()) {
      double h = res.get(sim_oh, sim_h, "h", 1.0);
      int n = res.get(sim_on, sim_n, "n", 3000);
      std::uint64_t seed = res.get<std::uint64_t>(sim_oseed, sim_seed,
                                                  "seed", 1);
      double c0 = res.get(sim_oc0, sim_c0, "c0", 0.01);
      double gamma0 = res.get(sim_og0, sim_g0, "gamma0", 0.05);
      std::string primitive = res.get<std::string>(sim_oprim, sim_primitive,
                                                   "primitive", "auto");
      double tenor = res.get(sim_otenor, sim_tenor, "tenor", 5.0);
      std::string out = res.get<std::string>(sim_oout, sim_out, "out", "sim");
      res.note("command", "simulate");
      return cmd_simulate(res, sim_m, h, n, seed, c0, gamma0, primitive,
                          tenor, out);
    }
    if (price->parsed()) {
      double h = res.get(price_oh, price_h, "h", 0.05);
      double r = res.get(price_or, price_r, "r", 0.03);
      double tau_max = res.get(price_otau, price_tau_max, "tau_max", 30.0);
      int tau_points =
          res.get(price_otaun, price_tau_points, "tau_points", 60);
      int ensemble = res.get(price_oens, price_ensemble, "ensemble", 200);
      double settle = res.get(price_osettle, price_settle, "settle", 0.0);
      double tenor = res.get(price_otenor, price_tenor, "tenor", 5.0);
      double c0 = res.get(price_oc0, price_c0, "c0", 0.01);
      bool has_cg = res.was_set(price_ocg, "constant_gamma");
      double cg = res.get(price_ocg, price_cg, "constant_gamma", 0.05);
      std::uint64_t seed = res.get<std::uint64_t>(price_oseed, price_seed,
                                                  "seed", 1);
      std::string out =
          res.get<std::string>(price_oout, price_out, "out", "price");
      bool bond_mode = res.get(price_obond, price_bond, "bond", false);
      bool cds_mode = res.get(price_ocdsm, price_cds, "cds", false);
      res.note("command", "price");
      return cmd_price(res, price_m, bond_mode, cds_mode, h, seed, r,
                       tau_max, tau_points, ensemble, settle, tenor, c0, cg,
                       has_cg, out);
    }
    if (fit->parsed()) {
      std::string model =
          res.get<std::string>(fit_omodel, fit_model, "model", "srr");
      double h = res.get(fit_oh, fit_h, "h", 1.0);
      double tenor = res.get(fit_otenor, fit_tenor, "tenor", 5.0);
      std::uint64_t seed = res.get<std::uint64_t>(fit_oseed, fit_seed,
                                                  "seed", 1);
      std::string entity =
          res.get<std::string>(fit_oentity, fit_entity, "entity", "");
      std::string out = res.get<std::string>(fit_oout, fit_out, "out", "fit");
      std::string input =
          res.get<std::string>(fit_oinput, fit_input, "input", "");
      if (input.empty()) throw cds::UsageError("fit: --input is required");
      res.note("command", "fit");
      return cmd_fit(res, fit_f, input, model, h, tenor, seed, entity, out);
    }
    if (cmp->parsed()) {
      double h = res.get(cmp_oh, cmp_h, "h", 1.0);
      double tenor = res.get(cmp_otenor, cmp_tenor, "tenor", 5.0);
      std::uint64_t seed = res.get<std::uint64_t>(cmp_oseed, cmp_seed,
                                                  "seed", 1);
      std::string out =
          res.get<std::string>(cmp_oout, cmp_out, "out", "compare");
      std::string manifest =
          res.get<std::string>(cmp_omanifest, cmp_manifest, "manifest", "");
      if (manifest.empty())
        throw cds::UsageError("compare: --manifest is required");
      res.note("command", "compare");
      return cmd_compare(res, cmp_f, manifest, h, tenor, seed, out);
    }
    throw cds::UsageError("no command selected");
  } catch (const cds::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cds::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cds::DataQualityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cds::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
