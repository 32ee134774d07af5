#include "fgle/harness.hpp"

#include "fgle/errors.hpp"
#include "fgle/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#ifndef FGLE_VERSION
#define FGLE_VERSION "0.0.0"
#endif

namespace fgle {

using nlohmann::json;

namespace {

RateFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("fit needs at least two distinct stepsizes");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.std_error = n > 2 ? std::sqrt(rss / double(n - 2) / sxx) : 0.0;
  return fit;
}

void check_fit_input(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size()) throw DegenerateFit("stepsizes and errors differ in length");
  if (h.size() < 3) throw DegenerateFit("fit needs at least 3 points");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !std::isfinite(h[i])) throw DegenerateFit("non-positive stepsize");
    if (!(e[i] > 0.0) || !std::isfinite(e[i])) {
      throw DegenerateFit("error at h=" + format_number(h[i]) + " is zero or non-finite");
    }
  }
}

Index pow2(Index k) { return Index(1) << k; }

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json fit_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return {{"slope", fit->slope}, {"intercept", fit->intercept}, {"stderr", fit->std_error}};
}

std::string method_name(Method m) { return m == Method::Euler ? "euler" : "fast_euler"; }

Method parse_method(const std::string& s) {
  if (s == "euler") return Method::Euler;
  if (s == "fast_euler" || s == "fast") return Method::FastEuler;
  throw ConfigError("unknown method '" + s + "'");
}

json model_json(const ModelSpec& m) {
  return {{"hurst", m.hurst}, {"alpha", m.alpha}, {"sigma", m.sigma},
          {"horizon", m.horizon}, {"x0", m.x0}, {"drift", m.drift.name()}};
}

json plan_json(const MlmcPlan& plan) {
  std::vector<double> h;
  for (Index l = 0; l <= plan.levels; ++l) h.push_back(plan.stepsize(l));
  return {{"refinement", plan.refinement},
          {"accuracy", plan.accuracy},
          {"rho", plan.rho},
          {"levels", plan.levels},
          {"samples", plan.samples},
          {"stepsizes", h},
          {"constants", {{"c1", plan.constants.c1}, {"c2", plan.constants.c2}, {"c3", plan.constants.c3}}}};
}

json levels_json(const MlmcResult& r) {
  json rows = json::array();
  for (const auto& s : r.per_level) {
    rows.push_back({{"level", s.level},
                    {"h", s.stepsize},
                    {"samples", s.samples},
                    {"mean_correction", s.mean_correction},
                    {"var_correction", s.variance_correction},
                    {"cost_units", s.cost_units},
                    {"m_exp", s.m_exp_fine}});
  }
  return rows;
}

// ln var_l against ln h_l over correction levels with positive variance
std::optional<RateFit> variance_decay(const MlmcResult& r) {
  std::vector<double> h, v;
  for (const auto& s : r.per_level) {
    if (s.level >= 1 && s.variance_correction > 0.0) {
      h.push_back(s.stepsize);
      v.push_back(s.variance_correction);
    }
  }
  if (h.size() < 3) return std::nullopt;
  return fit_rate(h, v);
}

std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

// ---- typed JSON access ----

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key);
}

}  // namespace

// ---- fits ----

RateFit fit_rate(const std::vector<double>& stepsizes, const std::vector<double>& errors) {
  check_fit_input(stepsizes, errors);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < stepsizes.size(); ++i) {
    x.push_back(std::log(stepsizes[i]));
    y.push_back(std::log(errors[i]));
  }
  return ols(x, y);
}

RateFit fit_rate_log_corrected(const std::vector<double>& stepsizes,
                               const std::vector<double>& errors) {
  check_fit_input(stepsizes, errors);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < stepsizes.size(); ++i) {
    if (!(stepsizes[i] < 1.0)) throw DegenerateFit("log-corrected fit needs h < 1");
    x.push_back(std::log(stepsizes[i]));
    y.push_back(std::log(errors[i] / std::abs(std::log(stepsizes[i]))));
  }
  return ols(x, y);
}

// ---- strong order ----

StrongOrderReport strong_order_study(const ModelSpec& model, Index k_min, Index k_max,
                                     Index samples, const NoiseSeed& seed,
                                     const StrongOrderOptions& options) {
  require_valid(model);
  if (k_min < 1 || k_max < k_min + 2) throw DomainError("need 1 <= k_min and k_max >= k_min + 2");
  if (options.reference_refinement < 1) throw DomainError("reference_refinement must be >= 1");
  if (k_max + options.reference_refinement > 20) throw DomainError("reference grid too fine");
  if (samples < 100) throw DomainError("strong-order study needs at least 100 samples");

  const Index n_ref = pow2(k_max + options.reference_refinement);
  const Grid ref_grid(model.horizon, n_ref);
  const GProcessSampler sampler = cached_g_sampler(ref_grid, model, options.cache_dir);
  const Index levels = k_max - k_min + 1;

  std::vector<Grid> grids;
  std::vector<SoeApproximation> soes;
  std::vector<Eigen::VectorXd> sum_sq;
  std::vector<double> sum_max(std::size_t(levels), 0.0), sum_max_sq(std::size_t(levels), 0.0);
  for (Index k = k_min; k <= k_max; ++k) {
    grids.emplace_back(model.horizon, pow2(k));
    soes.push_back(options.method == Method::FastEuler ? soe_for_grid(model.alpha, grids.back())
                                                       : SoeApproximation{});
    sum_sq.push_back(Eigen::VectorXd::Zero(pow2(k)));
  }

  const Index batch = std::max<Index>(options.batch, 1);
  std::vector<NoiseSeed> seeds;
  for (Index start = 0; start < samples; start += batch) {
    const Index nb = std::min(batch, samples - start);
    seeds.clear();
    for (Index i = 0; i < nb; ++i) seeds.push_back(seed.with_sample(start + i));
    const Eigen::MatrixXd g = sample_g_batch(sampler, seeds);
    for (Index i = 0; i < nb; ++i) {
      const PathSolution ref = euler_solve(model, ref_grid, g.col(i));
      for (Index li = 0; li < levels; ++li) {
        const Grid& grid = grids[std::size_t(li)];
        const Index stride = n_ref / grid.n_steps();
        const Eigen::VectorXd gk = restrict_path(g.col(i), stride);
        const PathSolution sol = options.method == Method::Euler
                                     ? euler_solve(model, grid, gk)
                                     : fast_euler_solve(model, grid, soes[std::size_t(li)], gk);
        Eigen::VectorXd sq(grid.n_steps());
        for (Index n = 1; n <= grid.n_steps(); ++n) {
          const double d = sol.values[n] - ref.values[n * stride];
          sq[n - 1] = d * d;
        }
        const double worst = sq.maxCoeff();
        sum_sq[std::size_t(li)] += sq;
        sum_max[std::size_t(li)] += worst;
        sum_max_sq[std::size_t(li)] += worst * worst;
      }
    }
  }

  StrongOrderReport report;
  report.model = model;
  report.method = options.method;
  report.samples = samples;
  report.reference_stepsize = ref_grid.stepsize();
  report.theoretical = theoretical_rate(model.hurst, model.alpha);
  const double s = double(samples);
  for (Index li = 0; li < levels; ++li) {
    const double mean_max = sum_max[std::size_t(li)] / s;
    const double var_max =
        std::max(0.0, (sum_max_sq[std::size_t(li)] / s - mean_max * mean_max) * s / (s - 1.0));
    const double err = std::sqrt(mean_max);
    report.stepsizes.push_back(grids[std::size_t(li)].stepsize());
    report.errors.push_back(err);
    report.stderrs.push_back(err > 0.0 ? std::sqrt(var_max / s) / (2.0 * err) : 0.0);
    report.errors_sup_rms.push_back(std::sqrt((sum_sq[std::size_t(li)] / s).maxCoeff()));
  }

  const bool all_zero = std::all_of(report.errors.begin(), report.errors.end(),
                                    [](double e) { return e == 0.0; });
  if (!all_zero) {
    report.fit = fit_rate(report.stepsizes, report.errors);
    if (report.theoretical.log_factor) {
      report.log_fit = fit_rate_log_corrected(report.stepsizes, report.errors);
    }
  }
  // stepsizes run coarse to fine
  for (std::size_t i = 1; i < report.errors.size(); ++i) {
    const double tol = 2.0 * std::hypot(report.stderrs[i], report.stderrs[i - 1]);
    if (report.errors[i] > report.errors[i - 1] + tol) report.non_monotone = true;
  }
  return report;
}

// ---- fast vs Euler ----

AgreementReport fast_agreement_sweep(const ModelSpec& model, const Grid& grid,
                                     const std::vector<double>& tolerances, const NoiseSeed& seed,
                                     const std::filesystem::path& cache_dir) {
  require_valid(model);
  if (tolerances.empty()) throw DomainError("empty tolerance list");
  for (std::size_t i = 1; i < tolerances.size(); ++i) {
    if (!(tolerances[i] < tolerances[i - 1])) throw DomainError("tolerances must be decreasing");
  }
  const GProcessSampler sampler = cached_g_sampler(grid, model, cache_dir);
  const Eigen::VectorXd g = sample_g(sampler, seed);
  const PathSolution slow = euler_solve(model, grid, g);

  AgreementReport report;
  report.n_steps = grid.n_steps();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool any_zero = false;
  for (double eps : tolerances) {
    SoeApproximation soe = grid.n_steps() == 1
                               ? soe_for_grid(model.alpha, grid)
                               : build_soe(model.alpha, eps, grid.stepsize(), grid.horizon());
    soe.tolerance = eps;
    const PathSolution fast = fast_euler_solve(model, grid, soe, g);
    const double gap = (fast.values - slow.values).cwiseAbs().maxCoeff();
    if (!report.rows.empty() && gap > report.rows.back().max_path_gap) report.nonincreasing = false;
    report.rows.push_back({eps, soe.m_exp(), gap});
    if (gap == 0.0) {
      any_zero = true;
    } else {
      lo = std::min(lo, gap / eps);
      hi = std::max(hi, gap / eps);
    }
  }
  if (hi == 0.0) {
    report.ratio_spread = 1.0;
  } else {
    report.ratio_spread = any_zero ? std::numeric_limits<double>::infinity() : hi / lo;
  }
  return report;
}

// ---- MC vs MLMC ----

CompareReport mc_mlmc_compare(const ModelSpec& model, const Payoff& payoff,
                              const std::vector<double>& accuracies, const NoiseSeed& seed,
                              const CompareOptions& options) {
  if (accuracies.empty()) throw DomainError("empty accuracy list");
  const double rho = options.rho.value_or(default_rho(model.hurst));
  CompareReport report;
  report.constants = calibrate_constants(model, payoff, options.refinement, rho, seed,
                                         options.pilot_levels, options.pilot_samples, options.mlmc);

  MlmcOptions ref_options = options.mlmc;
  ref_options.max_fine_steps = std::max(ref_options.max_fine_steps, options.reference_steps);
  const McResult ref = standard_mc_estimate(model, payoff, model.horizon / double(options.reference_steps),
                                            options.reference_samples,
                                            seed.with_role(StreamRole::Reference), ref_options);
  report.reference = ref.estimate;
  report.reference_std_error = ref.std_error.value_or(std::numeric_limits<double>::quiet_NaN());

  std::vector<double> eps_list, costs;
  for (double eps : accuracies) {
    CompareRow row;
    row.accuracy = eps;
    row.plan = plan_levels(model.hurst, eps, options.refinement, rho, report.constants);
    row.levels = row.plan.levels;
    row.mlmc = mlmc_estimate(row.plan, model, payoff, seed, options.mlmc);
    row.mlmc_estimate = row.mlmc.estimate;
    row.mlmc_std_error = row.mlmc.std_error;
    row.mlmc_cost = row.mlmc.total_cost;
    row.mlmc_error = std::abs(row.mlmc.estimate - report.reference);

    // single level at the finest MLMC stepsize; streams on negative levels stay clear of MLMC's
    const double h = row.plan.stepsize(row.plan.levels);
    const NoiseSeed mc_seed = seed.with_level(-1 - row.plan.levels);
    const McResult pilot = standard_mc_estimate(model, payoff, h, options.mc_pilot_samples,
                                                mc_seed.with_role(StreamRole::Pilot), options.mlmc);
    row.mc_samples = std::max<Index>(2, Index(std::ceil(1.5 * pilot.variance / (eps * eps))));
    const McResult mc = standard_mc_estimate(model, payoff, h, row.mc_samples, mc_seed, options.mlmc);
    row.mc_estimate = mc.estimate;
    row.mc_cost = mc.total_cost;
    row.mc_error = std::abs(mc.estimate - report.reference);

    eps_list.push_back(eps);
    costs.push_back(row.mlmc_cost);
    report.rows.push_back(std::move(row));
  }
  if (eps_list.size() >= 3) report.cost_fit = fit_rate(eps_list, costs);
  return report;
}

// ---- Hoelder scans ----

HolderScan g_holder_scan(const ModelSpec& model, const std::vector<double>& deltas) {
  require_valid(model);
  const GCovariance cov(model);
  const double t = model.horizon;
  HolderScan scan;
  scan.expected = model.hurst + model.alpha - 1.0;
  for (double d : deltas) {
    if (!(d > 0.0 && d < t)) throw DomainError("Hoelder scan needs 0 < delta < T");
    const double s = t - d;
    const double var = cov.variance(t) + cov.variance(s) - 2.0 * cov(t, s);
    scan.deltas.push_back(d);
    scan.moduli.push_back(std::sqrt(std::max(var, 0.0)));
  }
  scan.exponent = fit_rate(scan.deltas, scan.moduli).slope;
  return scan;
}

HolderScan drift_holder_scan(const ModelSpec& model, Index n_steps, Index samples,
                             const NoiseSeed& seed, const std::filesystem::path& cache_dir) {
  require_valid(model);
  if (samples < 2) throw DomainError("drift Hoelder scan needs samples >= 2");
  std::vector<Index> offsets;
  for (Index n = 1; n <= n_steps / 16; n *= 2) offsets.push_back(n);
  if (offsets.size() < 3) throw DomainError("drift Hoelder scan needs n_steps >= 64");

  const Grid grid(model.horizon, n_steps);
  const GProcessSampler sampler = cached_g_sampler(grid, model, cache_dir);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(Index(offsets.size()));
  std::vector<NoiseSeed> seeds;
  constexpr Index kBatch = 64;
  for (Index start = 0; start < samples; start += kBatch) {
    const Index nb = std::min(kBatch, samples - start);
    seeds.clear();
    for (Index i = 0; i < nb; ++i) seeds.push_back(seed.with_sample(start + i));
    const Eigen::MatrixXd g = sample_g_batch(sampler, seeds);
    for (Index i = 0; i < nb; ++i) {
      const PathSolution sol = euler_solve(model, grid, g.col(i));
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const Index n = offsets[k];
        const double zeta = sol.values[n] - model.x0 - g(n - 1, i);
        sum_sq[Index(k)] += zeta * zeta;
      }
    }
  }
  HolderScan scan;
  scan.expected = model.alpha;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    scan.deltas.push_back(grid.time(offsets[k]));
    scan.moduli.push_back(std::sqrt(sum_sq[Index(k)] / double(samples)));
  }
  scan.exponent = fit_rate(scan.deltas, scan.moduli).slope;
  return scan;
}

// ---- config ----

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Soe: return "soe";
    case Experiment::Simulate: return "simulate";
    case Experiment::StrongOrder: return "strong-order";
    case Experiment::FastAgreement: return "fast-agreement";
    case Experiment::Mlmc: return "mlmc";
    case Experiment::McCompare: return "mc-compare";
  }
  return "strong-order";
}

Experiment parse_experiment(const std::string& name) {
  static const std::map<std::string, Experiment> table = {
      {"soe", Experiment::Soe},
      {"simulate", Experiment::Simulate},
      {"strong-order", Experiment::StrongOrder},
      {"fast-agreement", Experiment::FastAgreement},
      {"mlmc", Experiment::Mlmc},
      {"mc-compare", Experiment::McCompare}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown experiment '" + name + "'");
  return it->second;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "hurst", "alpha", "sigma", "horizon", "x0", "drift", "payoff", "method",
      "k_min", "k_max", "reference_refinement", "samples", "n_steps", "refinement", "rho",
      "accuracies", "tolerances", "soe_tolerance", "soe_truncation", "allow_off_regime",
      "max_fine_steps", "pilot_samples", "reference_steps", "reference_samples", "master_seed",
      "out_dir", "cache_dir"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown config field '" + item.key() + "'");
  }

  RunConfig c;
  if (j.contains("experiment")) c.experiment = parse_experiment(get_as<std::string>(j, "experiment"));
  read_if(j, "hurst", c.model.hurst);
  read_if(j, "alpha", c.model.alpha);
  read_if(j, "sigma", c.model.sigma);
  read_if(j, "horizon", c.model.horizon);
  read_if(j, "x0", c.model.x0);
  if (j.contains("drift")) c.model.drift = Drift::parse(get_as<std::string>(j, "drift"));
  if (j.contains("payoff")) c.payoff = Payoff::parse(get_as<std::string>(j, "payoff"));
  if (j.contains("method")) c.method = parse_method(get_as<std::string>(j, "method"));
  read_if(j, "k_min", c.k_min);
  read_if(j, "k_max", c.k_max);
  read_if(j, "reference_refinement", c.reference_refinement);
  read_if(j, "samples", c.samples);
  read_if(j, "n_steps", c.n_steps);
  read_if(j, "refinement", c.refinement);
  if (j.contains("rho") && !j.at("rho").is_null()) c.rho = get_as<double>(j, "rho");
  read_if(j, "accuracies", c.accuracies);
  read_if(j, "tolerances", c.tolerances);
  read_if(j, "soe_tolerance", c.soe_tolerance);
  read_if(j, "soe_truncation", c.soe_truncation);
  read_if(j, "allow_off_regime", c.allow_off_regime);
  read_if(j, "max_fine_steps", c.max_fine_steps);
  read_if(j, "pilot_samples", c.pilot_samples);
  read_if(j, "reference_steps", c.reference_steps);
  read_if(j, "reference_samples", c.reference_samples);
  read_if(j, "master_seed", c.master_seed);
  if (j.contains("out_dir")) c.out_dir = get_as<std::string>(j, "out_dir");
  if (j.contains("cache_dir")) c.cache_dir = get_as<std::string>(j, "cache_dir");

  for (auto [name, v] : {std::pair{"samples", c.samples}, {"n_steps", c.n_steps},
                         {"k_min", c.k_min}, {"refinement", c.refinement},
                         {"pilot_samples", c.pilot_samples}, {"reference_steps", c.reference_steps},
                         {"reference_samples", c.reference_samples},
                         {"max_fine_steps", c.max_fine_steps}}) {
    if (v < 1) throw ConfigError(std::string("config field '") + name + "' must be positive");
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"experiment", experiment_name(c.experiment)},
            {"hurst", c.model.hurst},
            {"alpha", c.model.alpha},
            {"sigma", c.model.sigma},
            {"horizon", c.model.horizon},
            {"x0", c.model.x0},
            {"drift", c.model.drift.name()},
            {"payoff", c.payoff.name()},
            {"method", method_name(c.method)},
            {"k_min", c.k_min},
            {"k_max", c.k_max},
            {"reference_refinement", c.reference_refinement},
            {"samples", c.samples},
            {"n_steps", c.n_steps},
            {"refinement", c.refinement},
            {"rho", nullptr},
            {"accuracies", c.accuracies},
            {"tolerances", c.tolerances},
            {"soe_tolerance", c.soe_tolerance},
            {"soe_truncation", c.soe_truncation},
            {"allow_off_regime", c.allow_off_regime},
            {"max_fine_steps", c.max_fine_steps},
            {"pilot_samples", c.pilot_samples},
            {"reference_steps", c.reference_steps},
            {"reference_samples", c.reference_samples},
            {"master_seed", c.master_seed},
            {"out_dir", c.out_dir.string()},
            {"cache_dir", c.cache_dir.string()}};
  if (c.rho) j["rho"] = *c.rho;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---- artifacts ----

std::string format_number(double x) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << std::setprecision(17) << x;
  return ss.str();
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

void write_errors_csv(const std::filesystem::path& path, const StrongOrderReport& report) {
  std::ostringstream ss;
  ss << "h,error,stderr\n";
  for (std::size_t i = 0; i < report.stepsizes.size(); ++i) {
    ss << format_number(report.stepsizes[i]) << ',' << format_number(report.errors[i]) << ','
       << format_number(report.stderrs[i]) << '\n';
  }
  write_text(path, ss.str());
}

void write_mlmc_csv(const std::filesystem::path& path, const MlmcResult& result) {
  std::ostringstream ss;
  ss << "level,h,samples,mean_correction,var_correction,cost_units\n";
  for (const auto& s : result.per_level) {
    ss << s.level << ',' << format_number(s.stepsize) << ',' << s.samples << ','
       << format_number(s.mean_correction) << ',' << format_number(s.variance_correction) << ','
       << format_number(s.cost_units) << '\n';
  }
  write_text(path, ss.str());
}

void write_path_csv(const std::filesystem::path& path, const PathSolution& solution) {
  std::ostringstream ss;
  ss << "n,t,x\n";
  for (Index n = 0; n < solution.values.size(); ++n) {
    ss << n << ',' << format_number(solution.grid.time(n)) << ','
       << format_number(solution.values[n]) << '\n';
  }
  write_text(path, ss.str());
}

json soe_to_json(const SoeApproximation& soe) {
  return {{"alpha", soe.alpha},
          {"tolerance", soe.tolerance},
          {"truncation", soe.truncation},
          {"horizon", soe.horizon},
          {"nodes", std::vector<double>(soe.nodes.data(), soe.nodes.data() + soe.nodes.size())},
          {"weights", std::vector<double>(soe.weights.data(), soe.weights.data() + soe.weights.size())}};
}

json run_experiment(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path dir = ensure_dir(config.out_dir);
  const NoiseSeed seed{config.master_seed, 0, 0, StreamRole::Primary};
  std::vector<std::string> artifacts;
  json timings = json::object();

  json report = {{"experiment", experiment_name(config.experiment)}};
  switch (config.experiment) {
    case Experiment::Soe: {
      const SoeApproximation soe = build_soe(config.model.alpha, config.soe_tolerance,
                                             config.soe_truncation, config.model.horizon);
      const CertificationReport cert = certify_soe(soe);
      write_text(dir / "soe.json", soe_to_json(soe).dump(2) + "\n");
      artifacts.push_back("soe.json");
      report["alpha"] = soe.alpha;
      report["tolerance"] = soe.tolerance;
      report["truncation"] = soe.truncation;
      report["horizon"] = soe.horizon;
      report["m_exp"] = soe.m_exp();
      report["max_error"] = cert.max_error;
      report["argmax"] = cert.argmax;
      report["certified"] = cert.max_error <= soe.tolerance;
      break;
    }
    case Experiment::Simulate: {
      require_valid(config.model);
      const Grid grid(config.model.horizon, config.n_steps);
      const GProcessSampler sampler = cached_g_sampler(grid, config.model, config.cache_dir);
      const Eigen::VectorXd g = sample_g(sampler, seed);
      PathSolution sol;
      if (config.method == Method::Euler) {
        sol = euler_solve(config.model, grid, g);
      } else {
        const SoeApproximation soe = soe_for_grid(config.model.alpha, grid);
        sol = fast_euler_solve(config.model, grid, soe, g);
        report["m_exp"] = soe.m_exp();
        report["tolerance"] = soe.tolerance;
      }
      write_path_csv(dir / "path.csv", sol);
      artifacts.push_back("path.csv");
      report["model"] = model_json(config.model);
      report["method"] = method_name(config.method);
      report["n_steps"] = grid.n_steps();
      report["stepsize"] = grid.stepsize();
      report["endpoint"] = sol.endpoint();
      break;
    }
    case Experiment::StrongOrder: {
      StrongOrderOptions options;
      options.method = config.method;
      options.reference_refinement = config.reference_refinement;
      options.cache_dir = config.cache_dir;
      const StrongOrderReport r =
          strong_order_study(config.model, config.k_min, config.k_max, config.samples, seed, options);
      write_errors_csv(dir / "errors.csv", r);
      artifacts.push_back("errors.csv");
      report["model"] = model_json(r.model);
      report["method"] = method_name(r.method);
      report["theoretical"] = r.theoretical.exponent;
      report["theoretical_log_factor"] = r.theoretical.log_factor;
      report["fitted_slope"] = r.fit ? json(r.fit->slope) : json(nullptr);
      report["slope_stderr"] = r.fit ? json(r.fit->std_error) : json(nullptr);
      report["fit"] = fit_json(r.fit);
      report["log_corrected_fit"] = fit_json(r.log_fit);
      report["stepsizes"] = r.stepsizes;
      report["errors"] = r.errors;
      report["stderrs"] = r.stderrs;
      report["errors_sup_rms"] = r.errors_sup_rms;
      report["samples"] = r.samples;
      report["reference_stepsize"] = r.reference_stepsize;
      report["non_monotone"] = r.non_monotone;
      break;
    }
    case Experiment::FastAgreement: {
      const Grid grid(config.model.horizon, config.n_steps);
      const AgreementReport r =
          fast_agreement_sweep(config.model, grid, config.tolerances, seed, config.cache_dir);
      std::ostringstream csv;
      csv << "tolerance,m_exp,max_path_gap\n";
      json rows = json::array();
      for (const auto& row : r.rows) {
        csv << format_number(row.tolerance) << ',' << row.m_exp << ','
            << format_number(row.max_path_gap) << '\n';
        rows.push_back({{"tolerance", row.tolerance}, {"m_exp", row.m_exp}, {"max_path_gap", row.max_path_gap}});
      }
      write_text(dir / "agreement.csv", csv.str());
      artifacts.push_back("agreement.csv");
      report["model"] = model_json(config.model);
      report["n_steps"] = r.n_steps;
      report["rows"] = rows;
      report["nonincreasing"] = r.nonincreasing;
      report["ratio_spread"] = std::isfinite(r.ratio_spread) ? json(r.ratio_spread) : json(nullptr);
      break;
    }
    case Experiment::Mlmc: {
      if (config.accuracies.empty()) throw ConfigError("mlmc needs one accuracy");
      MlmcOptions options;
      options.allow_off_regime = config.allow_off_regime;
      options.max_fine_steps = config.max_fine_steps;
      options.cache_dir = config.cache_dir;
      const double rho = config.rho.value_or(default_rho(config.model.hurst));
      const MlmcConstants constants =
          calibrate_constants(config.model, config.payoff, config.refinement, rho, seed, 5,
                              config.pilot_samples, options);
      const MlmcPlan plan =
          plan_levels(config.model.hurst, config.accuracies.front(), config.refinement, rho, constants);
      const MlmcResult r = mlmc_estimate(plan, config.model, config.payoff, seed, options);
      write_mlmc_csv(dir / "mlmc.csv", r);
      artifacts.push_back("mlmc.csv");
      timings["mlmc_seconds"] = r.wall_seconds;
      report["model"] = model_json(config.model);
      report["payoff"] = config.payoff.name();
      report["estimate"] = r.estimate;
      report["std_error"] = r.std_error;
      report["accuracy_target"] = plan.accuracy;
      report["total_cost"] = r.total_cost;
      report["plan"] = plan_json(plan);
      report["levels"] = levels_json(r);
      report["variance_decay"] = fit_json(variance_decay(r));
      break;
    }
    case Experiment::McCompare: {
      CompareOptions options;
      options.refinement = config.refinement;
      options.rho = config.rho;
      options.pilot_samples = config.pilot_samples;
      options.reference_steps = config.reference_steps;
      options.reference_samples = config.reference_samples;
      options.mlmc.allow_off_regime = config.allow_off_regime;
      options.mlmc.max_fine_steps = config.max_fine_steps;
      options.mlmc.cache_dir = config.cache_dir;
      const CompareReport r =
          mc_mlmc_compare(config.model, config.payoff, config.accuracies, seed, options);
      std::ostringstream csv;
      csv << "accuracy,levels,mlmc_cost,mc_cost,mlmc_error,mc_error\n";
      json rows = json::array();
      for (const auto& row : r.rows) {
        csv << format_number(row.accuracy) << ',' << row.levels << ',' << format_number(row.mlmc_cost)
            << ',' << format_number(row.mc_cost) << ',' << format_number(row.mlmc_error) << ','
            << format_number(row.mc_error) << '\n';
        rows.push_back({{"accuracy", row.accuracy},
                        {"levels", row.levels},
                        {"mlmc_estimate", row.mlmc_estimate},
                        {"mlmc_std_error", row.mlmc_std_error},
                        {"mlmc_cost", row.mlmc_cost},
                        {"mlmc_error", row.mlmc_error},
                        {"mc_estimate", row.mc_estimate},
                        {"mc_samples", row.mc_samples},
                        {"mc_cost", row.mc_cost},
                        {"mc_error", row.mc_error},
                        {"plan", plan_json(row.plan)},
                        {"per_level", levels_json(row.mlmc)},
                        {"variance_decay", fit_json(variance_decay(row.mlmc))}});
      }
      write_text(dir / "compare.csv", csv.str());
      artifacts.push_back("compare.csv");
      report["model"] = model_json(config.model);
      report["payoff"] = config.payoff.name();
      report["reference"] = r.reference;
      report["reference_std_error"] = r.reference_std_error;
      report["constants"] = {{"c1", r.constants.c1}, {"c2", r.constants.c2}, {"c3", r.constants.c3}};
      report["rows"] = rows;
      report["cost_fit"] = fit_json(r.cost_fit);
      break;
    }
  }

  write_text(dir / "report.json", report.dump(2) + "\n");
  artifacts.push_back("report.json");

  std::sort(artifacts.begin(), artifacts.end());
  std::string all;
  json files = json::object();
  for (const auto& name : artifacts) {
    const std::string bytes = read_text(dir / name);
    files[name] = content_hash(bytes);
    all += name;
    all.push_back('\0');
    all += bytes;
  }
  timings["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const json manifest = {{"tool", "fgle"},
                         {"version", FGLE_VERSION},
                         {"config", config_to_json(config)},
                         {"master_seed", config.master_seed},
                         {"content_hash", content_hash(all)},
                         {"artifacts", files},
                         {"timestamp", iso_timestamp()},
                         {"wall_seconds", timings}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

}  // namespace fgle
