#include "fgle/cli.hpp"

#include "fgle/errors.hpp"
#include "fgle/harness.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

namespace fgle {

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<double> hurst, alpha, sigma, horizon, x0, rho, eps, kappa;
  std::optional<std::string> drift, payoff, method, out_dir, cache_dir;
  std::optional<long long> k_min, k_max, reference_refinement, samples, n_steps, refinement;
  std::optional<long long> pilot_samples, reference_steps, reference_samples, max_fine_steps;
  std::optional<std::uint64_t> seed;
  std::vector<double> accuracies, tolerances;
  bool allow_off_regime = false;
};

void add_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON run configuration");
  app->add_option("--hurst", o.hurst);
  app->add_option("--alpha", o.alpha);
  app->add_option("--sigma", o.sigma);
  app->add_option("--horizon", o.horizon);
  app->add_option("--x0", o.x0);
  app->add_option("--drift", o.drift, "zero | cosine | bounded_well | linear(lambda)");
  app->add_option("--payoff", o.payoff, "identity | cosine | clipped(K)");
  app->add_option("--method", o.method, "euler | fast_euler");
  app->add_option("--k-min", o.k_min);
  app->add_option("--k-max", o.k_max);
  app->add_option("--reference-refinement", o.reference_refinement);
  app->add_option("--samples", o.samples);
  app->add_option("--n-steps", o.n_steps);
  app->add_option("--refinement", o.refinement);
  app->add_option("--rho", o.rho);
  app->add_option("--accuracies", o.accuracies);
  app->add_option("--tolerances", o.tolerances);
  app->add_option("--eps", o.eps, "SOE tolerance");
  app->add_option("--kappa", o.kappa, "SOE truncation");
  app->add_option("--pilot-samples", o.pilot_samples);
  app->add_option("--reference-steps", o.reference_steps);
  app->add_option("--reference-samples", o.reference_samples);
  app->add_option("--max-fine-steps", o.max_fine_steps);
  app->add_flag("--allow-off-regime", o.allow_off_regime);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("-o,--out-dir", o.out_dir);
  app->add_option("--cache-dir", o.cache_dir, "covariance factor cache");
}

RunConfig resolve(Experiment experiment, const Overrides& o) {
  RunConfig c = o.config ? load_config(*o.config) : RunConfig{};
  c.experiment = experiment;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) c.out_dir = env;

  if (o.hurst) c.model.hurst = *o.hurst;
  if (o.alpha) c.model.alpha = *o.alpha;
  if (o.sigma) c.model.sigma = *o.sigma;
  if (o.horizon) c.model.horizon = *o.horizon;
  if (o.x0) c.model.x0 = *o.x0;
  if (o.drift) c.model.drift = Drift::parse(*o.drift);
  if (o.payoff) c.payoff = Payoff::parse(*o.payoff);
  if (o.method) {
    nlohmann::json j = {{"method", *o.method}};
    c.method = config_from_json(j).method;
  }
  if (o.k_min) c.k_min = *o.k_min;
  if (o.k_max) c.k_max = *o.k_max;
  if (o.reference_refinement) c.reference_refinement = *o.reference_refinement;
  if (o.samples) c.samples = *o.samples;
  if (o.n_steps) c.n_steps = *o.n_steps;
  if (o.refinement) c.refinement = *o.refinement;
  if (o.rho) c.rho = *o.rho;
  if (!o.accuracies.empty()) c.accuracies = o.accuracies;
  if (!o.tolerances.empty()) c.tolerances = o.tolerances;
  if (o.eps) c.soe_tolerance = *o.eps;
  if (o.kappa) c.soe_truncation = *o.kappa;
  if (o.pilot_samples) c.pilot_samples = *o.pilot_samples;
  if (o.reference_steps) c.reference_steps = *o.reference_steps;
  if (o.reference_samples) c.reference_samples = *o.reference_samples;
  if (o.max_fine_steps) c.max_fine_steps = *o.max_fine_steps;
  if (o.allow_off_regime) c.allow_off_regime = true;
  if (o.seed) c.master_seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.cache_dir) c.cache_dir = *o.cache_dir;

  // round-trip through the JSON reader for its range checks
  return config_from_json(config_to_json(c));
}

std::string describe(Experiment e) {
  switch (e) {
    case Experiment::Soe: return "build and certify a sum-of-exponentials kernel approximation";
    case Experiment::Simulate: return "solve one path and write path.csv";
    case Experiment::StrongOrder: return "empirical strong convergence order against a fine reference";
    case Experiment::FastAgreement: return "fast vs direct Euler gap over a tolerance sweep";
    case Experiment::Mlmc: return "multilevel Monte Carlo estimate of E f(x(T))";
    case Experiment::McCompare: return "MLMC against single-level MC at equal accuracy";
  }
  return "";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solvers and experiments for power-law memory Langevin equations driven by fBm",
               "fgle"};
  app.require_subcommand(1);
  Overrides overrides;
  std::vector<std::pair<CLI::App*, Experiment>> subs;
  for (Experiment e : {Experiment::Soe, Experiment::Simulate, Experiment::StrongOrder,
                       Experiment::FastAgreement, Experiment::Mlmc, Experiment::McCompare}) {
    CLI::App* sub = app.add_subcommand(experiment_name(e), describe(e));
    add_options(sub, overrides);
    subs.emplace_back(sub, e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  Experiment experiment = Experiment::StrongOrder;
  for (const auto& [sub, e] : subs) {
    if (sub->parsed()) experiment = e;
  }

  try {
    const RunConfig config = resolve(experiment, overrides);
    const nlohmann::json report = run_experiment(config);
    out << report.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    const bool validation = e.category() == ErrorCategory::Validation;
    err << "error: " << (validation ? "validation" : "numerical") << ": " << e.what() << "\n";
    return validation ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: numerical: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fgle
