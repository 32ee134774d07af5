#pragma once

// Experiments on top of the solvers: empirical strong orders, fast/slow
// agreement, MLMC against plain MC, Hoelder scans, plus config and output files.

#include "fgle/mlmc.hpp"
#include "fgle/model.hpp"
#include "fgle/rng.hpp"
#include "fgle/soe.hpp"
#include "fgle/solver.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fgle {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;  // of the slope
};

// OLS of ln(error) on ln(h). Needs >= 3 positive points; zero errors throw DegenerateFit.
RateFit fit_rate(const std::vector<double>& stepsizes, const std::vector<double>& errors);

// OLS of ln(error / |ln h|) on ln(h), for rates carrying a |ln h| factor. Needs h < 1.
RateFit fit_rate_log_corrected(const std::vector<double>& stepsizes,
                               const std::vector<double>& errors);

struct StrongOrderReport {
  ModelSpec model;
  Method method = Method::Euler;
  std::vector<double> stepsizes;
  std::vector<double> errors;          // sqrt(E max_n |x_n - x_ref(t_n)|^2), fitted
  std::vector<double> stderrs;         // delta-method stderr of errors
  std::vector<double> errors_sup_rms;  // max_n sqrt(E|x_n - x_ref(t_n)|^2)
  std::optional<RateFit> fit;          // absent when all errors vanish
  std::optional<RateFit> log_fit;      // alpha = 2-2H only
  RateSpec theoretical;
  Index samples = 0;
  double reference_stepsize = 0.0;
  bool non_monotone = false;  // some error exceeds its coarser neighbour by > 2 stderr
};

struct StrongOrderOptions {
  Method method = Method::Euler;
  Index reference_refinement = 3;
  Index batch = 64;
  std::filesystem::path cache_dir;
};

// Grids h_k = T 2^-k, k in [k_min, k_max], against Euler on T 2^-(k_max + ref)
// with common G samples (coarse paths read the reference G by stride).
StrongOrderReport strong_order_study(const ModelSpec& model, Index k_min, Index k_max,
                                     Index samples, const NoiseSeed& seed,
                                     const StrongOrderOptions& options = {});

struct AgreementRow {
  double tolerance = 0.0;
  Index m_exp = 0;
  double max_path_gap = 0.0;
};

struct AgreementReport {
  Index n_steps = 0;
  std::vector<AgreementRow> rows;
  bool nonincreasing = true;
  double ratio_spread = 1.0;  // max(gap/eps) / min(gap/eps); 1 when all gaps vanish
};

// One G path on `grid`; fast vs Euler for each SOE tolerance (kappa = h).
AgreementReport fast_agreement_sweep(const ModelSpec& model, const Grid& grid,
                                     const std::vector<double>& tolerances, const NoiseSeed& seed,
                                     const std::filesystem::path& cache_dir = {});

struct CompareRow {
  double accuracy = 0.0;
  Index levels = 0;
  double mlmc_estimate = 0.0;
  double mlmc_std_error = 0.0;
  double mlmc_cost = 0.0;
  double mlmc_error = 0.0;
  double mc_estimate = 0.0;
  Index mc_samples = 0;
  double mc_cost = 0.0;
  double mc_error = 0.0;
  MlmcPlan plan;
  MlmcResult mlmc;
};

struct CompareOptions {
  Index refinement = 2;
  std::optional<double> rho;  // default_rho(H)
  Index pilot_levels = 5;
  Index pilot_samples = 30;
  Index mc_pilot_samples = 200;
  Index reference_steps = 2048;
  Index reference_samples = 100000;
  MlmcOptions mlmc;
};

struct CompareReport {
  MlmcConstants constants;
  double reference = 0.0;
  double reference_std_error = 0.0;
  std::vector<CompareRow> rows;
  std::optional<RateFit> cost_fit;  // ln(mlmc_cost) on ln(eps), >= 3 rows
};

// MLMC and single-level MC at the finest MLMC stepsize with
// N = ceil(1.5 Var/eps^2) samples, both judged against a brute-force reference.
CompareReport mc_mlmc_compare(const ModelSpec& model, const Payoff& payoff,
                              const std::vector<double>& accuracies, const NoiseSeed& seed,
                              const CompareOptions& options = {});

struct HolderScan {
  std::vector<double> deltas;
  std::vector<double> moduli;  // sqrt(E|Z(t) - Z(t - delta)|^2)
  double exponent = 0.0;       // fitted
  double expected = 0.0;
};

// L2 modulus of G at t = T from the covariance; expected exponent H + alpha - 1.
HolderScan g_holder_scan(const ModelSpec& model, const std::vector<double>& deltas);

// L2 modulus of the drift term zeta(delta) - zeta(0), zeta = x - x0 - G, from Euler
// paths on `n_steps`; expected exponent alpha (needs b(x0) != 0).
HolderScan drift_holder_scan(const ModelSpec& model, Index n_steps, Index samples,
                             const NoiseSeed& seed, const std::filesystem::path& cache_dir = {});

// ---- config and artifacts ----

enum class Experiment { Soe, Simulate, StrongOrder, FastAgreement, Mlmc, McCompare };

std::string experiment_name(Experiment e);
Experiment parse_experiment(const std::string& name);

struct RunConfig {
  Experiment experiment = Experiment::StrongOrder;
  ModelSpec model;
  Payoff payoff;
  Method method = Method::Euler;
  Index k_min = 4;
  Index k_max = 9;
  Index reference_refinement = 3;
  Index samples = 1000;
  Index n_steps = 1024;
  Index refinement = 2;
  std::optional<double> rho;
  std::vector<double> accuracies{0.1, 0.05};
  std::vector<double> tolerances{1e-2, 1e-3, 1e-4};
  double soe_tolerance = 1e-6;
  double soe_truncation = 1e-3;
  bool allow_off_regime = false;
  Index max_fine_steps = 4096;
  Index pilot_samples = 30;
  Index reference_steps = 2048;
  Index reference_samples = 100000;
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "out";
  std::filesystem::path cache_dir;
};

// Unknown keys and wrong types raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// Runs the experiment and writes its artifacts plus manifest.json into config.out_dir.
// Returns the report that was written to report.json.
nlohmann::json run_experiment(const RunConfig& config);

void write_errors_csv(const std::filesystem::path& path, const StrongOrderReport& report);
void write_mlmc_csv(const std::filesystem::path& path, const MlmcResult& result);
void write_path_csv(const std::filesystem::path& path, const PathSolution& solution);
nlohmann::json soe_to_json(const SoeApproximation& soe);

// 64-bit FNV-1a, as 16 hex digits.
std::string content_hash(const std::string& bytes);

// 17 significant digits.
std::string format_number(double x);

}  // namespace fgle
