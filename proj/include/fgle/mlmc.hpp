#pragma once

// Multilevel Monte Carlo for E[f(x(T))], T = 1, on the nested grids h_l = M^-l,
// each level pair solved by the fast Euler method on a shared G sample.

#include "fgle/model.hpp"
#include "fgle/rng.hpp"
#include "fgle/solver.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fgle {

enum class PayoffKind { Identity, Clipped, Cosine };

// Closed registry of Lipschitz payoffs.
struct Payoff {
  PayoffKind kind = PayoffKind::Identity;
  double clip = 1.0;  // K for Clipped

  static Payoff identity() { return {}; }
  static Payoff clipped(double k) { return {PayoffKind::Clipped, k}; }
  static Payoff cosine() { return {PayoffKind::Cosine, 1.0}; }
  // "identity", "cosine", "clipped" (K = 1) or "clipped(K)".
  static Payoff parse(const std::string& text);

  std::string name() const;
  double lipschitz() const { return 1.0; }
  double operator()(double x) const;
};

struct MlmcConstants {
  double c1 = 1.0;  // bias:           |E[P_L] - E f(x)|^2 <= C1 h_L^(4-4H-2 rho)
  double c2 = 1.0;  // level 0:        Var P_0 <= C2
  double c3 = 1.0;  // corrections:    Var(P_l - P_{l-1}) <= C3 h_l^(4-4H) |ln h_l|^2
};

struct MlmcPlan {
  double hurst = 0.75;
  Index refinement = 2;
  double accuracy = 0.1;
  double rho = 0.1;
  MlmcConstants constants;
  Index levels = 0;            // L
  std::vector<Index> samples;  // N_0 .. N_L

  double stepsize(Index level) const { return std::pow(double(refinement), -double(level)); }
  Index steps(Index level) const;
};

struct LevelStats {
  Index level = 0;
  double stepsize = 1.0;
  Index samples = 0;
  double mean_correction = 0.0;
  double variance_correction = 0.0;
  double cost_units = 0.0;  // all samples of the level, fine + coarse
  Index m_exp_fine = 0;
};

struct MlmcResult {
  double estimate = 0.0;
  double std_error = 0.0;  // sqrt(sum_l var_l / N_l)
  double total_cost = 0.0;
  double wall_seconds = 0.0;
  std::vector<LevelStats> per_level;
};

struct McResult {
  double estimate = 0.0;
  std::optional<double> std_error;  // undefined for a single sample
  double variance = 0.0;
  double total_cost = 0.0;
  Index samples = 0;
  double stepsize = 0.0;
};

struct MlmcOptions {
  bool allow_off_regime = false;  // permit alpha != 2 - 2H
  Index max_fine_steps = 4096;    // PlanInfeasible above this
  Index batch = 128;              // G samples drawn per matrix product; fixed for reproducibility
  std::filesystem::path cache_dir;
};

// min(0.1, (1-H)/2).
double default_rho(double hurst);

// L, N_0 and N_l from the three ceiling formulas. L is clamped below at 0.
MlmcPlan plan_levels(double hurst, double accuracy, Index refinement, double rho,
                     const MlmcConstants& constants);

// Pilot of `pilot_samples` per level on levels 0..pilot_levels:
//   C1 = max_l E[(P_l - P_{l-1})^2] / h_l^(4-4H-2 rho),
//   C2 = E[P_0^2],
//   C3 = max_l Var(P_l - P_{l-1}) / (h_l^(4-4H) ln^2 h_l).
// Non-positive or non-finite estimates fall back to 1.
MlmcConstants calibrate_constants(const ModelSpec& model, const Payoff& payoff, Index refinement,
                                  double rho, const NoiseSeed& seed, Index pilot_levels = 5,
                                  Index pilot_samples = 30, const MlmcOptions& options = {});

MlmcResult mlmc_estimate(const MlmcPlan& plan, const ModelSpec& model, const Payoff& payoff,
                         const NoiseSeed& seed, const MlmcOptions& options = {});

// Plain MC of f(y_N) with the fast Euler method at `stepsize` (T/stepsize must be integral).
McResult standard_mc_estimate(const ModelSpec& model, const Payoff& payoff, double stepsize,
                              Index samples, const NoiseSeed& seed, const MlmcOptions& options = {});

// P_l - P_{l-1} (or P_0 for level 0) for samples first .. first+count-1 of `level`.
Eigen::VectorXd level_corrections(const ModelSpec& model, const Payoff& payoff, Index refinement,
                                  Index level, Index first, Index count, const NoiseSeed& seed,
                                  const MlmcOptions& options = {});

// Euler: N^2; FastEuler: N * m_exp.
double cost_units(Method method, Index n_steps, Index m_exp);

// sum_{l=1..L} |ln h_l|^beta h_l^gamma with h_l = M^-l.
double level_sum(double beta, double gamma, Index refinement, Index levels);

// Right-hand side shape of the level-sum bound at L:
// 1 (gamma > 0), |ln h_L|^beta L (gamma = 0), |ln h_L|^beta h_L^gamma (gamma < 0).
double level_sum_shape(double beta, double gamma, Index refinement, Index levels);

// Constant of the bound from the summation argument:
// sum_{l>=1} (l ln M)^beta M^(-gamma l) (gamma > 0), 1 (gamma = 0), 1/(1 - M^gamma) (gamma < 0).
double level_sum_constant(double beta, double gamma, Index refinement);

// Fitted constants C_L = level_sum / shape over L in [l_min, l_max].
struct LevelSumCheck {
  std::vector<Index> levels;
  std::vector<double> ratios;
  double bound_constant = 0.0;
  double max_step_variation = 0.0;  // max_L |C_{L+1} - C_L| / C_{L+1}
  bool bounded = false;             // all C_L <= bound_constant
};
LevelSumCheck check_level_sum(double beta, double gamma, Index refinement, Index l_min,
                              Index l_max);

// Pairwise summation; the result depends only on the order of `values`.
double pairwise_sum(std::span<const double> values);

}  // namespace fgle
