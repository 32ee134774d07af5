#include "fgle/mlmc.hpp"

#include "fgle/errors.hpp"
#include "fgle/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace fgle {

namespace {

// guards ceil() against products like 3 / 0.1^2 = 300.00000000000006
double safe_ceil(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-13 * std::max(1.0, std::abs(x)) ? r : std::ceil(x);
}

Index int_pow(Index base, Index exponent, Index cap) {
  Index v = 1;
  for (Index i = 0; i < exponent; ++i) {
    if (v > cap / base) return cap + 1;
    v *= base;
  }
  return v;
}

double mean_of(const Eigen::VectorXd& v) {
  return pairwise_sum(std::span<const double>(v.data(), std::size_t(v.size()))) / double(v.size());
}

double variance_of(const Eigen::VectorXd& v, double mean) {
  if (v.size() < 2) return 0.0;
  const Eigen::VectorXd sq = (v.array() - mean).square().matrix();
  return pairwise_sum(std::span<const double>(sq.data(), std::size_t(sq.size()))) /
         double(v.size() - 1);
}

// Everything a level needs to turn seeds into P_l - P_{l-1}.
class LevelSolver {
 public:
  LevelSolver(const ModelSpec& model, Index refinement, Index level, const MlmcOptions& options)
      : model_(model),
        level_(level),
        batch_(std::max<Index>(options.batch, 1)),
        fine_(model.horizon, steps_checked(refinement, level, options.max_fine_steps)),
        coarse_(model.horizon, level > 0 ? fine_.n_steps() / refinement : 1),
        sampler_(cached_g_sampler(fine_, model, options.cache_dir)),
        soe_fine_(soe_for_grid(model.alpha, fine_)),
        soe_coarse_(level > 0 ? soe_for_grid(model.alpha, coarse_) : SoeApproximation{}),
        stride_(refinement) {}

  Eigen::VectorXd corrections(const Payoff& payoff, Index first, Index count,
                              const NoiseSeed& seed) const {
    Eigen::VectorXd out(count);
    std::vector<NoiseSeed> seeds;
    for (Index start = 0; start < count; start += batch_) {
      const Index n = std::min(batch_, count - start);
      seeds.clear();
      for (Index i = 0; i < n; ++i) seeds.push_back(seed.with_sample(first + start + i));
      const Eigen::MatrixXd g = sample_g_batch(sampler_, seeds);
      for (Index i = 0; i < n; ++i) {
        const PathSolution fine = fast_euler_solve(model_, fine_, soe_fine_, g.col(i));
        double value = payoff(fine.endpoint());
        if (level_ > 0) {
          const Eigen::VectorXd cg = restrict_path(g.col(i), stride_);
          value -= payoff(fast_euler_solve(model_, coarse_, soe_coarse_, cg).endpoint());
        }
        out[start + i] = value;
      }
    }
    return out;
  }

  double cost_per_sample() const {
    double c = cost_units(Method::FastEuler, fine_.n_steps(), std::max<Index>(soe_fine_.m_exp(), 1));
    if (level_ > 0) {
      c += cost_units(Method::FastEuler, coarse_.n_steps(), std::max<Index>(soe_coarse_.m_exp(), 1));
    }
    return c;
  }

  Index m_exp_fine() const { return soe_fine_.m_exp(); }

  static Index steps_checked(Index refinement, Index level, Index cap) {
    const Index n = int_pow(refinement, level, cap);
    if (n > cap) {
      throw PlanInfeasible("level " + std::to_string(level) + " needs more than " +
                           std::to_string(cap) + " steps");
    }
    return n;
  }

 private:
  ModelSpec model_;
  Index level_;
  Index batch_;
  Grid fine_;
  Grid coarse_;
  GProcessSampler sampler_;
  SoeApproximation soe_fine_;
  SoeApproximation soe_coarse_;
  Index stride_;
};

void require_mlmc_regime(const ModelSpec& model, const MlmcOptions& options) {
  require_valid(model);
  if (std::abs(model.horizon - 1.0) > 1e-12) throw DomainError("MLMC runs require horizon 1");
  if (!options.allow_off_regime && std::abs(model.alpha - (2.0 - 2.0 * model.hurst)) > 1e-12) {
    throw DomainError("MLMC requires alpha = 2 - 2H (set allow_off_regime to override)");
  }
}

double positive_or_one(double v) { return std::isfinite(v) && v > 0.0 ? v : 1.0; }

}  // namespace

Payoff Payoff::parse(const std::string& text) {
  if (text == "identity") return identity();
  if (text == "cosine") return cosine();
  if (text == "clipped") return clipped(1.0);
  if (text.rfind("clipped(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(8, text.size() - 9);
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != inner.size() || !(k > 0.0)) throw ConfigError("bad clip level in payoff '" + text + "'");
    return clipped(k);
  }
  throw ConfigError("unknown payoff '" + text + "'");
}

std::string Payoff::name() const {
  switch (kind) {
    case PayoffKind::Identity: return "identity";
    case PayoffKind::Cosine: return "cosine";
    case PayoffKind::Clipped: {
      std::ostringstream k;
      k << std::setprecision(17) << clip;
      return "clipped(" + k.str() + ")";
    }
  }
  return "identity";
}

double Payoff::operator()(double x) const {
  switch (kind) {
    case PayoffKind::Identity: return x;
    case PayoffKind::Clipped: return std::max(std::min(x, clip), -clip);
    case PayoffKind::Cosine: return std::cos(x);
  }
  return x;
}

Index MlmcPlan::steps(Index level) const {
  return int_pow(refinement, level, std::numeric_limits<Index>::max() / 2);
}

double default_rho(double hurst) { return std::min(0.1, 0.5 * (1.0 - hurst)); }

MlmcPlan plan_levels(double hurst, double accuracy, Index refinement, double rho,
                     const MlmcConstants& constants) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("hurst not in (1/2,1)");
  if (!(accuracy > 0.0 && accuracy < 1.0)) throw DomainError("accuracy not in (0,1)");
  if (refinement < 2) throw DomainError("refinement must be >= 2");
  if (!(rho > 0.0 && rho < 1.0 - hurst)) throw DomainError("rho not in (0, 1-H)");
  if (!(constants.c1 > 0.0 && constants.c2 > 0.0 && constants.c3 > 0.0)) {
    throw DomainError("MLMC constants must be positive");
  }

  MlmcPlan plan;
  plan.hurst = hurst;
  plan.refinement = refinement;
  plan.accuracy = accuracy;
  plan.rho = rho;
  plan.constants = constants;

  const double inv_eps2 = 1.0 / (accuracy * accuracy);
  const double log_m = std::log(double(refinement));
  const double levels =
      std::log(3.0 * constants.c1 * inv_eps2) / log_m / (4.0 - 4.0 * hurst - 2.0 * rho);
  plan.levels = std::max<Index>(0, Index(safe_ceil(levels)));

  plan.samples.assign(std::size_t(plan.levels + 1), 1);
  plan.samples[0] = std::max<Index>(1, Index(safe_ceil(3.0 * constants.c2 * inv_eps2)));

  double tail = 0.0;
  for (Index l = 1; l <= plan.levels; ++l) tail += std::pow(plan.stepsize(l), 0.5 * (3.0 - 4.0 * hurst));
  for (Index l = 1; l <= plan.levels; ++l) {
    const double h = plan.stepsize(l);
    const double lg = std::log(h);
    const double n = 3.0 * constants.c3 * inv_eps2 * std::pow(h, 0.5 * (5.0 - 4.0 * hurst)) * lg * lg * tail;
    plan.samples[std::size_t(l)] = std::max<Index>(1, Index(safe_ceil(n)));
  }
  return plan;
}

Eigen::VectorXd level_corrections(const ModelSpec& model, const Payoff& payoff, Index refinement,
                                  Index level, Index first, Index count, const NoiseSeed& seed,
                                  const MlmcOptions& options) {
  if (refinement < 2) throw DomainError("refinement must be >= 2");
  if (level < 0 || count < 0 || first < 0) throw DomainError("negative level or sample range");
  const LevelSolver solver(model, refinement, level, options);
  return solver.corrections(payoff, first, count, seed.with_level(level));
}

MlmcConstants calibrate_constants(const ModelSpec& model, const Payoff& payoff, Index refinement,
                                  double rho, const NoiseSeed& seed, Index pilot_levels,
                                  Index pilot_samples, const MlmcOptions& options) {
  require_mlmc_regime(model, options);
  if (pilot_samples < 2) throw DomainError("pilot needs at least two samples per level");
  if (pilot_levels < 1) throw DomainError("pilot needs at least one correction level");
  const NoiseSeed pilot = seed.with_role(StreamRole::Pilot);
  const double h_exp = 4.0 - 4.0 * model.hurst;

  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  for (Index l = 0; l <= pilot_levels; ++l) {
    const Eigen::VectorXd d =
        level_corrections(model, payoff, refinement, l, 0, pilot_samples, pilot, options);
    const Eigen::VectorXd sq = d.array().square().matrix();
    const double second_moment = mean_of(sq);
    if (l == 0) {
      c2 = second_moment;
      continue;
    }
    const double h = std::pow(double(refinement), -double(l));
    const double lg = std::log(h);
    c1 = std::max(c1, second_moment / std::pow(h, h_exp - 2.0 * rho));
    c3 = std::max(c3, variance_of(d, mean_of(d)) / (std::pow(h, h_exp) * lg * lg));
  }
  return {positive_or_one(c1), positive_or_one(c2), positive_or_one(c3)};
}

MlmcResult mlmc_estimate(const MlmcPlan& plan, const ModelSpec& model, const Payoff& payoff,
                         const NoiseSeed& seed, const MlmcOptions& options) {
  require_mlmc_regime(model, options);
  if (plan.samples.size() != std::size_t(plan.levels + 1)) {
    throw DomainError("plan has " + std::to_string(plan.samples.size()) + " sample counts for " +
                      std::to_string(plan.levels + 1) + " levels");
  }
  // fail before any work if the finest level is too large
  LevelSolver::steps_checked(plan.refinement, plan.levels, options.max_fine_steps);

  const auto start = std::chrono::steady_clock::now();
  MlmcResult result;
  double variance_sum = 0.0;
  std::vector<double> means;
  for (Index l = 0; l <= plan.levels; ++l) {
    const LevelSolver solver(model, plan.refinement, l, options);
    const Index n = plan.samples[std::size_t(l)];
    if (n < 1) throw DomainError("level " + std::to_string(l) + " has no samples");
    const Eigen::VectorXd d = solver.corrections(payoff, 0, n, seed.with_level(l));

    LevelStats stats;
    stats.level = l;
    stats.stepsize = plan.stepsize(l);
    stats.samples = n;
    stats.mean_correction = mean_of(d);
    stats.variance_correction = variance_of(d, stats.mean_correction);
    stats.cost_units = double(n) * solver.cost_per_sample();
    stats.m_exp_fine = solver.m_exp_fine();
    if (!std::isfinite(stats.mean_correction)) throw NonFinite("non-finite level mean");

    means.push_back(stats.mean_correction);
    variance_sum += stats.variance_correction / double(n);
    result.total_cost += stats.cost_units;
    result.per_level.push_back(stats);
  }
  result.estimate = pairwise_sum(means);
  result.std_error = std::sqrt(variance_sum);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

McResult standard_mc_estimate(const ModelSpec& model, const Payoff& payoff, double stepsize,
                              Index samples, const NoiseSeed& seed, const MlmcOptions& options) {
  require_valid(model);
  if (samples < 1) throw DomainError("samples must be >= 1");
  if (!(stepsize > 0.0)) throw DomainError("stepsize must be positive");
  const double ratio = model.horizon / stepsize;
  const Index n_steps = Index(std::llround(ratio));
  if (n_steps < 1 || std::abs(ratio - double(n_steps)) > 1e-9 * ratio) {
    throw GridMismatch("horizon is not an integer multiple of the stepsize");
  }
  if (n_steps > options.max_fine_steps) {
    throw PlanInfeasible("single-level grid needs " + std::to_string(n_steps) + " steps");
  }

  const Grid grid(model.horizon, n_steps);
  const GProcessSampler sampler = cached_g_sampler(grid, model, options.cache_dir);
  const SoeApproximation soe = soe_for_grid(model.alpha, grid);
  const Index batch = std::max<Index>(options.batch, 1);

  Eigen::VectorXd values(samples);
  std::vector<NoiseSeed> seeds;
  for (Index start = 0; start < samples; start += batch) {
    const Index n = std::min(batch, samples - start);
    seeds.clear();
    for (Index i = 0; i < n; ++i) seeds.push_back(seed.with_sample(start + i));
    const Eigen::MatrixXd g = sample_g_batch(sampler, seeds);
    for (Index i = 0; i < n; ++i) {
      values[start + i] = payoff(fast_euler_solve(model, grid, soe, g.col(i)).endpoint());
    }
  }

  McResult r;
  r.samples = samples;
  r.stepsize = grid.stepsize();
  r.estimate = mean_of(values);
  r.variance = variance_of(values, r.estimate);
  if (samples > 1) r.std_error = std::sqrt(r.variance / double(samples));
  r.total_cost =
      double(samples) * cost_units(Method::FastEuler, n_steps, std::max<Index>(soe.m_exp(), 1));
  return r;
}

double cost_units(Method method, Index n_steps, Index m_exp) {
  const double n = double(n_steps);
  return method == Method::Euler ? n * n : n * double(m_exp);
}

double level_sum(double beta, double gamma, Index refinement, Index levels) {
  const double log_m = std::log(double(refinement));
  double sum = 0.0;
  for (Index l = 1; l <= levels; ++l) {
    sum += std::pow(double(l) * log_m, beta) * std::exp(-gamma * double(l) * log_m);
  }
  return sum;
}

double level_sum_shape(double beta, double gamma, Index refinement, Index levels) {
  const double log_m = std::log(double(refinement));
  const double lg = std::pow(double(levels) * log_m, beta);
  if (gamma > 0.0) return 1.0;
  if (gamma == 0.0) return lg * double(levels);
  return lg * std::exp(-gamma * double(levels) * log_m);
}

double level_sum_constant(double beta, double gamma, Index refinement) {
  if (gamma == 0.0) return 1.0;
  if (gamma < 0.0) return 1.0 / (1.0 - std::pow(double(refinement), gamma));
  // series to convergence
  const double log_m = std::log(double(refinement));
  double sum = 0.0;
  for (Index l = 1; l < 100000; ++l) {
    const double term = std::pow(double(l) * log_m, beta) * std::exp(-gamma * double(l) * log_m);
    sum += term;
    if (double(l) > beta / (gamma * log_m) && term < 1e-17 * sum) break;
  }
  return sum;
}

LevelSumCheck check_level_sum(double beta, double gamma, Index refinement, Index l_min,
                              Index l_max) {
  if (refinement < 2 || l_min < 1 || l_max < l_min || beta < 0.0) {
    throw DomainError("level-sum check needs M >= 2, 1 <= l_min <= l_max, beta >= 0");
  }
  LevelSumCheck check;
  check.bound_constant = level_sum_constant(beta, gamma, refinement);
  check.bounded = true;
  for (Index l = l_min; l <= l_max; ++l) {
    const double r = level_sum(beta, gamma, refinement, l) / level_sum_shape(beta, gamma, refinement, l);
    check.levels.push_back(l);
    check.ratios.push_back(r);
    if (r > check.bound_constant * (1.0 + 1e-12)) check.bounded = false;
  }
  for (std::size_t i = 1; i < check.ratios.size(); ++i) {
    check.max_step_variation = std::max(
        check.max_step_variation, std::abs(check.ratios[i] - check.ratios[i - 1]) / check.ratios[i]);
  }
  return check;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace fgle
