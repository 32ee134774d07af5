#include "fgle/solver.hpp"

#include "fgle/errors.hpp"
#include "fgle/noise.hpp"

#include <string>

namespace fgle {

namespace {

void check_inputs(const ModelSpec& model, const Grid& grid, Index g_size) {
  require_valid(model);
  if (std::abs(grid.horizon() - model.horizon) > 1e-12 * model.horizon) {
    throw GridMismatch("grid horizon differs from model horizon");
  }
  if (g_size != grid.n_steps()) {
    throw GridMismatch("g_path has length " + std::to_string(g_size) + ", grid has " +
                       std::to_string(grid.n_steps()) + " steps");
  }
}

[[noreturn]] void non_finite(Index n) {
  throw NonFinite("state became non-finite at step " + std::to_string(n));
}

}  // namespace

PathSolution euler_solve(const ModelSpec& model, const Grid& grid,
                         const Eigen::Ref<const Eigen::VectorXd>& g_path) {
  check_inputs(model, grid, g_path.size());
  const Index n_steps = grid.n_steps();
  const double h = grid.stepsize();
  const double alpha = model.alpha;
  const double inv_gamma = 1.0 / std::tgamma(alpha);
  const double local = std::pow(h, alpha) / std::tgamma(alpha + 1.0);

  // reversed[n_steps-1-m] = weight at lag m = n - j.
  Eigen::VectorXd reversed(n_steps);
  for (Index m = 0; m < n_steps; ++m) reversed[n_steps - 1 - m] = kernel_weight(m + 1, 1, alpha, h);

  PathSolution sol{grid, Eigen::VectorXd(n_steps + 1), Method::Euler, 0.0, g_path};
  Eigen::VectorXd drift(n_steps);
  sol.values[0] = model.x0;
  for (Index n = 1; n <= n_steps; ++n) {
    drift[n - 1] = model.drift(sol.values[n - 1]);
    // History j = 1..n-1 uses lags n-1..1; the last panel j = n is the local term.
    double history = 0.0;
    if (n > 1) history = inv_gamma * drift.head(n - 1).dot(reversed.segment(n_steps - n, n - 1));
    const double x = model.x0 + (history + local * drift[n - 1]) + g_path[n - 1];
    if (!std::isfinite(x)) non_finite(n);
    sol.values[n] = x;
  }
  return sol;
}

PathSolution fast_euler_solve(const ModelSpec& model, const Grid& grid, const SoeApproximation& soe,
                              const Eigen::Ref<const Eigen::VectorXd>& g_path) {
  check_inputs(model, grid, g_path.size());
  const double h = grid.stepsize();
  if (soe.truncation > h * (1.0 + 1e-12)) {
    throw SoeMismatch("SOE truncation " + std::to_string(soe.truncation) + " exceeds stepsize " +
                      std::to_string(h));
  }
  if (soe.horizon < grid.horizon() * (1.0 - 1e-12)) {
    throw SoeMismatch("SOE horizon is shorter than the grid horizon");
  }
  if (std::abs(soe.alpha - model.alpha) > 1e-15) throw SoeMismatch("SOE built for a different alpha");

  const Index n_steps = grid.n_steps();
  const double alpha = model.alpha;
  const double local = std::pow(h, alpha) / std::tgamma(alpha + 1.0);
  const double inv_gamma = 1.0 / std::tgamma(alpha);

  const Eigen::ArrayXd tau = soe.nodes.array();
  const Eigen::ArrayXd decay = (-tau * h).exp();
  // (e^{-tau h} - e^{-2 tau h}) / (tau Gamma(alpha)), written to keep precision for small tau h.
  const Eigen::ArrayXd inject = decay * (-(-tau * h).expm1()) / tau * inv_gamma;
  const Eigen::ArrayXd omega = soe.weights.array();

  PathSolution sol{grid, Eigen::VectorXd(n_steps + 1), Method::FastEuler, soe.tolerance, g_path};
  Eigen::ArrayXd modes = Eigen::ArrayXd::Zero(tau.size());
  sol.values[0] = model.x0;
  for (Index n = 1; n <= n_steps; ++n) {
    const double b = model.drift(sol.values[n - 1]);
    const double history = n > 1 ? (omega * modes).sum() : 0.0;
    const double y = model.x0 + (history + local * b) + g_path[n - 1];
    if (!std::isfinite(y)) non_finite(n);
    sol.values[n] = y;
    modes = decay * modes + inject * b;
  }
  return sol;
}

std::pair<PathSolution, PathSolution> coupled_pair_solve(
    const ModelSpec& model, const Grid& fine, const Grid& coarse,
    const Eigen::Ref<const Eigen::VectorXd>& shared_noise) {
  const Index stride = fine.refinement_over(coarse);
  const Eigen::VectorXd coarse_noise = restrict_path(shared_noise, stride);
  return {euler_solve(model, fine, shared_noise), euler_solve(model, coarse, coarse_noise)};
}

std::pair<PathSolution, PathSolution> coupled_pair_solve(
    const ModelSpec& model, const Grid& fine, const Grid& coarse,
    const Eigen::Ref<const Eigen::VectorXd>& shared_noise, const SoeApproximation& fine_soe,
    const SoeApproximation& coarse_soe) {
  const Index stride = fine.refinement_over(coarse);
  const Eigen::VectorXd coarse_noise = restrict_path(shared_noise, stride);
  return {fast_euler_solve(model, fine, fine_soe, shared_noise),
          fast_euler_solve(model, coarse, coarse_soe, coarse_noise)};
}

SoeApproximation soe_for_grid(double alpha, const Grid& grid) {
  const double h = grid.stepsize();
  if (grid.n_steps() == 1) {
    // no history to compress
    SoeApproximation soe;
    soe.alpha = alpha;
    soe.tolerance = std::pow(h, alpha);
    soe.truncation = h;
    soe.horizon = grid.horizon();
    return soe;
  }
  return build_soe(alpha, std::pow(h, alpha), h, grid.horizon());
}

}  // namespace fgle
