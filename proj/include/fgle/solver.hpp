#pragma once

// Euler and fast (sum-of-exponentials) Euler schemes for
//   x(t) = x0 + 1/Gamma(alpha) int_0^t (t-s)^(alpha-1) b(x(s)) ds + G(t)
// on a uniform grid, with G(t_n) supplied exactly by the noise module.

#include "fgle/model.hpp"
#include "fgle/soe.hpp"

#include <Eigen/Core>

#include <cmath>
#include <utility>

namespace fgle {

enum class Method { Euler, FastEuler };

// int_{t_{j-1}}^{t_j} (t_n - s)^(alpha-1) ds = h^alpha/alpha [(n-j+1)^alpha - (n-j)^alpha].
template <typename Scalar>
Scalar kernel_weight(Index n, Index j, Scalar alpha, Scalar stepsize) {
  using std::pow;
  const Scalar m = Scalar(n - j);
  return pow(stepsize, alpha) / alpha * (pow(m + Scalar(1), alpha) - pow(m, alpha));
}

struct PathSolution {
  Grid grid;
  Eigen::VectorXd values;  // x_0 .. x_N
  Method method = Method::Euler;
  double tolerance = 0.0;  // SOE tolerance, FastEuler only
  Eigen::VectorXd g_path;  // G(t_1) .. G(t_N)

  double endpoint() const { return values[values.size() - 1]; }
};

// O(N^2) Euler scheme. g_path[n-1] = G(t_n). Throws NonFinite.
PathSolution euler_solve(const ModelSpec& model, const Grid& grid,
                         const Eigen::Ref<const Eigen::VectorXd>& g_path);

// O(N m_exp) fast Euler scheme. The most recent step keeps the exact weight
// h^alpha/Gamma(alpha+1); older history is carried by one mode per exponential.
// Throws SoeMismatch if soe.truncation > h or soe.horizon < T.
PathSolution fast_euler_solve(const ModelSpec& model, const Grid& grid, const SoeApproximation& soe,
                              const Eigen::Ref<const Eigen::VectorXd>& g_path);

// Solves fine and coarse grids on one fine-grid G sample (coarse reads every M-th value).
std::pair<PathSolution, PathSolution> coupled_pair_solve(
    const ModelSpec& model, const Grid& fine, const Grid& coarse,
    const Eigen::Ref<const Eigen::VectorXd>& shared_noise);

std::pair<PathSolution, PathSolution> coupled_pair_solve(
    const ModelSpec& model, const Grid& fine, const Grid& coarse,
    const Eigen::Ref<const Eigen::VectorXd>& shared_noise, const SoeApproximation& fine_soe,
    const SoeApproximation& coarse_soe);

// SOE with the coupling eps = h^alpha, kappa = h used by the fast method on `grid`.
// A one-step grid gets an empty expansion.
SoeApproximation soe_for_grid(double alpha, const Grid& grid);

}  // namespace fgle
