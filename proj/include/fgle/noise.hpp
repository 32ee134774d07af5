#pragma once

// Fractional noise inputs of the Euler schemes: fractional Gaussian noise,
// exact joint samples of the singular stochastic integral
//
//   G(t) = sigma/Gamma(alpha) int_0^t (t-u)^(alpha-1) dW_H(u)
//
// on a uniform grid, and a fine-grid convolution oracle for G.

#include "fgle/model.hpp"
#include "fgle/quadrature.hpp"
#include "fgle/rng.hpp"
#include "fgle/special.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <optional>
#include <span>

namespace fgle {

// Cov(W_H(t), W_H(s)) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
template <typename Scalar>
Scalar fbm_covariance(Scalar t, Scalar s, Scalar hurst) {
  using std::abs;
  using std::pow;
  const Scalar two_h = Scalar(2) * hurst;
  return Scalar(0.5) * (pow(t, two_h) + pow(s, two_h) - pow(abs(t - s), two_h));
}

// Autocovariance of unit-spaced fractional Gaussian noise at lag k.
template <typename Scalar>
Scalar fgn_autocovariance(Eigen::Index lag, Scalar hurst) {
  using std::abs;
  using std::pow;
  const Scalar k = Scalar(lag < 0 ? -lag : lag);
  const Scalar two_h = Scalar(2) * hurst;
  return Scalar(0.5) * (pow(k + Scalar(1), two_h) + pow(abs(k - Scalar(1)), two_h) -
                        Scalar(2) * pow(k, two_h));
}

// Covariance kernel of G for fixed (alpha, H, sigma).
//
// With p = t-u, q = s-v and d = t-s >= 0 the defining double integral reads
//   H(2H-1) int_0^t int_0^s p^(a-1) q^(a-1) |p-q-d|^(2H-2) dq dp.
// The p-integral is done analytically, leaving
//   B(a,2H-1) d^(2a+2H-2) Psi_1(s/d)
//   + int_0^s q^(a-1) (s-q)^(2H-1) c^(a-1) psi_2((s-q)/c) dq,   c = q + d,
// where Psi_1, psi_2 are incomplete power-binomial integrals. The remaining
// q-integral is evaluated with Gauss-Jacobi panels carrying the endpoint
// singularities, geometrically graded towards q = 0 when d << s.
class GCovariance {
 public:
  explicit GCovariance(const ModelSpec& model);

  double operator()(double t, double s) const;

  // Var G(t) = c_{alpha,H} sigma^2 t^{2(alpha+H-1)} in closed form.
  double variance(double t) const;
  // c_{alpha,H} sigma^2.
  double variance_constant() const { return variance_constant_; }

 private:
  double off_diagonal(double t, double s) const;  // requires t > s > 0
  double panel_sum(const QuadratureRule& rule, double lo, double hi, double s, double d,
                   bool weight_left, bool weight_right) const;

  double alpha_;
  double hurst_;
  double prefactor_;  // sigma^2 H (2H-1) / Gamma(alpha)^2
  double beta_;       // B(alpha, 2H-1)
  double variance_constant_;
  PowerBinomialIntegral outer_;  // a = alpha, b = alpha + 2H - 2
  PowerBinomialIntegral inner_;  // a = 2H - 1, b = alpha - 1
  QuadratureRule single_;        // weights (1-x)^{2H-1} (1+x)^{alpha-1}
  QuadratureRule first_;         // weight (1+x)^{alpha-1}
  QuadratureRule middle_;        // Gauss-Legendre
  QuadratureRule last_;          // weight (1-x)^{2H-1}
};

// Cov(G(t), G(s)); symmetric by argument ordering.
double g_covariance(double t, double s, const ModelSpec& model);

// Exact Gaussian sampler of (G(t_1), ..., G(t_N)).
struct GProcessSampler {
  Grid grid;
  ModelSpec model;
  Eigen::MatrixXd covariance;  // empty when restored from a factor cache
  Eigen::MatrixXd factor;      // lower triangular, factor * factor^T = covariance + jitter I
  double jitter_used = 0.0;

  Index size() const { return grid.n_steps(); }
};

// Assembles Cov(G(t_i), G(t_j)) and its Cholesky factor, escalating diagonal
// jitter through {0, 1e-14, 1e-12, 1e-10} * max(diag). Throws NotPositiveDefinite.
GProcessSampler build_g_sampler(const Grid& grid, const ModelSpec& model);

// Covariance matrix alone (N x N, symmetric).
Eigen::MatrixXd g_covariance_matrix(const Grid& grid, const ModelSpec& model);

// factor * z with z drawn from the stream `seed`; element n-1 is G(t_n).
Eigen::VectorXd sample_g(const GProcessSampler& sampler, const NoiseSeed& seed);

// One column per seed. Columns agree with sample_g up to rounding of the product.
Eigen::MatrixXd sample_g_batch(const GProcessSampler& sampler, std::span<const NoiseSeed> seeds);

// Every m-th entry of a fine-grid G path: the coarse-grid path of the same randomness.
Eigen::VectorXd restrict_path(const Eigen::Ref<const Eigen::VectorXd>& fine_path, Index stride);

// Increments W_H(t_j) - W_H(t_{j-1}), j = 1..n, by circulant embedding; falls
// back to a Cholesky factor of the Toeplitz covariance if the embedding has a
// negative eigenvalue.
Eigen::VectorXd sample_fgn(Index n, double stepsize, double hurst, const NoiseSeed& seed);

// Riemann-Stieltjes approximation of G(t_n) on a grid refined `refinement`
// times, with the kernel evaluated at substep midpoints. Validation only.
Eigen::VectorXd sample_g_convolution_oracle(const Grid& grid, const ModelSpec& model,
                                            Index refinement, const NoiseSeed& seed);

// Exact covariance of the convolution oracle's output (kernel weights against
// the fGn covariance), used to bound its discretization bias.
Eigen::MatrixXd convolution_oracle_covariance(const Grid& grid, const ModelSpec& model,
                                              Index refinement);

// Binary factor cache:
//   8-byte magic "FGLEGCF1", uint32 version, parameter block
//   {uint64 n_steps, f64 horizon, hurst, alpha, sigma, jitter_used},
//   then the lower triangle of the factor row by row, all little-endian.

// File name derived from the (grid, model) parameters.
std::filesystem::path factor_cache_path(const std::filesystem::path& dir, const Grid& grid,
                                        const ModelSpec& model);
void save_factor(const std::filesystem::path& path, const GProcessSampler& sampler);
// Returns nullopt if the file is missing or was written for other parameters.
std::optional<GProcessSampler> load_factor(const std::filesystem::path& path, const Grid& grid,
                                           const ModelSpec& model);
// load_factor from `cache_dir` if present, else build and store. Empty dir disables caching.
GProcessSampler cached_g_sampler(const Grid& grid, const ModelSpec& model,
                                 const std::filesystem::path& cache_dir);

}  // namespace fgle
