#pragma once

// Sum-of-exponentials approximation of the power kernel t^(alpha-1) on [kappa, T]:
//
//   | t^(alpha-1) - sum_i w_i exp(-tau_i t) | <= eps   for all t in [kappa, T].
//
// Built from t^(alpha-1) = 1/Gamma(1-alpha) int_0^inf exp(-t s) s^(-alpha) ds with a
// Gauss-Jacobi panel on [0, 1/T] (absorbing s^(-alpha)) followed by dyadic
// Gauss-Legendre panels up to a cutoff where the remaining tail is below eps/4.

#include "fgle/model.hpp"

#include <Eigen/Core>

namespace fgle {

struct SoeApproximation {
  double alpha = 0.5;
  double tolerance = 1e-6;
  double truncation = 1e-3;
  double horizon = 1.0;
  Eigen::VectorXd nodes;    // tau_i, strictly increasing
  Eigen::VectorXd weights;  // w_i > 0

  Index m_exp() const { return nodes.size(); }
};

struct CertificationReport {
  double max_error = 0.0;
  double argmax = 0.0;
};

// Requires 0 < kappa < T, 0 < eps < 1, alpha in (0,1). The per-panel node count
// is the smallest that passes certification on 10^4 geometric points; if none
// up to the cap does, the cutoff is widened once before CertificationFailure.
SoeApproximation build_soe(double alpha, double tolerance, double truncation, double horizon);

// sum_i w_i exp(-tau_i t). No error guarantee outside [kappa, T].
template <typename Scalar>
Scalar eval_soe(const SoeApproximation& soe, Scalar t) {
  return (soe.weights.array() * (-soe.nodes.array() * double(t)).exp()).sum();
}

// Max |t^(alpha-1) - soe(t)| over `grid_points` logarithmically spaced points of [kappa, T].
CertificationReport certify_soe(const SoeApproximation& soe, Index grid_points = 10000);

// Cutoff S of the s-integral such that the dropped tail is below eps/4 on [kappa, T].
double soe_cutoff(double alpha, double tolerance, double truncation);

}  // namespace fgle
