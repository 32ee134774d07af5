#include "fgle/quadrature.hpp"

#include "fgle/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace fgle {

QuadratureRule gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw DomainError("quadrature needs at least one node");
  if (!(a > -1.0 && b > -1.0)) throw DomainError("Jacobi exponents must exceed -1");

  // Symmetric tridiagonal Jacobi matrix of the orthonormal recurrence.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(n > 1 ? n - 1 : 0);
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      diag[k] = (b - a) / (ab + 2.0);
    } else {
      diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double beta;
    if (k == 1) {
      // Closed form avoids the 0/0 at a + b = -1.
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off[k - 1] = std::sqrt(beta);
  }

  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));

  QuadratureRule rule;
  if (n == 1) {
    rule.nodes = diag;
    rule.weights = Eigen::VectorXd::Constant(1, mu0);
    return rule;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw QuadratureFailure("Golub-Welsch eigensolve failed for n=" + std::to_string(n));
  }
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

QuadratureRule map_jacobi(const QuadratureRule& rule, double a, double b, double lo, double hi) {
  const double half = 0.5 * (hi - lo);
  QuadratureRule mapped;
  mapped.nodes = (lo + half) + half * rule.nodes.array();
  mapped.weights = rule.weights * std::pow(half, a + b + 1.0);
  return mapped;
}

}  // namespace fgle
