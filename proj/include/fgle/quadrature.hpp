#pragma once

#include <Eigen/Core>

namespace fgle {

// Nodes and weights of an n-point rule on [-1, 1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
};

// Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b, a, b > -1, built by the
// Golub-Welsch eigenvalue method. Nodes are returned in increasing order.
QuadratureRule gauss_jacobi(int n, double a, double b);

inline QuadratureRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

// Rule for int_lo^hi (x-lo)^b (hi-x)^a f(x) dx; the weight is absorbed into
// the returned weights so only f is evaluated at the nodes.
QuadratureRule map_jacobi(const QuadratureRule& rule, double a, double b, double lo, double hi);

}  // namespace fgle
