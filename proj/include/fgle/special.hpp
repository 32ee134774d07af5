#pragma once

#include <Eigen/Core>

namespace fgle {

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) = sum_n z^n / Gamma(alpha n + beta).
//
// Evaluated by the truncated power series (stop once |term| < 1e-16 |partial sum|),
// accumulated in extended precision. Validity range: alpha in (0,1], beta > 0 and
// |z| <= 50, further restricted to arguments where the alternating series loses
// fewer than six digits to cancellation (sum|term| <= 1e5 |E|); outside that the
// function throws DomainError instead of returning an inaccurate value. The two
// closed forms E_{1,1}(z) = exp(z) and E_{1/2,1}(z) = exp(z^2) erfc(-z) are used
// for z < 0, where the series would cancel catastrophically.
double mittag_leffler(double alpha, double beta, double z);

// B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b) for a, b > 0.
double beta_function(double a, double b);

// Psi(Y) = int_0^Y y^(a-1) (1+y)^b dy for a > 0 and real b, Y >= 0.
//
// Y <= 2 uses the series of x^(a-1) (1-x)^(-a-b-1) in x = y/(1+y); Y > 2 adds the
// expansion of (1+z)^b z^(-a-b-1) in z = 1/y. Both converge geometrically; the
// coefficients are tabulated once per (a, b).
class PowerBinomialIntegral {
 public:
  PowerBinomialIntegral(double a, double b);

  double operator()(double y) const;
  // Psi(Y) / Y^a, finite as Y -> 0 (limit 1/a).
  double normalized(double y) const;

  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double near_series(double x) const;  // sum_k d_k x^k
  double far_tail(double u) const;     // int_u^{1/2} (1+z)^b z^(-a-b-1) dz

  double a_;
  double b_;
  Eigen::VectorXd near_coeff_;   // d_k = (a+b+1)_k / k! / (k+a)
  Eigen::VectorXd far_binom_;    // binom(b, k)
  Eigen::VectorXd far_power_;    // p_k = k - a - b
  Eigen::VectorXd far_half_;     // (1/2)^{p_k}
  double psi_two_ = 0.0;         // Psi(2)
};

}  // namespace fgle
