#include "fgle/errors.hpp"
#include "fgle/quadrature.hpp"
#include "fgle/special.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace fgle;

TEST(MittagLeffler, ExponentialCase) {
  EXPECT_NEAR(mittag_leffler(1.0, 1.0, 1.0), std::exp(1.0), 1e-10);
  for (double z = -20.0; z <= 20.0; z += 0.5) {
    EXPECT_NEAR(mittag_leffler(1.0, 1.0, z) / std::exp(z), 1.0, 1e-10) << z;
  }
}

TEST(MittagLeffler, ZeroArgument) {
  for (double beta : {0.5, 1.0, 1.7, 3.0}) {
    EXPECT_NEAR(mittag_leffler(0.6, beta, 0.0), 1.0 / std::tgamma(beta), 1e-15);
  }
}

TEST(MittagLeffler, HalfOrderAgainstErfc) {
  EXPECT_NEAR(mittag_leffler(0.5, 1.0, -1.0), 0.4275836, 5e-8);
  for (double z : {-3.0, -1.0, -0.2, 0.3, 1.0, 2.5}) {
    const double oracle = std::exp(z * z) * std::erfc(-z);
    EXPECT_NEAR(mittag_leffler(0.5, 1.0, z) / oracle, 1.0, 1e-10) << z;
  }
}

TEST(MittagLeffler, SecondParameter) {
  // E_{1,2}(z) = (e^z - 1) / z
  for (double z : {-2.0, 0.5, 3.0}) {
    EXPECT_NEAR(mittag_leffler(1.0, 2.0, z), std::expm1(z) / z, 1e-12);
  }
}

TEST(MittagLeffler, OutsideValidityRange) {
  EXPECT_THROW(mittag_leffler(1.5, 1.0, 1.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.5, 0.0, 1.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.5, 1.0, 60.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.3, 1.0, -40.0), DomainError);
}

TEST(Beta, MatchesBoost) {
  for (double a : {0.2, 0.75, 1.0, 2.5})
    for (double b : {0.1, 0.5, 3.0}) EXPECT_NEAR(beta_function(a, b) / boost::math::beta(a, b), 1.0, 1e-13);
}

TEST(PowerBinomial, MatchesAdaptiveQuadrature) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (auto [a, b] : {std::pair{0.75, -0.5}, {0.4, -1.1}, {0.2, 0.3}, {0.9, -0.2}, {1.5, -1.7}}) {
    const PowerBinomialIntegral psi(a, b);
    for (double y : {1e-4, 0.3, 1.0, 2.0, 2.5, 10.0, 300.0}) {
      // y = u^(1/a) removes the endpoint singularity
      auto f = [&](double u) { return std::pow(1.0 + std::pow(u, 1.0 / a), b) / a; };
      const double ref = integrator.integrate(f, 0.0, std::pow(y, a));
      EXPECT_NEAR(psi(y) / ref, 1.0, 1e-12) << "a=" << a << " b=" << b << " y=" << y;
    }
  }
}

TEST(PowerBinomial, NormalizedLimit) {
  const PowerBinomialIntegral psi(0.6, -0.4);
  EXPECT_NEAR(psi.normalized(0.0), 1.0 / 0.6, 1e-14);
  EXPECT_NEAR(psi.normalized(1e-9), 1.0 / 0.6, 1e-8);
  EXPECT_NEAR(psi.normalized(0.7) * std::pow(0.7, 0.6), psi(0.7), 1e-15);
}

TEST(GaussJacobi, LegendreTwoPoint) {
  const QuadratureRule r = gauss_legendre(2);
  EXPECT_NEAR(r.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.weights[0], 1.0, 1e-15);
}

TEST(GaussJacobi, ExactForPolynomialsAgainstQuadrature) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (auto [a, b] : {std::pair{-0.5, -0.5}, {0.3, -0.7}, {-0.25, 0.8}, {0.0, -0.6}}) {
    const int n = 8;
    const QuadratureRule r = gauss_jacobi(n, a, b);
    for (int k = 0; k < 2 * n; k += 3) {
      // split at 0 so each endpoint singularity sits at an exact zero
      auto left = [&](double t) { return std::pow(2 - t, a) * std::pow(t, b) * std::pow(t - 1, k); };
      auto right = [&](double t) { return std::pow(t, a) * std::pow(2 - t, b) * std::pow(1 - t, k); };
      const double ref = integrator.integrate(left, 0.0, 1.0) + integrator.integrate(right, 0.0, 1.0);
      const double got = (r.weights.array() * r.nodes.array().pow(double(k))).sum();
      EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::abs(ref))) << a << " " << b << " k=" << k;
    }
    for (int i = 1; i < n; ++i) EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
  }
}

TEST(GaussJacobi, MappedInterval) {
  // int_2^5 (x-2)^b (5-x)^a dx = 3^{a+b+1} B(a+1, b+1)
  const double a = -0.4, b = 0.3;
  const QuadratureRule r = map_jacobi(gauss_jacobi(6, a, b), a, b, 2.0, 5.0);
  EXPECT_NEAR(r.weights.sum(), std::pow(3.0, a + b + 1) * boost::math::beta(a + 1, b + 1), 1e-13);
  EXPECT_GT(r.nodes.minCoeff(), 2.0);
  EXPECT_LT(r.nodes.maxCoeff(), 5.0);
}
