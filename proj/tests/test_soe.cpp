#include "fgle/errors.hpp"
#include "fgle/soe.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fgle;

TEST(Soe, CertifiedOverParameterGrid) {
  for (double alpha : {0.3, 0.5, 0.8})
    for (double eps : {1e-3, 1e-6}) {
      const SoeApproximation soe = build_soe(alpha, eps, 1e-3, 1.0);
      const CertificationReport rep = certify_soe(soe);
      EXPECT_LE(rep.max_error, eps) << alpha << " " << eps;
      EXPECT_GE(rep.argmax, 1e-3);
      EXPECT_LE(rep.argmax, 1.0);
      ASSERT_GT(soe.m_exp(), 0);
      EXPECT_GT(soe.weights.minCoeff(), 0.0);
      for (Index i = 1; i < soe.m_exp(); ++i) EXPECT_LT(soe.nodes[i - 1], soe.nodes[i]);
    }
}

TEST(Soe, CertificationDetectsPerturbation) {
  SoeApproximation soe = build_soe(0.5, 1e-6, 1e-3, 1.0);
  soe.weights[0] *= 1.0 + 1e-2;
  EXPECT_GT(certify_soe(soe).max_error, 1e-6);
}

TEST(Soe, DenserCertificationGridAgrees) {
  const SoeApproximation soe = build_soe(0.8, 1e-6, 1e-3, 1.0);
  const double coarse = certify_soe(soe, 10000).max_error;
  const double fine = certify_soe(soe, 100000).max_error;
  EXPECT_LE(fine, 1.5e-6);
  EXPECT_NEAR(fine, coarse, 0.5 * coarse);
}

TEST(Soe, EndpointsMatchKernel) {
  const double alpha = 0.4;
  const SoeApproximation soe = build_soe(alpha, 1e-8, 1e-4, 2.0);
  EXPECT_NEAR(eval_soe(soe, 1e-4), std::pow(1e-4, alpha - 1.0), 1e-8);
  EXPECT_NEAR(eval_soe(soe, 2.0), std::pow(2.0, alpha - 1.0), 1e-8);
}

TEST(Soe, MoreTermsForTighterTolerance) {
  Index prev = 0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const Index m = build_soe(0.5, eps, 1e-3, 1.0).m_exp();
    EXPECT_GE(m, prev) << eps;
    prev = m;
  }
  EXPECT_GE(build_soe(0.5, 1e-6, 1e-5, 1.0).m_exp(), build_soe(0.5, 1e-6, 1e-3, 1.0).m_exp());
}

TEST(Soe, GrowthInGridSizeIsPolylog) {
  // eps = h^alpha, kappa = h with h = 1/N: m_exp / (ln N)^2 stays bounded.
  const double alpha = 0.5;
  std::vector<double> ratio;
  for (int k = 4; k <= 12; k += 2) {
    const double h = std::ldexp(1.0, -k);
    const double ln_n = std::log(1.0 / h);
    ratio.push_back(double(build_soe(alpha, std::pow(h, alpha), h, 1.0).m_exp()) / (ln_n * ln_n));
  }
  for (double r : ratio) EXPECT_LT(r, 3.0 * ratio.front());
  EXPECT_LT(ratio.back(), ratio.front());
}

TEST(Soe, CutoffGrowsAsTruncationShrinks) {
  EXPECT_GT(soe_cutoff(0.5, 1e-6, 1e-4), soe_cutoff(0.5, 1e-6, 1e-3));
  EXPECT_GT(soe_cutoff(0.5, 1e-8, 1e-3), soe_cutoff(0.5, 1e-6, 1e-3));
}

TEST(Soe, RejectsBadArguments) {
  EXPECT_THROW(build_soe(1.0, 1e-6, 1e-3, 1.0), DomainError);
  EXPECT_THROW(build_soe(0.0, 1e-6, 1e-3, 1.0), DomainError);
  EXPECT_THROW(build_soe(0.5, 1.0, 1e-3, 1.0), DomainError);
  EXPECT_THROW(build_soe(0.5, 1e-6, 1.0, 1.0), DomainError);
  EXPECT_THROW(build_soe(0.5, 1e-6, 0.0, 1.0), DomainError);
}
