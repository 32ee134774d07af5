#include "fgle/special.hpp"

#include "fgle/errors.hpp"

#include <cmath>

namespace fgle {

namespace {

constexpr int kNearTerms = 160;
constexpr int kFarTerms = 80;
constexpr double kSeriesEps = 1e-17;

}  // namespace

double mittag_leffler(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("mittag_leffler: alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw DomainError("mittag_leffler: beta must be positive");
  if (!(std::abs(z) <= 50.0)) throw DomainError("mittag_leffler: |z| must not exceed 50");

  if (z == 0.0) return 1.0 / std::tgamma(beta);
  if (z < 0.0 && alpha == 1.0 && beta == 1.0) return std::exp(z);
  if (z < 0.0 && alpha == 0.5 && beta == 1.0) return std::exp(z * z) * std::erfc(-z);

  const long double log_abs_z = std::log(static_cast<long double>(std::abs(z)));
  long double sum = 0.0L;
  long double abs_sum = 0.0L;
  long double previous = INFINITY;
  for (int n = 0; n < 20000; ++n) {
    const long double log_mag = n * log_abs_z - std::lgamma(static_cast<long double>(alpha) * n + beta);
    const long double mag = std::exp(log_mag);
    const long double term = (z < 0.0 && (n % 2 == 1)) ? -mag : mag;
    sum += term;
    abs_sum += mag;
    if (n > 0 && mag < previous && mag < 1e-16L * std::abs(sum)) {
      if (abs_sum > 1e5L * std::abs(sum)) {
        throw DomainError("mittag_leffler: series cancellation too severe at this argument");
      }
      return static_cast<double>(sum);
    }
    previous = mag;
  }
  throw DomainError("mittag_leffler: series did not converge");
}

double beta_function(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta_function requires positive arguments");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

PowerBinomialIntegral::PowerBinomialIntegral(double a, double b)
    : a_(a), b_(b), near_coeff_(kNearTerms), far_binom_(kFarTerms), far_power_(kFarTerms),
      far_half_(kFarTerms) {
  if (!(a > 0.0)) throw DomainError("PowerBinomialIntegral requires a > 0");

  // (1-x)^{-m} = sum_k (m)_k / k! x^k with m = a + b + 1.
  const double m = a + b + 1.0;
  double pochhammer = 1.0;
  for (int k = 0; k < kNearTerms; ++k) {
    near_coeff_[k] = pochhammer / (k + a);
    pochhammer *= (m + k) / (k + 1.0);
  }

  double binom = 1.0;
  for (int k = 0; k < kFarTerms; ++k) {
    far_binom_[k] = binom;
    far_power_[k] = k - a - b;
    far_half_[k] = std::pow(0.5, far_power_[k]);
    binom *= (b - k) / (k + 1.0);
  }

  const double x_two = 2.0 / 3.0;
  psi_two_ = std::pow(x_two, a) * near_series(x_two);
}

double PowerBinomialIntegral::near_series(double x) const {
  double sum = 0.0;
  double xk = 1.0;
  for (int k = 0; k < kNearTerms; ++k) {
    const double term = near_coeff_[k] * xk;
    sum += term;
    if (k > 8 && std::abs(term) < kSeriesEps * std::abs(sum)) break;
    xk *= x;
    if (xk == 0.0) break;
  }
  return sum;
}

double PowerBinomialIntegral::far_tail(double u) const {
  // sum_k binom(b,k) int_u^{1/2} z^{p_k - 1} dz
  const double log_ratio = std::log(0.5 / u);
  double u_pow = std::pow(u, far_power_[0]);
  double sum = 0.0;
  for (int k = 0; k < kFarTerms; ++k) {
    const double p = far_power_[k];
    double piece;
    if (std::abs(p) < 0.25) {
      piece = p == 0.0 ? log_ratio : u_pow * std::expm1(p * log_ratio) / p;
    } else {
      piece = (far_half_[k] - u_pow) / p;
    }
    const double term = far_binom_[k] * piece;
    sum += term;
    if (k > 4 && std::abs(term) < kSeriesEps * std::abs(sum)) break;
    u_pow *= u;
  }
  return sum;
}

double PowerBinomialIntegral::operator()(double y) const {
  if (!(y >= 0.0)) throw DomainError("PowerBinomialIntegral: negative upper limit");
  if (y == 0.0) return 0.0;
  if (y <= 2.0) {
    const double x = y / (1.0 + y);
    return std::pow(x, a_) * near_series(x);
  }
  return psi_two_ + far_tail(1.0 / y);
}

double PowerBinomialIntegral::normalized(double y) const {
  if (!(y >= 0.0)) throw DomainError("PowerBinomialIntegral: negative upper limit");
  if (y <= 2.0) {
    const double x = y / (1.0 + y);
    return std::pow(1.0 + y, -a_) * near_series(x);
  }
  return (psi_two_ + far_tail(1.0 / y)) * std::pow(y, -a_);
}

}  // namespace fgle
