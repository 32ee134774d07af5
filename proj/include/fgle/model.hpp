#pragma once

// Problem description for the overdamped generalized Langevin equation
//
//   x(t) = x0 + 1/Gamma(alpha) int_0^t (t-s)^(alpha-1) b(x(s)) ds
//             + sigma/Gamma(alpha) int_0^t (t-s)^(alpha-1) dW_H(s)
//
// driven by fractional Brownian motion W_H with Hurst index H in (1/2, 1).

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

namespace fgle {

using Index = Eigen::Index;

enum class DriftKind { Zero, Linear, Cosine, BoundedWell };

// Closed registry of Lipschitz drifts with analytic derivative.
struct Drift {
  DriftKind kind = DriftKind::Zero;
  double lambda = 0.0;  // slope, Linear only

  static Drift zero() { return {DriftKind::Zero, 0.0}; }
  static Drift linear(double lambda) { return {DriftKind::Linear, lambda}; }
  static Drift cosine() { return {DriftKind::Cosine, 0.0}; }
  static Drift bounded_well() { return {DriftKind::BoundedWell, 0.0}; }

  // Parses "zero", "cosine", "bounded_well", "linear" or "linear(<lambda>)".
  static Drift parse(const std::string& name);
  std::string name() const;

  template <typename Scalar>
  Scalar operator()(Scalar x) const;
  template <typename Scalar>
  Scalar derivative(Scalar x) const;

  // sup |b'|.
  double lipschitz() const;

  bool operator==(const Drift&) const = default;
};

template <typename Scalar>
Scalar Drift::operator()(Scalar x) const {
  using std::cos;
  switch (kind) {
    case DriftKind::Zero:
      return Scalar(0);
    case DriftKind::Linear:
      return Scalar(lambda) * x;
    case DriftKind::Cosine:
      return cos(x);
    case DriftKind::BoundedWell:
      return -x / (Scalar(1) + x * x);
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar Drift::derivative(Scalar x) const {
  using std::sin;
  switch (kind) {
    case DriftKind::Zero:
      return Scalar(0);
    case DriftKind::Linear:
      return Scalar(lambda);
    case DriftKind::Cosine:
      return -sin(x);
    case DriftKind::BoundedWell: {
      const Scalar x2 = x * x;
      return (x2 - Scalar(1)) / ((Scalar(1) + x2) * (Scalar(1) + x2));
    }
  }
  return Scalar(0);
}

template <typename Scalar>
Scalar drift_eval(const Drift& drift, Scalar x) {
  return drift(x);
}

template <typename Scalar>
Scalar drift_deriv(const Drift& drift, Scalar x) {
  return drift.derivative(x);
}

struct ModelSpec {
  double hurst = 0.75;
  double alpha = 0.5;
  double sigma = 1.0;
  double horizon = 1.0;
  double x0 = 0.0;
  Drift drift = Drift::zero();

  bool operator==(const ModelSpec&) const = default;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
  std::string message() const;
};

// Checks H in (1/2,1), alpha in (1-H,1], T > 0, sigma >= 0 and finiteness.
ValidationResult validate(const ModelSpec& model);

// Throws DomainError listing every violation.
void require_valid(const ModelSpec& model);

// Uniform partition t_j = j*h of [0, T].
class Grid {
 public:
  Grid() = default;
  Grid(double horizon, Index n_steps);

  Index n_steps() const { return n_steps_; }
  double horizon() const { return horizon_; }
  double stepsize() const { return stepsize_; }
  double time(Index j) const { return j == n_steps_ ? horizon_ : double(j) * stepsize_; }
  Eigen::VectorXd times() const;

  // True when `coarse` is obtained from this grid by keeping every m-th point.
  bool nests(const Grid& coarse) const;
  // Ratio n_steps / coarse.n_steps; throws GridMismatch unless nested with ratio >= 2.
  Index refinement_over(const Grid& coarse) const;

  bool operator==(const Grid&) const = default;

 private:
  double horizon_ = 1.0;
  Index n_steps_ = 1;
  double stepsize_ = 1.0;
};

struct RateSpec {
  double exponent = 0.0;
  bool log_factor = false;
};

// Strong convergence rate of the Euler method:
//   2(H+alpha-1)           for alpha in (1-H, 2-2H),
//   2-2H with a log factor at alpha = 2-2H,
//   alpha                  for alpha in (2-2H, 1]  (alpha = 1 is classical Euler, order 1).
RateSpec theoretical_rate(double hurst, double alpha);

}  // namespace fgle
