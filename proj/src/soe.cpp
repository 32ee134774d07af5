#include "fgle/soe.hpp"

#include "fgle/errors.hpp"
#include "fgle/quadrature.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fgle {

namespace {

constexpr int kMinNodes = 2;
constexpr int kMaxNodes = 48;
constexpr Index kCertificationPoints = 10000;

SoeApproximation assemble(double alpha, double tolerance, double truncation, double horizon,
                          double cutoff, int nodes_per_panel) {
  const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
  const double first_end = 1.0 / horizon;

  std::vector<double> tau;
  std::vector<double> w;

  // [0, 1/T] with weight s^(-alpha).
  const QuadratureRule head =
      map_jacobi(gauss_jacobi(nodes_per_panel, 0.0, -alpha), 0.0, -alpha, 0.0, first_end);
  for (Index k = 0; k < head.size(); ++k) {
    tau.push_back(head.nodes[k]);
    w.push_back(head.weights[k] * inv_gamma);
  }

  const QuadratureRule legendre = gauss_legendre(nodes_per_panel);
  for (double lo = first_end; lo < cutoff; lo *= 2.0) {
    const QuadratureRule panel = map_jacobi(legendre, 0.0, 0.0, lo, 2.0 * lo);
    for (Index k = 0; k < panel.size(); ++k) {
      tau.push_back(panel.nodes[k]);
      w.push_back(panel.weights[k] * std::pow(panel.nodes[k], -alpha) * inv_gamma);
    }
  }

  SoeApproximation soe;
  soe.alpha = alpha;
  soe.tolerance = tolerance;
  soe.truncation = truncation;
  soe.horizon = horizon;
  soe.nodes = Eigen::Map<const Eigen::VectorXd>(tau.data(), Index(tau.size()));
  soe.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), Index(w.size()));
  return soe;
}

}  // namespace

double soe_cutoff(double alpha, double tolerance, double truncation) {
  // int_S^inf e^{-kappa s} s^{-alpha} ds / Gamma(1-alpha) <= S^{-alpha} e^{-kappa S} / (kappa Gamma(1-alpha)).
  const double target = 0.25 * tolerance * truncation * std::tgamma(1.0 - alpha);
  double s = 1.0 / truncation;
  for (int it = 0; it < 50; ++it) {
    const double next = std::max(1.0 / truncation, std::log(std::pow(s, -alpha) / target) / truncation);
    if (std::abs(next - s) <= 1e-12 * s) break;
    s = next;
  }
  return s;
}

CertificationReport certify_soe(const SoeApproximation& soe, Index grid_points) {
  if (grid_points < 2) throw DomainError("certification grid needs at least two points");
  const double log_lo = std::log(soe.truncation);
  const double log_hi = std::log(soe.horizon);
  CertificationReport report;
  for (Index k = 0; k < grid_points; ++k) {
    const double t = k == grid_points - 1
                         ? soe.horizon
                         : std::exp(log_lo + (log_hi - log_lo) * double(k) / double(grid_points - 1));
    const double err = std::abs(std::pow(t, soe.alpha - 1.0) - eval_soe(soe, t));
    if (err > report.max_error || k == 0) {
      report.max_error = err;
      report.argmax = t;
    }
  }
  return report;
}

SoeApproximation build_soe(double alpha, double tolerance, double truncation, double horizon) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("build_soe: alpha must lie in (0,1)");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("build_soe: tolerance must lie in (0,1)");
  if (!(truncation > 0.0 && truncation < horizon)) {
    throw DomainError("build_soe: need 0 < truncation < horizon");
  }

  double cutoff = soe_cutoff(alpha, tolerance, truncation);
  for (int attempt = 0; attempt < 2; ++attempt) {
    for (int n = kMinNodes; n <= kMaxNodes; ++n) {
      SoeApproximation soe = assemble(alpha, tolerance, truncation, horizon, cutoff, n);
      if (certify_soe(soe, kCertificationPoints).max_error <= tolerance) return soe;
    }
    cutoff *= 2.0;
  }
  throw CertificationFailure("build_soe: no certified approximation for alpha=" + std::to_string(alpha) +
                             ", eps=" + std::to_string(tolerance) +
                             ", kappa=" + std::to_string(truncation));
}

}  // namespace fgle
