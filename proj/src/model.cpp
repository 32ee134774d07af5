#include "fgle/model.hpp"

#include "fgle/errors.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fgle {

namespace {

constexpr double kCriticalTol = 1e-12;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Drift Drift::parse(const std::string& raw) {
  const std::string name = lower(raw);
  if (name == "zero") return zero();
  if (name == "cosine" || name == "cos") return cosine();
  if (name == "bounded_well" || name == "boundedwell") return bounded_well();
  if (name == "linear") return linear(-1.0);
  if (name.rfind("linear(", 0) == 0 && name.back() == ')') {
    const std::string arg = name.substr(7, name.size() - 8);
    try {
      std::size_t used = 0;
      const double lambda = std::stod(arg, &used);
      if (used == arg.size()) return linear(lambda);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown drift '" + raw + "'");
}

std::string Drift::name() const {
  switch (kind) {
    case DriftKind::Zero:
      return "zero";
    case DriftKind::Linear: {
      std::ostringstream os;
      os.precision(17);
      os << "linear(" << lambda << ")";
      return os.str();
    }
    case DriftKind::Cosine:
      return "cosine";
    case DriftKind::BoundedWell:
      return "bounded_well";
  }
  return "zero";
}

double Drift::lipschitz() const {
  switch (kind) {
    case DriftKind::Zero:
      return 0.0;
    case DriftKind::Linear:
      return std::abs(lambda);
    case DriftKind::Cosine:
      return 1.0;
    case DriftKind::BoundedWell:
      // |(x^2-1)/(1+x^2)^2| peaks at x = 0.
      return 1.0;
  }
  return 0.0;
}

std::string ValidationResult::message() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

ValidationResult validate(const ModelSpec& model) {
  ValidationResult result;
  auto fail = [&](std::string what) { result.violations.push_back(std::move(what)); };

  const bool finite = std::isfinite(model.hurst) && std::isfinite(model.alpha) &&
                      std::isfinite(model.sigma) && std::isfinite(model.horizon) &&
                      std::isfinite(model.x0) && std::isfinite(model.drift.lambda);
  if (!finite) {
    fail("parameters must be finite");
    return result;
  }
  if (!(model.hurst > 0.5 && model.hurst < 1.0)) fail("hurst not in (1/2,1)");
  if (!(model.alpha > 1.0 - model.hurst)) fail("alpha <= 1-H");
  if (!(model.alpha <= 1.0)) fail("alpha > 1");
  if (!(model.horizon > 0.0)) fail("horizon must be positive");
  if (!(model.sigma >= 0.0)) fail("sigma must be nonnegative");
  return result;
}

void require_valid(const ModelSpec& model) {
  const auto result = validate(model);
  if (!result) throw DomainError("invalid model: " + result.message());
}

Grid::Grid(double horizon, Index n_steps) : horizon_(horizon), n_steps_(n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid horizon must be positive");
  if (n_steps < 1) throw DomainError("grid needs at least one step");
  stepsize_ = horizon / double(n_steps);
}

Eigen::VectorXd Grid::times() const {
  Eigen::VectorXd t(n_steps_ + 1);
  for (Index j = 0; j <= n_steps_; ++j) t[j] = time(j);
  return t;
}

bool Grid::nests(const Grid& coarse) const {
  return coarse.horizon_ == horizon_ && coarse.n_steps_ <= n_steps_ &&
         n_steps_ % coarse.n_steps_ == 0;
}

Index Grid::refinement_over(const Grid& coarse) const {
  if (!nests(coarse) || n_steps_ / coarse.n_steps_ < 2) {
    throw GridMismatch("grids are not nested: fine has " + std::to_string(n_steps_) +
                       " steps, coarse has " + std::to_string(coarse.n_steps_));
  }
  return n_steps_ / coarse.n_steps_;
}

RateSpec theoretical_rate(double hurst, double alpha) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("hurst not in (1/2,1)");
  if (!(alpha > 1.0 - hurst && alpha <= 1.0)) throw DomainError("alpha not in (1-H,1]");
  const double critical = 2.0 - 2.0 * hurst;
  if (std::abs(alpha - critical) <= kCriticalTol) return {critical, true};
  if (alpha < critical) return {2.0 * (hurst + alpha - 1.0), false};
  return {alpha, false};
}

}  // namespace fgle
