#include "fgle/noise.hpp"

#include "fgle/errors.hpp"

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace fgle {

namespace {

constexpr int kSingleNodes = 32;
constexpr int kFirstNodes = 20;
constexpr int kMiddleNodes = 16;
constexpr int kLastNodes = 24;

}  // namespace

// ---------------------------------------------------------------------------
// Covariance of G

GCovariance::GCovariance(const ModelSpec& model)
    : alpha_(model.alpha),
      hurst_(model.hurst),
      prefactor_(0.0),
      beta_(0.0),
      variance_constant_(0.0),
      outer_(model.alpha, model.alpha + 2.0 * model.hurst - 2.0),
      inner_(2.0 * model.hurst - 1.0, model.alpha - 1.0) {
  require_valid(model);
  const double g = std::tgamma(alpha_);
  prefactor_ = model.sigma * model.sigma * hurst_ * (2.0 * hurst_ - 1.0) / (g * g);
  beta_ = beta_function(alpha_, 2.0 * hurst_ - 1.0);
  variance_constant_ = prefactor_ * 2.0 * beta_ / (2.0 * (alpha_ + hurst_ - 1.0));

  single_ = gauss_jacobi(kSingleNodes, 2.0 * hurst_ - 1.0, alpha_ - 1.0);
  first_ = gauss_jacobi(kFirstNodes, 0.0, alpha_ - 1.0);
  middle_ = gauss_legendre(kMiddleNodes);
  last_ = gauss_jacobi(kLastNodes, 2.0 * hurst_ - 1.0, 0.0);
}

double GCovariance::variance(double t) const {
  if (t <= 0.0) return 0.0;
  return variance_constant_ * std::pow(t, 2.0 * (alpha_ + hurst_ - 1.0));
}

double GCovariance::operator()(double t, double s) const {
  if (t < s) std::swap(t, s);
  if (s <= 0.0 || prefactor_ == 0.0) return 0.0;
  if (t == s) return variance(t);
  return off_diagonal(t, s);
}

double GCovariance::panel_sum(const QuadratureRule& rule, double lo, double hi, double s,
                              double d, bool weight_left, bool weight_right) const {
  const double half = 0.5 * (hi - lo);
  const double exponent =
      (weight_left ? alpha_ - 1.0 : 0.0) + (weight_right ? 2.0 * hurst_ - 1.0 : 0.0) + 1.0;
  const double tail = s - hi;
  double sum = 0.0;
  for (Index k = 0; k < rule.size(); ++k) {
    const double x = rule.nodes[k];
    const double q = lo + half * (1.0 + x);
    const double s_minus_q = tail + half * (1.0 - x);
    const double c = q + d;
    double f = std::pow(weight_left ? c : q * c, alpha_ - 1.0) * inner_.normalized(s_minus_q / c);
    if (!weight_right) f *= std::pow(s_minus_q, 2.0 * hurst_ - 1.0);
    sum += rule.weights[k] * f;
  }
  return sum * std::pow(half, exponent);
}

double GCovariance::off_diagonal(double t, double s) const {
  const double d = t - s;
  const double analytic = beta_ * std::pow(d, 2.0 * alpha_ + 2.0 * hurst_ - 2.0) * outer_(s / d);

  double numeric = 0.0;
  if (6.0 * d >= s) {
    numeric = panel_sum(single_, 0.0, s, s, d, true, true);
  } else {
    // Panels [0,2d], [b,3b], ..., [b,s] graded towards the near-singularity at q = -d.
    double b = 2.0 * d;
    numeric = panel_sum(first_, 0.0, b, s, d, true, false);
    while (3.0 * b <= 0.5 * s) {
      numeric += panel_sum(middle_, b, 3.0 * b, s, d, false, false);
      b *= 3.0;
    }
    numeric += panel_sum(last_, b, s, s, d, false, true);
  }

  const double value = prefactor_ * (analytic + numeric);
  if (!std::isfinite(value)) {
    throw QuadratureFailure("g_covariance: non-finite value at t=" + std::to_string(t) +
                            ", s=" + std::to_string(s));
  }
  return value;
}

double g_covariance(double t, double s, const ModelSpec& model) {
  if (t < 0.0 || s < 0.0) throw DomainError("g_covariance: times must be nonnegative");
  return GCovariance(model)(t, s);
}

// ---------------------------------------------------------------------------
// Exact sampler

Eigen::MatrixXd g_covariance_matrix(const Grid& grid, const ModelSpec& model) {
  const Index n = grid.n_steps();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  if (model.sigma == 0.0) {
    require_valid(model);
    return cov;
  }
  const GCovariance kernel(model);
  for (Index j = 0; j < n; ++j) {
    const double tj = grid.time(j + 1);
    cov(j, j) = kernel.variance(tj);
    for (Index i = j + 1; i < n; ++i) {
      cov(i, j) = kernel(grid.time(i + 1), tj);
    }
  }
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov;
}

GProcessSampler build_g_sampler(const Grid& grid, const ModelSpec& model) {
  GProcessSampler sampler{grid, model, g_covariance_matrix(grid, model), {}, 0.0};
  const Index n = grid.n_steps();
  if (model.sigma == 0.0) {
    sampler.factor = Eigen::MatrixXd::Zero(n, n);
    return sampler;
  }

  const double max_diag = sampler.covariance.diagonal().maxCoeff();
  for (double rel : {0.0, 1e-14, 1e-12, 1e-10}) {
    sampler.factor = sampler.covariance;
    const double jitter = rel * max_diag;
    if (jitter > 0.0) sampler.factor.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sampler.factor);
    if (llt.info() == Eigen::Success) {
      sampler.factor.triangularView<Eigen::StrictlyUpper>().setZero();
      sampler.jitter_used = jitter;
      return sampler;
    }
  }
  throw NotPositiveDefinite("G covariance is not positive definite at jitter 1e-10*max(diag) (N=" +
                            std::to_string(n) + ")");
}

Eigen::VectorXd sample_g(const GProcessSampler& sampler, const NoiseSeed& seed) {
  NormalStream normals(seed);
  const Eigen::VectorXd z = normals.draw(sampler.size());
  return sampler.factor.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd sample_g_batch(const GProcessSampler& sampler, std::span<const NoiseSeed> seeds) {
  const Index n = sampler.size();
  Eigen::MatrixXd z(n, Index(seeds.size()));
  for (Index c = 0; c < z.cols(); ++c) {
    NormalStream normals(seeds[std::size_t(c)]);
    normals.fill(z.col(c));
  }
  Eigen::MatrixXd out(n, z.cols());
  out.noalias() = sampler.factor.triangularView<Eigen::Lower>() * z;
  return out;
}

Eigen::VectorXd restrict_path(const Eigen::Ref<const Eigen::VectorXd>& fine_path, Index stride) {
  if (stride < 1 || fine_path.size() % stride != 0) {
    throw GridMismatch("path of length " + std::to_string(fine_path.size()) +
                       " cannot be restricted by stride " + std::to_string(stride));
  }
  const Index n = fine_path.size() / stride;
  Eigen::VectorXd coarse(n);
  for (Index i = 0; i < n; ++i) coarse[i] = fine_path[(i + 1) * stride - 1];
  return coarse;
}

// ---------------------------------------------------------------------------
// Fractional Gaussian noise

Eigen::VectorXd sample_fgn(Index n, double stepsize, double hurst, const NoiseSeed& seed) {
  if (n < 1) throw DomainError("sample_fgn: n must be at least 1");
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("sample_fgn: hurst must lie in (0,1)");
  if (!(stepsize > 0.0)) throw DomainError("sample_fgn: stepsize must be positive");

  const double scale = std::pow(stepsize, hurst);
  NormalStream normals(seed);

  Index half = 1;
  while (half < n) half *= 2;
  const Index m = 2 * half;

  std::vector<std::complex<double>> row(std::size_t(m), 0.0);
  for (Index k = 0; k <= half; ++k) row[std::size_t(k)] = fgn_autocovariance(k, hurst);
  for (Index k = 1; k < half; ++k) row[std::size_t(m - k)] = row[std::size_t(k)];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> eig;
  fft.fwd(eig, row);

  double max_eig = 0.0;
  double min_eig = 0.0;
  for (const auto& e : eig) {
    max_eig = std::max(max_eig, e.real());
    min_eig = std::min(min_eig, e.real());
  }

  if (min_eig >= -1e-12 * max_eig) {
    std::vector<std::complex<double>> w(static_cast<std::size_t>(m));
    for (Index k = 0; k < m; ++k) {
      const double lambda = std::max(eig[std::size_t(k)].real(), 0.0);
      const double amp = std::sqrt(lambda / double(m));
      const double re = normals();
      const double im = normals();
      w[std::size_t(k)] = {amp * re, amp * im};
    }
    std::vector<std::complex<double>> x;
    fft.fwd(x, w);
    Eigen::VectorXd out(n);
    for (Index j = 0; j < n; ++j) out[j] = scale * x[std::size_t(j)].real();
    return out;
  }

  Eigen::MatrixXd toeplitz(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) toeplitz(i, j) = fgn_autocovariance(i - j, hurst);
  Eigen::LLT<Eigen::MatrixXd> llt(toeplitz);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("fGn Toeplitz covariance");
  const Eigen::VectorXd z = normals.draw(n);
  Eigen::VectorXd out = llt.matrixL() * z;
  return scale * out;
}

namespace {

// Midpoint kernel values ((m + 1/2) delta)^(alpha-1), m = 0..n_fine-1, scaled by sigma/Gamma(alpha).
Eigen::VectorXd oracle_kernel(const Grid& grid, const ModelSpec& model, Index refinement) {
  const Index n_fine = grid.n_steps() * refinement;
  const double delta = grid.stepsize() / double(refinement);
  const double scale = model.sigma / std::tgamma(model.alpha);
  Eigen::VectorXd kernel(n_fine);
  for (Index m = 0; m < n_fine; ++m) {
    kernel[m] = model.alpha == 1.0 ? scale : scale * std::pow((m + 0.5) * delta, model.alpha - 1.0);
  }
  return kernel;
}

}  // namespace

Eigen::VectorXd sample_g_convolution_oracle(const Grid& grid, const ModelSpec& model,
                                            Index refinement, const NoiseSeed& seed) {
  if (refinement < 1) throw DomainError("oracle refinement must be at least 1");
  require_valid(model);
  const Index n = grid.n_steps();
  const Index n_fine = n * refinement;
  if (model.sigma == 0.0) return Eigen::VectorXd::Zero(n);

  const Eigen::VectorXd increments =
      sample_fgn(n_fine, grid.stepsize() / double(refinement), model.hurst, seed);
  const Eigen::VectorXd reversed = oracle_kernel(grid, model, refinement).reverse();

  Eigen::VectorXd g(n);
  for (Index i = 1; i <= n; ++i) {
    const Index len = i * refinement;
    g[i - 1] = increments.head(len).dot(reversed.segment(n_fine - len, len));
  }
  return g;
}

Eigen::MatrixXd convolution_oracle_covariance(const Grid& grid, const ModelSpec& model,
                                              Index refinement) {
  if (refinement < 1) throw DomainError("oracle refinement must be at least 1");
  require_valid(model);
  const Index n = grid.n_steps();
  const Index n_fine = n * refinement;
  const double delta = grid.stepsize() / double(refinement);

  const Eigen::VectorXd kernel = oracle_kernel(grid, model, refinement);
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(n, n_fine);
  for (Index i = 1; i <= n; ++i) {
    const Index len = i * refinement;
    for (Index k = 0; k < len; ++k) weights(i - 1, k) = kernel[len - 1 - k];
  }
  Eigen::MatrixXd fgn_cov(n_fine, n_fine);
  const double scale = std::pow(delta, 2.0 * model.hurst);
  for (Index i = 0; i < n_fine; ++i)
    for (Index j = 0; j < n_fine; ++j) fgn_cov(i, j) = scale * fgn_autocovariance(i - j, model.hurst);
  return weights * fgn_cov * weights.transpose();
}

// ---------------------------------------------------------------------------
// Factor cache

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'G', 'L', 'E', 'G', 'C', 'F', '1'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), sizeof(T));
}

template <typename T>
bool read_le(std::istream& is, T& value) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&value, bytes.data(), sizeof(T));
  return true;
}

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

std::filesystem::path factor_cache_path(const std::filesystem::path& dir, const Grid& grid,
                                        const ModelSpec& model) {
  std::uint64_t h = splitmix64(std::uint64_t(grid.n_steps()));
  for (double v : {grid.horizon(), model.hurst, model.alpha, model.sigma}) h = splitmix64(h ^ bits_of(v));
  std::ostringstream name;
  name << "gfactor_" << grid.n_steps() << "_" << std::hex << std::setw(16) << std::setfill('0') << h
       << ".bin";
  return dir / name.str();
}

void save_factor(const std::filesystem::path& path, const GProcessSampler& sampler) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write factor cache '" + path.string() + "'");
  os.write(kMagic.data(), kMagic.size());
  write_le(os, kCacheVersion);
  write_le(os, std::uint64_t(sampler.grid.n_steps()));
  write_le(os, sampler.grid.horizon());
  write_le(os, sampler.model.hurst);
  write_le(os, sampler.model.alpha);
  write_le(os, sampler.model.sigma);
  write_le(os, sampler.jitter_used);
  const Index n = sampler.size();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) write_le(os, sampler.factor(i, j));
  if (!os) throw ConfigError("failed writing factor cache '" + path.string() + "'");
}

std::optional<GProcessSampler> load_factor(const std::filesystem::path& path, const Grid& grid,
                                           const ModelSpec& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) return std::nullopt;
  std::uint32_t version = 0;
  std::uint64_t n_steps = 0;
  double horizon = 0, hurst = 0, alpha = 0, sigma = 0, jitter = 0;
  if (!read_le(is, version) || version != kCacheVersion) return std::nullopt;
  if (!read_le(is, n_steps) || !read_le(is, horizon) || !read_le(is, hurst) || !read_le(is, alpha) ||
      !read_le(is, sigma) || !read_le(is, jitter)) {
    return std::nullopt;
  }
  if (n_steps != std::uint64_t(grid.n_steps()) || horizon != grid.horizon() || hurst != model.hurst ||
      alpha != model.alpha || sigma != model.sigma) {
    return std::nullopt;
  }
  GProcessSampler sampler{grid, model, {}, Eigen::MatrixXd::Zero(grid.n_steps(), grid.n_steps()), jitter};
  for (Index i = 0; i < grid.n_steps(); ++i)
    for (Index j = 0; j <= i; ++j)
      if (!read_le(is, sampler.factor(i, j))) return std::nullopt;
  return sampler;
}

GProcessSampler cached_g_sampler(const Grid& grid, const ModelSpec& model,
                                 const std::filesystem::path& cache_dir) {
  if (cache_dir.empty()) return build_g_sampler(grid, model);
  const auto path = factor_cache_path(cache_dir, grid, model);
  if (auto cached = load_factor(path, grid, model)) return std::move(*cached);
  GProcessSampler sampler = build_g_sampler(grid, model);
  std::filesystem::create_directories(cache_dir);
  save_factor(path, sampler);
  return sampler;
}

}  // namespace fgle
