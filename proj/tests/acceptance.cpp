// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "fgle/errors.hpp"
#include "fgle/harness.hpp"
#include "fgle/mlmc.hpp"
#include "fgle/noise.hpp"
#include "fgle/soe.hpp"
#include "fgle/solver.hpp"
#include "fgle/special.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fgle;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  fs::path cache_dir;
  fs::path work_dir = "acceptance";
};

std::string num(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

ModelSpec make_model(double hurst, double alpha, Drift drift, double sigma = 1.0) {
  ModelSpec m;
  m.hurst = hurst;
  m.alpha = alpha;
  m.sigma = sigma;
  m.drift = drift;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome soe_certification(const Settings&) {
  Outcome o{true, ""};
  double worst = 0.0;
  for (double alpha : {0.3, 0.5, 0.8})
    for (double eps : {1e-3, 1e-6}) {
      const SoeApproximation soe = build_soe(alpha, eps, 1e-3, 1.0);
      const double err = certify_soe(soe).max_error;
      worst = std::max(worst, err / eps);
      if (err > eps) o.pass = false;
    }
  // m_exp ~ c (ln N)^p with eps = h^alpha, kappa = h
  std::ostringstream growth;
  bool growth_ok = true;
  for (double alpha : {0.3, 0.5, 0.8}) {
    std::vector<double> ln_n, m;
    for (int k = 4; k <= 12; ++k) {
      const Grid grid(1.0, Index(1) << k);
      ln_n.push_back(std::log(double(grid.n_steps())));
      m.push_back(double(soe_for_grid(alpha, grid).m_exp()));
    }
    // regression of m on (ln N)^2 and of ln m on ln ln N
    std::vector<double> sq;
    for (double x : ln_n) sq.push_back(x * x);
    const double n = double(sq.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
      mx += sq[i] / n;
      my += m[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
      sxy += (sq[i] - mx) * (m[i] - my);
      sxx += (sq[i] - mx) * (sq[i] - mx);
      syy += (m[i] - my) * (m[i] - my);
    }
    const double r2 = sxy * sxy / (sxx * syy);
    const RateFit p = fit_rate(ln_n, m);
    if (!(p.slope <= 2.5) || !(r2 >= 0.9)) growth_ok = false;
    growth << " a=" << alpha << ":m=" << m.front() << ".." << m.back() << ",p=" << num(p.slope, 3)
           << ",R2=" << num(r2, 4);
  }
  o.pass = o.pass && growth_ok;
  o.detail = "max err/eps=" + num(worst) + growth.str();
  return o;
}

Outcome noise_cross_validation(const Settings&) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sigma = 1.3;
  double fbm_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double hurst = 0.51 + 0.48 * u(rng);
    const double t = 2 * u(rng), s = 2 * u(rng);
    const double exact = sigma * sigma * fbm_covariance(t, s, hurst);
    fbm_gap = std::max(fbm_gap, std::abs(g_covariance(t, s, make_model(hurst, 1.0, Drift::zero(), sigma)) - exact));
  }
  const bool fbm_ok = fbm_gap <= 1e-8;

  const ModelSpec m = make_model(0.75, 0.75, Drift::zero());
  const Grid grid(1.0, 2);
  const Index samples = 100000;
  double s11 = 0, s1h = 0, q11 = 0, q1h = 0;
  for (Index k = 0; k < samples; ++k) {
    const Eigen::VectorXd g = sample_g_convolution_oracle(grid, m, 64, NoiseSeed{7, 0, k, StreamRole::Oracle});
    const double a = g[1] * g[1], b = g[1] * g[0];
    s11 += a;
    s1h += b;
    q11 += a * a;
    q1h += b * b;
  }
  const double n = double(samples);
  const double e11 = s11 / n, e1h = s1h / n;
  const double se11 = std::sqrt((q11 / n - e11 * e11) / n), se1h = std::sqrt((q1h / n - e1h * e1h) / n);
  const double c11 = g_covariance(1.0, 1.0, m), c1h = g_covariance(1.0, 0.5, m);
  const bool oracle_ok = std::abs(e11 - c11) <= 3 * se11 + 0.02 * c11 && std::abs(e1h - c1h) <= 3 * se1h + 0.02 * c1h;

  double lo = INFINITY, hi = 0;
  for (int i = 1; i <= 10; ++i) {
    const double t = 0.1 * i;
    const double r = g_covariance(t, t, m) / std::pow(t, 2 * (m.alpha + m.hurst - 1));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double spread = (hi - lo) / lo;
  const bool self_ok = spread <= 1e-6;

  return {fbm_ok && oracle_ok && self_ok,
          "fbm max gap=" + num(fbm_gap) + " oracle C(1,1)=" + num(e11, 6) + "+-" + num(se11, 2) + " vs " +
              num(c11, 6) + ", C(1,.5)=" + num(e1h, 6) + "+-" + num(se1h, 2) + " vs " + num(c1h, 6) +
              " self-similar spread=" + num(spread, 3)};
}

Outcome euler_strong_order(const Settings& s) {
  struct Case {
    double hurst, alpha;
  };
  bool pass = true;
  std::ostringstream d;
  StrongOrderOptions opt;
  opt.reference_refinement = 3;
  opt.cache_dir = s.cache_dir;
  for (const Case c : {Case{0.75, 0.4}, Case{0.6, 0.9}, Case{0.7, 0.6}}) {
    const StrongOrderReport r = strong_order_study(make_model(c.hurst, c.alpha, Drift::cosine()), 4, 9, 1000,
                                                  NoiseSeed{11}, opt);
    const double slope = r.fit ? r.fit->slope : 0.0;
    const bool ok = r.fit && std::abs(slope - r.theoretical.exponent) <= 0.15;
    pass = pass && ok;
    d << " (H=" << c.hurst << ",a=" << c.alpha << ") slope=" << num(slope) << "+-"
      << num(r.fit ? r.fit->std_error : 0.0, 2) << " theory=" << num(r.theoretical.exponent)
      << (ok ? " ok" : " out-of-band");
    if (r.log_fit) d << " log-fit=" << num(r.log_fit->slope);
  }
  return {pass, d.str().substr(1)};
}

Outcome deterministic_oracle(const Settings&) {
  ModelSpec m = make_model(0.75, 0.5, Drift::linear(-1.0), 0.0);
  m.x0 = 1.0;
  const Index n = 4096;
  const double x = euler_solve(m, Grid(1.0, n), Eigen::VectorXd::Zero(n)).endpoint();
  const double ml = mittag_leffler(0.5, 1.0, -1.0);
  const double e = mittag_leffler(1.0, 1.0, 1.0);
  const bool pass = std::abs(x - 0.4275836) <= 5e-3 && std::abs(e - std::exp(1.0)) <= 1e-10 &&
                    std::abs(ml - 0.4275836) <= 5e-8;
  return {pass, "x(1)=" + num(x, 7) + " E_1/2(-1)=" + num(ml, 8) + " |E_1(1)-e|=" + num(std::abs(e - std::exp(1.0)), 2)};
}

Outcome fast_agreement(const Settings& s) {
  const Grid grid(1.0, 1024);
  const std::vector<double> tol = {1e-2, 1e-3, 1e-4};
  const AgreementReport r =
      fast_agreement_sweep(make_model(0.7, 0.6, Drift::cosine()), grid, tol, NoiseSeed{5}, s.cache_dir);
  const AgreementReport z =
      fast_agreement_sweep(make_model(0.7, 0.6, Drift::zero()), grid, tol, NoiseSeed{5}, s.cache_dir);
  bool zero = true;
  for (const auto& row : z.rows) zero = zero && row.max_path_gap == 0.0;
  std::ostringstream d;
  for (const auto& row : r.rows) d << "eps=" << row.tolerance << ":gap=" << num(row.max_path_gap, 3) << ",m=" << row.m_exp << " ";
  d << "spread=" << num(r.ratio_spread, 3) << " nonincreasing=" << r.nonincreasing << " zero-drift gap 0=" << zero;
  return {r.nonincreasing && r.ratio_spread <= 10.0 && zero, d.str()};
}

Outcome mlmc_accuracy(const Settings& s) {
  const ModelSpec m = make_model(0.6, 0.8, Drift::cosine());
  CompareOptions opt;
  opt.reference_steps = 2048;
  opt.reference_samples = 100000;
  opt.mlmc.cache_dir = s.cache_dir;
  const CompareReport r = mc_mlmc_compare(m, Payoff::identity(), {0.1, 0.05}, NoiseSeed{2718}, opt);

  bool pass = r.reference_std_error <= 0.05 / 3;
  std::ostringstream d;
  d << "reference=" << num(r.reference, 6) << "+-" << num(r.reference_std_error, 2);
  for (const CompareRow& row : r.rows) {
    pass = pass && row.mlmc_error <= row.accuracy;
    d << " eps=" << row.accuracy << ":L=" << row.levels << ",|Z-ref|=" << num(row.mlmc_error, 3)
      << ",cost " << num(row.mlmc_cost, 3) << " vs MC " << num(row.mc_cost, 3);
  }
  const CompareRow& last = r.rows.back();
  std::vector<double> h, v;
  for (const LevelStats& l : last.mlmc.per_level) {
    if (l.level == 0) continue;
    h.push_back(l.stepsize);
    v.push_back(l.variance_correction);
  }
  const RateFit decay = fit_rate(h, v);
  pass = pass && decay.slope >= 1.2 && last.mlmc_cost < last.mc_cost;
  d << " variance decay=" << num(decay.slope);
  return {pass, d.str()};
}

Outcome level_sum_bounds(const Settings&) {
  bool pass = true;
  std::ostringstream d;
  for (double gamma : {0.5, 0.0, -0.5}) {
    const LevelSumCheck c = check_level_sum(2.0, gamma, 2, 5, 15);
    pass = pass && c.bounded && c.max_step_variation < 0.1;
    d << " gamma=" << gamma << ":C_L=" << num(c.ratios.front()) << ".." << num(c.ratios.back())
      << ",bound=" << num(c.bound_constant) << ",step var=" << num(c.max_step_variation, 3);
  }
  return {pass, d.str().substr(1)};
}

Outcome reproducibility(const Settings& s) {
  std::vector<std::pair<RunConfig, std::vector<std::string>>> runs;
  RunConfig so;
  so.experiment = Experiment::StrongOrder;
  so.model = make_model(0.7, 0.6, Drift::cosine());
  so.k_min = 3;
  so.k_max = 6;
  so.samples = 200;
  so.master_seed = 31;
  runs.push_back({so, {"errors.csv", "report.json"}});
  RunConfig ml;
  ml.experiment = Experiment::Mlmc;
  ml.model = make_model(0.6, 0.8, Drift::cosine());
  ml.accuracies = {0.2};
  ml.master_seed = 32;
  runs.push_back({ml, {"mlmc.csv", "report.json"}});

  bool pass = true;
  std::ostringstream d;
  for (auto& [config, files] : runs) {
    config.cache_dir = s.cache_dir;
    const fs::path base = s.work_dir / ("repro_" + experiment_name(config.experiment));
    for (const char* run : {"a", "b"}) {
      config.out_dir = base / run;
      fs::remove_all(config.out_dir);
      run_experiment(config);
    }
    for (const std::string& f : files) {
      const std::string a = slurp(base / "a" / f), b = slurp(base / "b" / f);
      const bool same = !a.empty() && a == b;
      pass = pass && same;
      d << experiment_name(config.experiment) << "/" << f << (same ? " identical " : " DIFFERS ");
    }
  }
  return {pass, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Settings settings;
  std::vector<int> only;
  app.add_option("--cache-dir", settings.cache_dir, "covariance factor cache");
  app.add_option("--work-dir", settings.work_dir, "scratch directory for experiment outputs");
  app.add_option("--only", only, "criterion numbers to run");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(settings.work_dir);
  if (!settings.cache_dir.empty()) fs::create_directories(settings.cache_dir);

  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome(const Settings&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "soe-certification", 60, soe_certification},
      {2, "noise-cross-validation", 300, noise_cross_validation},
      {3, "euler-strong-order", 1800, euler_strong_order},
      {4, "deterministic-oracle", 1, deterministic_oracle},
      {5, "fast-euler-agreement", 60, fast_agreement},
      {6, "mlmc-accuracy-and-cost", 3600, mlmc_accuracy},
      {7, "level-sum-bounds", 1, level_sum_bounds},
      {8, "reproducibility", 600, reproducibility},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(settings);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail << " ["
              << num(secs, 3) << " s" << (in_time ? "" : ", over budget " + num(c.budget_seconds, 4) + " s") << "]"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
