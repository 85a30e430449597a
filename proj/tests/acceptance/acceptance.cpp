// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: madm_acceptance <criterion 1-9 | all> [path to the madm CLI]
// Expected values are computed here from closed forms, independently of the
// library code paths they check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "madm/app/experiments.hpp"
#include "madm/diagnostics.hpp"
#include "madm/error.hpp"
#include "madm/sampler.hpp"

namespace fs = std::filesystem;
using namespace madm;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

constexpr double kLog2Pi = 1.8378770664093453;

double normal_logpdf(const Vector& y, const Vector& mean, double var) {
  const double d = static_cast<double>(y.size());
  return -0.5 * (y - mean).squaredNorm() / var - 0.5 * d * (kLog2Pi + std::log(var));
}

// VP with linear beta(t) on [0, 1]: log r^2 = -(b0 t + (b1 - b0) t^2 / 2),
// conditional variance r^2 sigma^2 = 1 - r^2.
struct VpParams {
  double r;
  double var;
};

VpParams vp_params(double t, double b0 = 0.1, double b1 = 20.0) {
  const double log_r2 = -(b0 * t + 0.5 * (b1 - b0) * t * t);
  return {std::exp(0.5 * log_r2), -std::expm1(log_r2)};
}

double mixture_logpdf(const Vector& y, const Matrix& centres, double t) {
  const auto [r, var] = vp_params(t);
  std::vector<double> terms;
  for (Index j = 0; j < centres.cols(); ++j) terms.push_back(normal_logpdf(y, r * centres.col(j), var));
  const double m = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - m);
  return m + std::log(sum) - std::log(static_cast<double>(centres.cols()));
}

// log q(to | from) for the Langevin proposal N(from + h s(from) / 2, h I).
double langevin_logq(const Vector& to, const Vector& from, const Vector& score_from, double h) {
  return normal_logpdf(to, from + 0.5 * h * score_from, h);
}

double independent_log_h(const LangevinProposal& p) {
  return langevin_logq(p.x, p.x_new, p.score_new, p.h) - langevin_logq(p.x_new, p.x, p.score_x, p.h);
}

double quartic_logp(double x, double eps) { return -x * x * x * x / 4.0 - eps * std::cos(x); }

// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------

Verdict criterion1() {
  constexpr std::size_t n = 1'000'000;
  constexpr double C = 1.0;
  ScoreOracle oracle = gaussian_oracle(Vector::Zero(1), 1.0);
  const auto p = make_proposal(vec({0.0}), vec({1.0}), oracle, 0.0, 0.5);
  const double r = std::exp(normal_logpdf(vec({1.0}), vec({0.0}), 1.0) - normal_logpdf(vec({0.0}), vec({0.0}), 1.0));
  Rng rng(11, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(C) * poisson_product_W(p, oracle, C, rng);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
  const double gap = std::abs(mean - r);
  return {gap <= 4.0 * se, fmt("e^C E[W] = %.6f vs r = %.6f, |gap| = %.2e, 4 sigma = %.2e", mean, r, gap, 4 * se)};
}

Verdict criterion2() {
  constexpr std::size_t configs = 20;
  constexpr std::size_t n = 100'000;
  constexpr double max_expected_rounds = 50.0;
  Rng setup(22, 0);
  bool pass = true;
  double worst = 0.0;
  std::size_t mixtures = 0;
  for (std::size_t c = 0; c < configs; ++c) {
    const bool mixture = c % 2 == 1;
    const Index dim = 1 + static_cast<Index>(c / 2 % 2);
    for (;;) {
      ScoreModelPtr model;
      BoundSpec bound;
      double t = 0.0;
      Matrix centres(dim, 3);
      Vector mean;
      double var = 1.0;
      if (mixture) {
        for (Index j = 0; j < 3; ++j) centres.col(j) = 1.5 * setup.normal_vector(dim);
        t = 0.2 + 0.3 * setup.uniform();
        model = diffused_empirical_model(centres, NoiseSchedule::vp_continuous(0.1, 20.0));
        bound.strategy = BoundStrategy::BoundedDenoiser;
      } else {
        mean = setup.normal_vector(dim);
        var = 0.5 + setup.uniform();
        model = gaussian_model(mean, var);
        bound.strategy = BoundStrategy::AffineEndpoint;
      }
      ScoreOracle oracle(model);
      const double h = 0.05 + 0.45 * setup.uniform();
      const auto p = ula_propose(0.5 * setup.normal_vector(dim), oracle, t, h, setup);
      const double log_r = mixture ? mixture_logpdf(p.x_new, centres, t) - mixture_logpdf(p.x, centres, t)
                                   : normal_logpdf(p.x_new, mean, var) - normal_logpdf(p.x, mean, var);
      const double log_h = independent_log_h(p);
      const double C = bound_C(p, bound, oracle);
      const double rounds = (1.0 + std::exp(log_h + C)) / (1.0 + std::exp(log_h + log_r));
      if (rounds > max_expected_rounds) continue;
      const double expected = 1.0 / (1.0 + std::exp(-(log_h + log_r)));
      Rng rng(22, 1 + c);
      TwoCoinOptions options;
      options.max_rounds = 10'000'000;
      options.lazy_product = c % 4 >= 2;
      std::size_t accepted = 0;
      for (std::size_t i = 0; i < n; ++i) accepted += two_coin_decision(p, oracle, C, rng, options).accepted();
      const double freq = static_cast<double>(accepted) / n;
      const double z = (freq - expected) / std::sqrt(expected * (1.0 - expected) / n);
      worst = std::max(worst, std::abs(z));
      pass = pass && std::abs(z) <= 3.0;
      mixtures += mixture;
      break;
    }
  }
  return {pass, fmt("%zu configurations (%zu mixtures), %zu decisions each, max |z| = %.2f (limit 3)", configs,
                    mixtures, n, worst)};
}

Verdict criterion3() {
  constexpr std::size_t n = 1'000'000;
  constexpr double C = 1.0;
  const double r = std::exp(-0.5);  // integral of f(u) = -u over [0, 1]
  const double H = 1.0;
  const double want_rounds = (1.0 + H * std::exp(C)) / (1.0 + H * r);
  const double want_queries = 2.0 * C * H * std::exp(C) / (1.0 + H * r);
  Rng rng(33, 0);
  double rounds = 0.0, queries = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = two_coin_decide(0.0, C, [](double u) { return -u; }, rng);
    rounds += static_cast<double>(d.rounds);
    queries += static_cast<double>(d.score_queries);
  }
  rounds /= n;
  queries /= n;
  const double er = std::abs(rounds / want_rounds - 1.0);
  const double eq = std::abs(queries / want_queries - 1.0);
  return {er <= 0.02 && eq <= 0.02,
          fmt("rounds %.4f vs %.4f (%.2f%%), queries %.4f vs %.5f (%.2f%%)", rounds, want_rounds, 100 * er, queries,
              want_queries, 100 * eq)};
}

Verdict criterion4() {
  constexpr double h = 0.5;
  // AR(1): x' = (1 - h/2) x + sqrt(h) z has stationary variance h / (1 - (1 - h/2)^2).
  const double a = 1.0 - h / 2.0;
  const double ula_fixed_point = h / (1.0 - a * a);
  struct Arm {
    const char* name;
    CorrectorKind kind;
    std::size_t steps;
    double target;
  };
  const std::array<Arm, 4> arms = {{{"ula", CorrectorKind::Ula, 1'000'000, ula_fixed_point},
                                    {"two-coin", CorrectorKind::TwoCoin, 50'000, 1.0},
                                    {"oracle-mh", CorrectorKind::OracleMh, 1'000'000, 1.0},
                                    {"simpson13", CorrectorKind::Quadrature, 1'000'000, 1.0}}};
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const auto& arm = arms[i];
    CorrectorSpec spec;
    spec.kind = arm.kind;
    spec.rule = QuadratureRule::simpson13();
    spec.bound.strategy = BoundStrategy::AffineEndpoint;
    spec.two_coin.max_rounds = 100'000'000;
    spec.two_coin.lazy_product = true;
    ScoreOracle oracle = gaussian_oracle(Vector::Zero(1), 1.0);
    Rng rng(44, i);
    std::string line;
    bool ok = false;
    try {
      const auto chain = run_corrector_chain(oracle, spec, 0.0, h, Vector::Zero(1), arm.steps, arm.steps / 10, rng);
      const auto v = stationary_variance(chain.trace, 50);
      const double z = (v.mean - arm.target) / v.standard_error;
      ok = std::abs(z) <= 3.0;
      line = fmt("%s %.4f+-%.4f (want %.5f, z %.2f)", arm.name, v.mean, v.standard_error, arm.target, z);
    } catch (const NonTerminationError& e) {
      line = fmt("%s did not terminate: %s", arm.name, e.what());
    }
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + line;
  }
  return {pass, detail};
}

Verdict criterion5() {
  constexpr double eps = 0.1;
  constexpr std::size_t proposals = 1000;
  auto model = quartic_model(1.0, eps);
  // Exact draws from exp(-x^4/4 - eps cos x) by rejection from N(0, 1).
  auto draw = [&](Rng& rng) {
    for (;;) {
      const double x = rng.normal();
      if (std::log(rng.uniform()) <= quartic_logp(x, eps) + 0.5 * x * x - 0.25 - eps) return x;
    }
  };
  const std::array<std::pair<const char*, double>, 3> rules = {
      {{"trapezoid", 1.5}, {"simpson13", 2.5}, {"simpson38", 2.5}}};
  bool pass = true;
  std::string detail;
  for (const auto& [name, order] : rules) {
    const auto rule = quadrature_rule_from_string(name);
    std::vector<double> hs, errs;
    for (int k = 3; k <= 9; ++k) {
      const double h = std::ldexp(1.0, -k);
      ScoreOracle oracle(model);
      Rng rng(55, static_cast<std::uint64_t>(k));
      double total = 0.0;
      for (std::size_t i = 0; i < proposals; ++i) {
        const auto p = ula_propose(vec({draw(rng)}), oracle, 0.0, h, rng);
        total += std::abs(quadrature_log_ratio(p, oracle, rule) - (quartic_logp(p.x_new(0), eps) - quartic_logp(p.x(0), eps)));
      }
      hs.push_back(h);
      errs.push_back(total / proposals);
    }
    const double slope = loglog_slope(hs, errs);
    const double tol = order < 2.0 ? 0.15 : 0.2;
    pass = pass && std::abs(slope - order) <= tol;
    detail += fmt("%s%s %.3f (want %.1f+-%.2f)", detail.empty() ? "" : ", ", name, slope, order, tol);
  }
  return {pass, detail};
}

// E[logistic(W)], W ~ N(-s^2/2, s^2), by composite Simpson over +-12 sd.
double barker_limit_simpson(double ell) {
  const double s2 = std::pow(ell, 6) / 16.0, s = std::sqrt(s2);
  const int panels = 20000;
  const double lo = -0.5 * s2 - 12 * s, hi = -0.5 * s2 + 12 * s, step = (hi - lo) / panels;
  double sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double w = lo + i * step;
    const double dens = std::exp(-0.5 * std::pow((w + 0.5 * s2) / s, 2)) / (s * std::sqrt(2 * std::numbers::pi));
    const double weight = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += weight * dens / (1.0 + std::exp(-w));
  }
  return sum * step / 3.0;
}

Verdict criterion6() {
  const double ell = maximise_efficiency(0.5, 3.5);
  const double a_star = barker_limit_A(ell);
  const double a_check = barker_limit_simpson(ell);
  const bool limit_ok = std::abs(a_star - 0.347) <= 0.002 && std::abs(a_star - a_check) <= 1e-8;
  std::string detail = fmt("l* = %.5f, A(l*) = %.6f (independent quadrature %.6f)", ell, a_star, a_check);

  constexpr std::size_t dim = 1000;
  const double h = ell * ell / std::cbrt(static_cast<double>(dim));
  ScoreOracle oracle = gaussian_oracle(Vector::Zero(dim), 1.0);
  Rng rng(66, 0);
  const auto p = ula_propose(rng.normal_vector(dim), oracle, 0.0, h, rng);
  const double C = bound_C(p, {BoundStrategy::AffineEndpoint, {}}, oracle);
  const double log_r = normal_logpdf(p.x_new, Vector::Zero(dim), 1.0) - normal_logpdf(p.x, Vector::Zero(dim), 1.0);
  const double log_h = independent_log_h(p);
  const double log10_rounds = (std::log1p(std::exp(log_h + C)) - std::log1p(std::exp(log_h + log_r))) / std::log(10.0);
  bool empirical_ok = false;
  try {
    const auto point = empirical_scaling(dim, ell, 2000, ScalingDecision::TwoCoin, 66, 10'000'000);
    empirical_ok = std::abs(point.acceptance - 0.347) <= 0.02;
    detail += fmt("; two-coin acceptance at d=%zu: %.4f", dim, point.acceptance);
  } catch (const NonTerminationError& e) {
    detail += fmt("; two-coin at d=%zu, h=%.4f: no decision within %llu rounds (first proposal C = %.1f, "
                  "expected rounds 10^%.1f)",
                  dim, h, e.rounds(), C, log10_rounds);
  }
  const auto barker = empirical_scaling(dim, ell, 20000, ScalingDecision::Barker, 66);
  detail += fmt("; exact-ratio Barker acceptance %.4f+-%.4f", barker.acceptance, barker.acceptance_se);
  return {limit_ok && empirical_ok, detail};
}

// Nearest-neighbour distances by exhaustive search.
std::vector<double> brute_distances(const Matrix& samples, const Matrix& reference) {
  std::vector<double> out;
  for (Index i = 0; i < samples.cols(); ++i) {
    double best = INFINITY;
    for (Index j = 0; j < reference.cols(); ++j) best = std::min(best, (samples.col(i) - reference.col(j)).squaredNorm());
    out.push_back(std::sqrt(best));
  }
  return out;
}

Verdict criterion7() {
  const Config cfg = Config::preset("fig1-checkerboard");
  const auto results = app::run_pc_arms(cfg);
  const Matrix reference =
      generate_dataset("checkerboard", cfg.get_u64("metrics.reference_size"), cfg.get_u64("metrics.reference_seed")).points;
  double q_ula = 0, q_madm = 0, m_ula = 0, m_madm = 0;
  for (const auto& r : results) {
    auto d = brute_distances(r.report.samples, reference);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    std::sort(d.begin(), d.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(d.size())));
    const double q = d[rank - 1];
    if (r.arm == "ula") q_ula = q, m_ula = mean;
    if (r.arm == "hybrid") q_madm = q, m_madm = mean;
  }
  const double improvement = 1.0 - m_madm / m_ula;
  return {q_madm < q_ula && improvement >= 0.25,
          fmt("%s samples; 95%% containment ULA %.4f, MADM %.4f; mean distance ULA %.4f, MADM %.4f (%.1f%% better)",
              cfg.get("run.chains").c_str(), q_ula, q_madm, m_ula, m_madm, 100 * improvement)};
}

Verdict criterion8() {
  constexpr std::size_t pairs = 100;
  constexpr double tol = 1e-8;
  const auto rule = QuadratureRule::composite(QuadratureRule::simpson13(), 10'000);
  Matrix centres(2, 3);
  centres << -1.0, 0.5, 1.2, 0.3, -0.8, 1.0;
  const Vector g_mean = vec({0.3, -0.4, 1.0});
  const Vector d_mean = vec({1.0, -0.5});
  const double d_var = 0.2;
  struct Target {
    const char* name;
    ScoreModelPtr model;
    double t;
    std::function<double(const Vector&)> logp;
  };
  const std::vector<Target> targets = {
      {"gaussian", gaussian_model(g_mean, 0.7), 0.0, [&](const Vector& y) { return normal_logpdf(y, g_mean, 0.7); }},
      {"quartic", quartic_model(1.0, 0.1), 0.0, [](const Vector& y) { return quartic_logp(y(0), 0.1); }},
      {"diffused-gaussian", diffused_gaussian_model(d_mean, d_var, NoiseSchedule::vp_continuous(0.1, 20.0)), 0.3,
       [&](const Vector& y) {
         const auto [r, var] = vp_params(0.3);
         return normal_logpdf(y, r * d_mean, r * r * d_var + var);
       }},
      {"mixture", diffused_empirical_model(centres, NoiseSchedule::vp_continuous(0.1, 20.0)), 0.1,
       [&](const Vector& y) { return mixture_logpdf(y, centres, 0.1); }},
  };
  bool pass = true;
  std::string detail;
  Rng rng(88, 0);
  for (const auto& target : targets) {
    if (!target.model->has_log_density()) continue;
    ScoreOracle oracle(target.model);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const auto p = ula_propose(rng.normal_vector(target.model->dim()), oracle, target.t, 0.01 + rng.uniform(), rng);
      worst = std::max(worst, std::abs(quadrature_log_ratio(p, oracle, rule) - (target.logp(p.x_new) - target.logp(p.x))));
    }
    pass = pass && worst <= tol;
    detail += fmt("%s%s %.1e", detail.empty() ? "max error: " : ", ", target.name, worst);
  }
  return {pass, detail + fmt(" (limit %.0e)", tol)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Verdict criterion9(const std::string& cli) {
  if (cli.empty()) return {false, "path to the madm CLI not given"};
  // Sizes are reduced so that every preset runs twice within the test budget.
  const std::vector<std::pair<std::string, std::string>> presets = {
      {"fig1-checkerboard", "--set run.chains=200"},
      {"spiral", "--set run.chains=40"},
      {"funnel", "--set run.chains=40"},
      {"sierpinski", "--set run.chains=40"},
      {"pinwheel", "--set run.chains=40"},
      {"gaussian-bias", "--set stationary.steps=20000 --set stationary.two_coin_steps=5000"},
      {"scaling", "--set scaling.proposals=2000"},
      {"quad-order", "--set quad.proposals=200"},
  };
  const fs::path root = fs::temp_directory_path() / ("madm_determinism_" + std::to_string(::getpid()));
  bool pass = true;
  std::size_t files = 0;
  std::string failures;
  for (const auto& [preset, extra] : presets) {
    std::array<fs::path, 2> dirs = {root / preset / "a", root / preset / "b"};
    for (const auto& dir : dirs) {
      const std::string cmd = "\"" + cli + "\" sample --preset " + preset + " --threads 1 --seed 7 " + extra +
                              " --out \"" + dir.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        failures += " " + preset + "(exit)";
      }
    }
    const auto a = csv_files(dirs[0]);
    const auto b = csv_files(dirs[1]);
    bool same = !a.empty() && a == b;
    for (std::size_t i = 0; same && i < a.size(); ++i) same = slurp(dirs[0] / a[i]) == slurp(dirs[1] / a[i]);
    if (!same) failures += " " + preset;
    pass = pass && same;
    files += a.size();
  }
  fs::remove_all(root);
  return {pass, fmt("%zu presets, %zu CSV files compared byte for byte%s%s", presets.size(), files,
                    failures.empty() ? "" : "; differing:", failures.c_str())};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  const std::string cli = argc > 2 ? argv[2] : "";
  const std::vector<Criterion> criteria = {
      {1, "poisson-product estimator unbiased", 30, criterion1},
      {2, "two-coin acceptance equals Barker", 120, criterion2},
      {3, "two-coin rounds and queries", 120, criterion3},
      {4, "bias removal on N(0,1)", 60, criterion4},
      {5, "quadrature error orders", 60, criterion5},
      {6, "optimal scaling acceptance", 300, criterion6},
      {7, "checkerboard containment", 600, criterion7},
      {8, "line-integral identity", 10, criterion8},
      {9, "deterministic presets", 1e9, [&] { return criterion9(cli); }},
  };
  bool all_pass = true;
  bool ran = false;
  for (const auto& c : criteria) {
    if (which != "all" && which != std::to_string(c.id)) continue;
    ran = true;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_seconds < 1e8) {
      timing += fmt(" of %.0f s", c.budget_seconds);
      if (secs > c.budget_seconds) v.pass = false;
    }
    std::printf("%s %d %s: %s [%s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s' (expected 1-9 or all)\n", which.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
