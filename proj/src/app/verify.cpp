#include "madm/app/verify.hpp"

#include <cmath>
#include <optional>

#include "madm/app/experiments.hpp"
#include "madm/diagnostics.hpp"
#include "madm/error.hpp"
#include "madm/sampler.hpp"

namespace madm::app {

namespace {

using json = nlohmann::json;

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

json lemma1(std::uint64_t seed) {
  constexpr std::size_t n = 1'000'000;
  constexpr double C = 1.0;
  ScoreOracle oracle = gaussian_oracle(Vector::Zero(1), 1.0);
  const auto p = make_proposal(vec({0.0}), vec({1.0}), oracle, 0.0, 0.5);
  Rng rng(seed, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(C) * poisson_product_W(p, oracle, C, rng);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
  const double r = std::exp(-0.5);
  const double gap = std::abs(mean - r);
  return {{"suite", "lemma1"}, {"pass", gap <= 4.0 * se}, {"draws", n},      {"estimate", mean},
          {"expected", r},     {"abs_error", gap},          {"ci_half_width", 4.0 * se}};
}

constexpr double kMaxExpectedRounds = 50.0;

json two_coin_exactness(std::uint64_t seed) {
  constexpr std::size_t configs = 20;
  constexpr std::size_t n = 100'000;
  Rng setup(seed, 1000);
  json rows = json::array();
  bool pass = true;
  for (std::size_t c = 0; c < configs; ++c) {
    const bool mixture = c % 2 == 1;
    const Index dim = 1 + static_cast<Index>(c % 4) / 2;
    // Redraw until the expected round count is moderate so the suite stays cheap.
    ScoreModelPtr model;
    BoundSpec bound;
    std::optional<LangevinProposal> proposal;
    double h = 0.0, C = 0.0;
    for (;;) {
      double t = 0.0;
      if (mixture) {
        Matrix centres(dim, 3);
        for (Index j = 0; j < 3; ++j) centres.col(j) = 1.5 * setup.normal_vector(dim);
        model = diffused_empirical_model(centres, NoiseSchedule::vp_continuous());
        t = 0.2 + 0.3 * setup.uniform();
        bound.strategy = BoundStrategy::BoundedDenoiser;
      } else {
        model = gaussian_model(setup.normal_vector(dim), 0.5 + setup.uniform());
        bound.strategy = BoundStrategy::AffineEndpoint;
      }
      ScoreOracle probe(model);
      h = 0.05 + 0.45 * setup.uniform();
      proposal = ula_propose(0.5 * setup.normal_vector(dim), probe, t, h, setup);
      C = bound_C(*proposal, bound, probe);
      const double log_h = log_H(*proposal);
      const double log_r = exact_log_acceptance_ratio(*proposal, probe) - log_h;
      if (expected_rounds(C, std::exp(log_h), std::exp(log_r)) <= kMaxExpectedRounds) break;
    }
    ScoreOracle oracle(model);
    const auto& p = *proposal;
    const double expected = barker_acceptance(exact_log_acceptance_ratio(p, oracle));
    Rng rng(seed, c);
    TwoCoinOptions options;
    options.max_rounds = 10'000'000;
    options.lazy_product = c % 4 >= 2;
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < n; ++i) accepted += two_coin_decision(p, oracle, C, rng, options).accepted();
    const double freq = static_cast<double>(accepted) / n;
    const double sd = std::sqrt(expected * (1.0 - expected) / n);
    const bool ok = std::abs(freq - expected) <= 3.0 * sd;
    pass = pass && ok;
    rows.push_back({{"target", mixture ? "mixture3" : "gaussian"},
                    {"dim", dim},
                    {"h", h},
                    {"C", C},
                    {"lazy_product", options.lazy_product},
                    {"frequency", freq},
                    {"expected", expected},
                    {"z", (freq - expected) / sd},
                    {"pass", ok}});
  }
  return {{"suite", "two-coin-exactness"}, {"pass", pass}, {"decisions_per_config", n}, {"configs", rows}};
}

json prop2_queries(std::uint64_t seed) {
  constexpr std::size_t n = 1'000'000;
  constexpr double C = 1.0;
  const double r = std::exp(-0.5);
  const Integrand f = [](double u) { return -u; };
  Rng rng(seed, 0);
  double rounds = 0.0, queries = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = two_coin_decide(0.0, C, f, rng);
    rounds += static_cast<double>(d.rounds);
    queries += static_cast<double>(d.score_queries);
  }
  rounds /= n;
  queries /= n;
  const double er = expected_rounds(C, 1.0, r);
  const double eq = expected_queries(C, 1.0, r);
  const double rel_r = std::abs(rounds / er - 1.0);
  const double rel_q = std::abs(queries / eq - 1.0);
  return {{"suite", "prop2-queries"},  {"pass", rel_r <= 0.02 && rel_q <= 0.02},
          {"decisions", n},            {"mean_rounds", rounds},
          {"expected_rounds", er},     {"mean_queries", queries},
          {"expected_queries", eq},    {"relative_error_rounds", rel_r},
          {"relative_error_queries", rel_q}};
}

json quad_order(std::uint64_t seed) {
  Config cfg = Config::preset("quad-order");
  cfg.set("run.seed", std::to_string(seed));
  const auto result = run_quad_order(cfg);
  bool pass = true;
  json fits = json::object();
  for (const auto& [rule, fit] : result.fits) {
    const double target = rule == "trapezoid" ? 1.5 : 2.5;
    const double tol = rule == "trapezoid" ? 0.15 : 0.2;
    const bool ok = std::abs(fit.slope - target) <= tol;
    pass = pass && ok;
    fits[rule] = {{"slope", fit.slope}, {"expected", target}, {"tolerance", tol}, {"pass", ok}};
  }
  return {{"suite", "quad-order"}, {"pass", pass}, {"fits", fits}};
}

json ula_bias(std::uint64_t seed) {
  Config cfg = Config::preset("gaussian-bias");
  cfg.set("run.seed", std::to_string(seed));
  const auto results = run_stationary_arms(cfg);
  const double ula_target = ula_gaussian_variance(0.5, 1.0);
  bool pass = true;
  json arms = json::array();
  for (const auto& r : results) {
    const double target = r.arm == "ula" ? ula_target : 1.0;
    const double z = (r.variance.mean - target) / r.variance.standard_error;
    const bool ok = std::abs(z) <= 3.0;
    pass = pass && ok;
    arms.push_back({{"arm", r.arm},
                    {"steps", r.steps},
                    {"variance", r.variance.mean},
                    {"standard_error", r.variance.standard_error},
                    {"expected", target},
                    {"z", z},
                    {"pass", ok}});
  }
  return {{"suite", "ula-bias"}, {"pass", pass}, {"arms", arms}};
}

json line_integral_identity(std::uint64_t seed) {
  constexpr std::size_t pairs = 100;
  constexpr double tol = 1e-8;
  const auto rule = QuadratureRule::composite(QuadratureRule::simpson13(), 10'000);
  Rng setup(seed, 0);
  Matrix centres(2, 3);
  centres << -1.0, 0.5, 1.2, 0.3, -0.8, 1.0;
  const std::vector<std::pair<std::string, std::pair<ScoreModelPtr, double>>> targets = {
      {"gaussian-1d", {gaussian_model(vec({0.3}), 0.7), 0.0}},
      {"gaussian-3d", {gaussian_model(vec({0.0, 1.0, -1.0}), 1.5), 0.0}},
      {"quartic", {quartic_model(1.0, 0.1), 0.0}},
      {"diffused-gaussian", {diffused_gaussian_model(vec({1.0, -0.5}), 0.2, NoiseSchedule::vp_continuous()), 0.3}},
      {"mixture", {diffused_empirical_model(centres, NoiseSchedule::vp_continuous()), 0.1}},
  };
  bool pass = true;
  json rows = json::array();
  for (const auto& [name, entry] : targets) {
    const auto& [model, t] = entry;
    ScoreOracle oracle(model);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const Vector x = setup.normal_vector(model->dim());
      const double h = 0.01 + setup.uniform();
      const auto p = ula_propose(x, oracle, t, h, setup);
      const double exact = model->log_density(p.x_new, t) - model->log_density(p.x, t);
      worst = std::max(worst, std::abs(quadrature_log_ratio(p, oracle, rule) - exact));
    }
    const bool ok = worst <= tol;
    pass = pass && ok;
    rows.push_back({{"target", name}, {"max_abs_error", worst}, {"pass", ok}});
  }
  return {{"suite", "line-integral-identity"}, {"pass", pass}, {"pairs_per_target", pairs}, {"tolerance", tol},
          {"targets", rows}};
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> suites = {"lemma1",   "two-coin-exactness", "prop2-queries",
                                                  "quad-order", "ula-bias",         "line-integral-identity"};
  return suites;
}

json run_verify_suite(const std::string& name, std::uint64_t seed) {
  if (name == "lemma1") return lemma1(seed);
  if (name == "two-coin-exactness") return two_coin_exactness(seed);
  if (name == "prop2-queries") return prop2_queries(seed);
  if (name == "quad-order") return quad_order(seed);
  if (name == "ula-bias") return ula_bias(seed);
  if (name == "line-integral-identity") return line_integral_identity(seed);
  std::string names;
  for (const auto& s : verify_suites()) names += (names.empty() ? "" : ", ") + s;
  throw ConfigError("unknown verify suite '" + name + "' (valid suites: " + names + ")");
}

}  // namespace madm::app
