#include "madm/adjust_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "madm/error.hpp"

namespace madm {

namespace {

constexpr double kFactorTolerance = 1e-9;

double logistic(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double checked_factor(double integrand, double C) {
  const double factor = 0.5 + integrand / (2.0 * C);
  if (!(factor >= -kFactorTolerance && factor <= 1.0 + kFactorTolerance)) {
    throw BoundViolationError("C-bound violated: factor " + std::to_string(factor) + " from integrand " +
                              std::to_string(integrand) + " with C = " + std::to_string(C));
  }
  return std::clamp(factor, 0.0, 1.0);
}

void check_bound(double C) {
  if (!(C >= 0.0) || !std::isfinite(C)) throw DomainError("C must be finite and nonnegative");
}

}  // namespace

std::string to_string(BoundStrategy strategy) {
  switch (strategy) {
    case BoundStrategy::BoundedDenoiser: return "bounded-denoiser";
    case BoundStrategy::Lipschitz: return "lipschitz";
    case BoundStrategy::Manual: return "manual";
    case BoundStrategy::AffineEndpoint: return "affine-endpoint";
  }
  return "unknown";
}

BoundStrategy bound_strategy_from_string(const std::string& name) {
  if (name == "bounded-denoiser") return BoundStrategy::BoundedDenoiser;
  if (name == "lipschitz") return BoundStrategy::Lipschitz;
  if (name == "manual") return BoundStrategy::Manual;
  if (name == "affine-endpoint") return BoundStrategy::AffineEndpoint;
  throw ConfigError("unknown bound strategy '" + name +
                    "' (expected bounded-denoiser, lipschitz, manual, affine-endpoint)");
}

std::string to_string(DecisionPath path) {
  switch (path) {
    case DecisionPath::TwoCoin: return "two-coin";
    case DecisionPath::Quadrature: return "quadrature";
    case DecisionPath::Oracle: return "oracle";
    case DecisionPath::Unadjusted: return "unadjusted";
  }
  return "unknown";
}

double bound_C(const LangevinProposal& p, const BoundSpec& spec, const ScoreOracle& oracle) {
  const double dist = p.delta.norm();
  double C = 0.0;
  switch (spec.strategy) {
    case BoundStrategy::BoundedDenoiser: {
      const auto tweedie = oracle.model().denoiser(p.t);
      if (!tweedie) throw ConfigError("bounded-denoiser bound: target '" + oracle.model().name() +
                                      "' has no denoiser bound");
      const double b = spec.value.value_or(tweedie->bound);
      const double reach = std::max(p.x.norm(), p.x_new.norm());
      C = (b * tweedie->r + reach) / tweedie->variance * dist;
      break;
    }
    case BoundStrategy::Lipschitz: {
      const auto lip = spec.value ? spec.value : oracle.lipschitz(p.t);
      if (!lip) throw ConfigError("lipschitz bound: target '" + oracle.model().name() + "' has no Lipschitz constant");
      C = std::max(p.score_x.norm(), p.score_new.norm()) * dist + 0.5 * *lip * dist * dist;
      break;
    }
    case BoundStrategy::Manual:
      if (!spec.value) throw ConfigError("manual bound: no value given");
      C = *spec.value;
      break;
    case BoundStrategy::AffineEndpoint:
      if (!oracle.model().affine_score())
        throw ConfigError("affine-endpoint bound: target '" + oracle.model().name() + "' has a non-affine score");
      C = std::max(std::abs(p.integrand_at_start()), std::abs(p.integrand_at_end()));
      break;
  }
  check_bound(C);
  const double endpoint = std::max(std::abs(p.integrand_at_start()), std::abs(p.integrand_at_end()));
  if (endpoint > C * (1.0 + 1e-12) + 1e-12) {
    throw BoundViolationError("C-bound " + std::to_string(C) + " is below the endpoint integrand " +
                              std::to_string(endpoint));
  }
  return C;
}

double poisson_product_W(const Integrand& f, double C, Rng& rng, std::uint64_t* draws) {
  check_bound(C);
  const std::uint64_t n = rng.poisson(2.0 * C);
  if (draws) *draws = n;
  double w = 1.0;
  for (std::uint64_t j = 0; j < n; ++j) w *= checked_factor(f(rng.uniform()), C);
  return w;
}

double poisson_product_W(const LangevinProposal& p, ScoreOracle& oracle, double C, Rng& rng) {
  return poisson_product_W([&](double u) { return line_integrand(p, oracle, u); }, C, rng);
}

double immediate_reject_probability(double log_h, double C) {
  // 1 / (1 + exp(log_h + C)).
  return logistic(-(log_h + C));
}

TwoCoinRun run_two_coin_rounds(double log_h, double C, const Integrand& f, Rng& rng,
                               std::uint64_t round_limit, bool lazy_product) {
  check_bound(C);
  const double reject_prob = immediate_reject_probability(log_h, C);
  TwoCoinRun run;
  while (run.rounds < round_limit) {
    ++run.rounds;
    if (rng.uniform() <= reject_prob) {
      run.outcome = Outcome::Reject;
      return run;
    }
    const std::uint64_t n = rng.poisson(2.0 * C);
    run.poisson_total += n;
    double w = 1.0;
    if (lazy_product) {
      // W only decreases as factors are multiplied in, so U <= W is settled
      // as soon as the running product drops below U.
      const double u = rng.uniform();
      for (std::uint64_t j = 0; j < n && w >= u; ++j) {
        w *= checked_factor(f(rng.uniform()), C);
        ++run.evaluations;
      }
      run.w_last = w;
      if (u <= w) {
        run.outcome = Outcome::Accept;
        return run;
      }
    } else {
      for (std::uint64_t j = 0; j < n; ++j) w *= checked_factor(f(rng.uniform()), C);
      run.evaluations += n;
      run.w_last = w;
      if (rng.uniform() <= w) {
        run.outcome = Outcome::Accept;
        return run;
      }
    }
  }
  return run;
}

Decision two_coin_decide(double log_h, double C, const Integrand& f, Rng& rng, const TwoCoinOptions& options) {
  if (options.max_rounds < 1) throw DomainError("two-coin: max_rounds must be at least 1");
  const TwoCoinRun run = run_two_coin_rounds(log_h, C, f, rng, options.max_rounds, options.lazy_product);
  if (!run.outcome) {
    throw NonTerminationError("two-coin decision undecided after " + std::to_string(run.rounds) +
                                  " rounds (log H = " + std::to_string(log_h) + ", C = " + std::to_string(C) + ")",
                              run.rounds, log_h, C);
  }
  Decision d;
  d.outcome = *run.outcome;
  d.rounds = run.rounds;
  d.poisson_total = run.poisson_total;
  d.score_queries = run.evaluations;
  d.w_last = run.w_last;
  d.path = DecisionPath::TwoCoin;
  return d;
}

Decision two_coin_decision(const LangevinProposal& p, ScoreOracle& oracle, double C, Rng& rng,
                           const TwoCoinOptions& options) {
  const std::uint64_t before = oracle.queries();
  Decision d = two_coin_decide(log_H(p), C, [&](double u) { return line_integrand(p, oracle, u); }, rng, options);
  d.score_queries = oracle.queries() - before;
  return d;
}

double expected_queries(double C, double H, double r) {
  if (!(C >= 0.0 && H > 0.0 && r > 0.0)) throw DomainError("expected_queries: require C >= 0, H > 0, r > 0");
  if (C == 0.0) return 0.0;
  if (std::isinf(H)) return 2.0 * C * std::exp(C) / r;
  return 2.0 * C * H * std::exp(C) / (1.0 + H * r);
}

double expected_rounds(double C, double H, double r) {
  if (!(C >= 0.0 && H > 0.0 && r > 0.0)) throw DomainError("expected_rounds: require C >= 0, H > 0, r > 0");
  return (1.0 + H * std::exp(C)) / (1.0 + H * r);
}

double barker_acceptance(double log_ratio) { return logistic(log_ratio); }

}  // namespace madm
