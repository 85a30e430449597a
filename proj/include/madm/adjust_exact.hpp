#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "madm/proposal.hpp"
#include "madm/random.hpp"
#include "madm/targets.hpp"

namespace madm {

/// How the envelope C(x, x_new) >= max_u |f(u)| is obtained.
///
/// BoundedDenoiser and Lipschitz take their constant from `value` when set,
/// else from the oracle. AffineEndpoint is only valid for targets with an
/// affine score (Gaussians), where the envelope is max(|f(0)|, |f(1)|).
enum class BoundStrategy { BoundedDenoiser, Lipschitz, Manual, AffineEndpoint };

std::string to_string(BoundStrategy strategy);
BoundStrategy bound_strategy_from_string(const std::string& name);

struct BoundSpec {
  BoundStrategy strategy = BoundStrategy::Lipschitz;
  std::optional<double> value;
};

enum class Outcome { Accept, Reject };

// Which mechanism produced a decision.
enum class DecisionPath { TwoCoin, Quadrature, Oracle, Unadjusted };

std::string to_string(DecisionPath path);

struct Decision {
  Outcome outcome = Outcome::Reject;
  std::uint64_t rounds = 1;
  std::uint64_t poisson_total = 0;
  std::uint64_t score_queries = 0;
  double w_last = 1.0;
  DecisionPath path = DecisionPath::TwoCoin;

  bool accepted() const { return outcome == Outcome::Accept; }
};

struct TwoCoinOptions {
  std::uint64_t max_rounds = 1'000'000;
  // Draw the acceptance uniform first and stop multiplying factors once the
  // running product falls below it. Same decision law, fewer integrand calls.
  bool lazy_product = false;
};

using Integrand = std::function<double(double)>;

double bound_C(const LangevinProposal& p, const BoundSpec& spec, const ScoreOracle& oracle);

/// One draw of W = prod_{j <= N} (1/2 + f(U_j) / (2C)), N ~ Poisson(2C).
///
/// Unbiased for exp(-C) * r. Factors outside [-1e-9, 1 + 1e-9] mean C does not
/// dominate the integrand and raise BoundViolationError.
double poisson_product_W(const LangevinProposal& p, ScoreOracle& oracle, double C, Rng& rng);
double poisson_product_W(const Integrand& f, double C, Rng& rng, std::uint64_t* draws = nullptr);

// Outcome of at most `round_limit` two-coin rounds; outcome is empty when
// every round restarted.
struct TwoCoinRun {
  std::optional<Outcome> outcome;
  std::uint64_t rounds = 0;
  std::uint64_t poisson_total = 0;
  std::uint64_t evaluations = 0;
  double w_last = 1.0;
};

TwoCoinRun run_two_coin_rounds(double log_h, double C, const Integrand& f, Rng& rng,
                               std::uint64_t round_limit, bool lazy_product);

/// Exact Barker decision: accepts with probability H r / (1 + H r).
///
/// Each round rejects outright with probability 1 / (1 + H e^C), otherwise
/// accepts if a uniform falls below W and restarts if not. Throws
/// NonTerminationError after options.max_rounds rounds.
Decision two_coin_decision(const LangevinProposal& p, ScoreOracle& oracle, double C, Rng& rng,
                           const TwoCoinOptions& options = {});
// Same loop on an abstract integrand; score_queries counts integrand calls.
Decision two_coin_decide(double log_h, double C, const Integrand& f, Rng& rng,
                         const TwoCoinOptions& options = {});

// Probability of the immediate-reject coin, 1 / (1 + H e^C), from log H.
double immediate_reject_probability(double log_h, double C);

// 2 C H e^C / (1 + H r).
double expected_queries(double C, double H, double r);
// (1 + H e^C) / (1 + H r).
double expected_rounds(double C, double H, double r);
// R / (1 + R) from log R, evaluated stably.
double barker_acceptance(double log_ratio);

}  // namespace madm
