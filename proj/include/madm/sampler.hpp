#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "madm/adjust_exact.hpp"
#include "madm/adjust_quadrature.hpp"
#include "madm/proposal.hpp"
#include "madm/schedule.hpp"
#include "madm/targets.hpp"

namespace madm {

enum class PredictorKind { PfOdeEuler, PfOdeHeun, Ancestral, None };

std::string to_string(PredictorKind kind);
PredictorKind predictor_kind_from_string(const std::string& name);

struct PredictorSpec {
  PredictorKind kind = PredictorKind::Ancestral;
  // Number of noise levels between t = 1 and t = 0.
  std::size_t steps = 20;
};

enum class CorrectorKind { None, Ula, TwoCoin, Quadrature, Hybrid, OracleMh, OracleBarker };

std::string to_string(CorrectorKind kind);
CorrectorKind corrector_kind_from_string(const std::string& name);

// h = c * beta over the last predictor interval, c * sigma(t), or c.
enum class StepRule { Beta, Sigma, Constant };

std::string to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);

struct CorrectorSpec {
  CorrectorKind kind = CorrectorKind::None;
  std::size_t steps = 0;
  StepRule step_rule = StepRule::Beta;
  double c = 0.1;
  QuadratureRule rule = QuadratureRule::simpson13();
  std::uint64_t hybrid_rounds = 10;
  BoundSpec bound;
  TwoCoinOptions two_coin;
};

struct RunConfig {
  ScoreModelPtr target;
  NoiseSchedule schedule = NoiseSchedule::vp_discrete(20, 0.005, 0.5);
  PredictorSpec predictor;
  CorrectorSpec corrector;
  std::size_t chains = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Corrector statistics at one noise level, summed over chains.
struct LevelStats {
  double t = 0.0;
  double h = 0.0;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rounds = 0;
  std::uint64_t queries = 0;
  std::uint64_t fallbacks = 0;
  double squared_jumps = 0.0;

  double acceptance_rate() const;
  double mean_rounds() const;
  double mean_queries() const;
  double esjd() const;
  void merge(const LevelStats& other);
};

struct RunReport {
  Matrix samples;  // one sample per column
  std::vector<LevelStats> levels;
  std::uint64_t predictor_queries = 0;
  std::uint64_t corrector_queries = 0;
  double wall_seconds = 0.0;

  std::uint64_t total_queries() const { return predictor_queries + corrector_queries; }
};

/// One DDPM ancestral step from level t_hi with the given beta:
/// (x + beta s(x, t_hi)) / sqrt(1 - beta) + sqrt(beta) z.
Vector ancestral_step(const Vector& x, ScoreOracle& oracle, double t_hi, double beta, Rng& rng);
Vector ancestral_step(const Vector& x, const Vector& score, double beta, const Vector& noise);

/// Reverse-time probability-flow step from t to t - dt.
///
/// Uses dx/dt = f_t x - g_t^2 s(x, t) / 2; for the EDM schedule this is
/// dY = sigma(t) s(Y) dt. Heun adds the trapezoidal correction and falls back
/// to Euler when the target is undefined at t - dt.
Vector pf_ode_step_euler(const Vector& x, ScoreOracle& oracle, const NoiseSchedule& schedule, double t, double dt);
Vector pf_ode_step_heun(const Vector& x, ScoreOracle& oracle, const NoiseSchedule& schedule, double t, double dt);

// Corrector step size at level t_lo after a predictor move from t_hi.
double corrector_step_size(const CorrectorSpec& spec, const NoiseSchedule& schedule, double t_lo, double t_hi);

// Accept/reject for one proposal under the configured corrector.
Decision corrector_decision(const CorrectorSpec& spec, const LangevinProposal& p, ScoreOracle& oracle, Rng& rng);

/// State of a corrector chain at a fixed level; caches the score at x.
struct CorrectorState {
  Vector x;
  Vector score;
  bool has_score = false;
};

// One corrector step; updates `state` and `stats`.
void corrector_step(CorrectorState& state, ScoreOracle& oracle, const CorrectorSpec& spec, double t, double h,
                    Rng& rng, LevelStats& stats);

/// Predictor–corrector sampling from N(0, I) at t = 1 down to t = 0.
///
/// Chain i draws from Rng(seed, i) and owns its oracle counter, and the
/// report is merged in chain order, so the output does not depend on the
/// thread count.
RunReport run_pc(const RunConfig& config);

struct CorrectorChainResult {
  Vector final_state;
  std::vector<double> trace;  // first coordinate after burn-in
  LevelStats stats;           // post burn-in steps only
};

/// A single corrector-only chain at a fixed level and step size.
CorrectorChainResult run_corrector_chain(ScoreOracle& oracle, const CorrectorSpec& spec, double t, double h,
                                         Vector x0, std::size_t steps, std::size_t burn_in, Rng& rng);

}  // namespace madm
