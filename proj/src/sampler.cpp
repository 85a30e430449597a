#include "madm/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "madm/error.hpp"

namespace madm {

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::PfOdeEuler: return "pf-ode-euler";
    case PredictorKind::PfOdeHeun: return "pf-ode-heun";
    case PredictorKind::Ancestral: return "ancestral";
    case PredictorKind::None: return "none";
  }
  return "unknown";
}

PredictorKind predictor_kind_from_string(const std::string& name) {
  if (name == "pf-ode-euler") return PredictorKind::PfOdeEuler;
  if (name == "pf-ode-heun") return PredictorKind::PfOdeHeun;
  if (name == "ancestral") return PredictorKind::Ancestral;
  if (name == "none") return PredictorKind::None;
  throw ConfigError("unknown predictor '" + name + "' (expected pf-ode-euler, pf-ode-heun, ancestral, none)");
}

std::string to_string(CorrectorKind kind) {
  switch (kind) {
    case CorrectorKind::None: return "none";
    case CorrectorKind::Ula: return "ula";
    case CorrectorKind::TwoCoin: return "two-coin";
    case CorrectorKind::Quadrature: return "quadrature";
    case CorrectorKind::Hybrid: return "hybrid";
    case CorrectorKind::OracleMh: return "oracle-mh";
    case CorrectorKind::OracleBarker: return "oracle-barker";
  }
  return "unknown";
}

CorrectorKind corrector_kind_from_string(const std::string& name) {
  if (name == "none") return CorrectorKind::None;
  if (name == "ula") return CorrectorKind::Ula;
  if (name == "two-coin") return CorrectorKind::TwoCoin;
  if (name == "quadrature") return CorrectorKind::Quadrature;
  if (name == "hybrid") return CorrectorKind::Hybrid;
  if (name == "oracle-mh") return CorrectorKind::OracleMh;
  if (name == "oracle-barker") return CorrectorKind::OracleBarker;
  throw ConfigError("unknown corrector '" + name +
                    "' (expected none, ula, two-coin, quadrature, hybrid, oracle-mh, oracle-barker)");
}

std::string to_string(StepRule rule) {
  switch (rule) {
    case StepRule::Beta: return "beta";
    case StepRule::Sigma: return "sigma";
    case StepRule::Constant: return "constant";
  }
  return "unknown";
}

StepRule step_rule_from_string(const std::string& name) {
  if (name == "beta") return StepRule::Beta;
  if (name == "sigma") return StepRule::Sigma;
  if (name == "constant") return StepRule::Constant;
  throw ConfigError("unknown step rule '" + name + "' (expected beta, sigma, constant)");
}

double LevelStats::acceptance_rate() const {
  return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 0.0;
}

double LevelStats::mean_rounds() const {
  return proposals ? static_cast<double>(rounds) / static_cast<double>(proposals) : 0.0;
}

double LevelStats::mean_queries() const {
  return proposals ? static_cast<double>(queries) / static_cast<double>(proposals) : 0.0;
}

double LevelStats::esjd() const { return proposals ? squared_jumps / static_cast<double>(proposals) : 0.0; }

void LevelStats::merge(const LevelStats& other) {
  proposals += other.proposals;
  accepted += other.accepted;
  rounds += other.rounds;
  queries += other.queries;
  fallbacks += other.fallbacks;
  squared_jumps += other.squared_jumps;
}

Vector ancestral_step(const Vector& x, const Vector& score, double beta, const Vector& noise) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("ancestral_step: beta must lie in (0, 1)");
  return (x + beta * score) / std::sqrt(1.0 - beta) + std::sqrt(beta) * noise;
}

Vector ancestral_step(const Vector& x, ScoreOracle& oracle, double t_hi, double beta, Rng& rng) {
  const Vector s = oracle.score(x, t_hi);
  require_finite(s, "score in ancestral step");
  return ancestral_step(x, s, beta, rng.normal_vector(x.size()));
}

namespace {

struct OdeCoefficients {
  double f;
  double g2;
};

// f and g^2 at time tau; the discrete VP schedule is piecewise constant, so
// both ends of an interval use the value on (t - dt, t].
OdeCoefficients ode_coefficients(const NoiseSchedule& schedule, double tau, double t_interval) {
  const double at = schedule.kind() == ScheduleKind::VpDiscrete ? t_interval : tau;
  return {schedule.drift(at), schedule.diffusion_sq(at)};
}

Vector ode_velocity(const Vector& x, const Vector& s, const OdeCoefficients& c) { return c.f * x - 0.5 * c.g2 * s; }

double lower_time(double t, double dt) {
  if (!(dt > 0.0)) throw DomainError("probability-flow step: dt must be positive");
  const double lo = t - dt;
  if (lo < -1e-12) throw DomainError("probability-flow step: t - dt must be nonnegative");
  return std::max(lo, 0.0);
}

}  // namespace

Vector pf_ode_step_euler(const Vector& x, ScoreOracle& oracle, const NoiseSchedule& schedule, double t, double dt) {
  lower_time(t, dt);
  const Vector s = oracle.score(x, t);
  require_finite(s, "score in probability-flow step");
  Vector out = x - dt * ode_velocity(x, s, ode_coefficients(schedule, t, t));
  require_finite(out, "probability-flow drift");
  return out;
}

Vector pf_ode_step_heun(const Vector& x, ScoreOracle& oracle, const NoiseSchedule& schedule, double t, double dt) {
  const double lo = lower_time(t, dt);
  const Vector s = oracle.score(x, t);
  require_finite(s, "score in probability-flow step");
  const Vector v0 = ode_velocity(x, s, ode_coefficients(schedule, t, t));
  const Vector euler = x - dt * v0;
  if (!oracle.model().defined_at(lo)) {
    require_finite(euler, "probability-flow drift");
    return euler;
  }
  const Vector s1 = oracle.score(euler, lo);
  require_finite(s1, "score in probability-flow step");
  const Vector v1 = ode_velocity(euler, s1, ode_coefficients(schedule, lo, t));
  Vector out = x - 0.5 * dt * (v0 + v1);
  require_finite(out, "probability-flow drift");
  return out;
}

double corrector_step_size(const CorrectorSpec& spec, const NoiseSchedule& schedule, double t_lo, double t_hi) {
  double h = 0.0;
  switch (spec.step_rule) {
    case StepRule::Beta: h = spec.c * schedule.effective_beta(t_lo, t_hi); break;
    case StepRule::Sigma: h = spec.c * schedule.marginal(t_lo).sigma; break;
    case StepRule::Constant: h = spec.c; break;
  }
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("corrector step size must be positive (got " + std::to_string(h) + " at t = " +
                      std::to_string(t_lo) + ")");
  return h;
}

Decision corrector_decision(const CorrectorSpec& spec, const LangevinProposal& p, ScoreOracle& oracle, Rng& rng) {
  switch (spec.kind) {
    case CorrectorKind::Ula: {
      Decision d;
      d.outcome = Outcome::Accept;
      d.path = DecisionPath::Unadjusted;
      return d;
    }
    case CorrectorKind::TwoCoin:
      return two_coin_decision(p, oracle, bound_C(p, spec.bound, oracle), rng, spec.two_coin);
    case CorrectorKind::Quadrature:
      return mh_decision_quadrature(p, oracle, spec.rule, rng);
    case CorrectorKind::Hybrid:
      return hybrid_decision(p, oracle, bound_C(p, spec.bound, oracle), spec.rule, spec.hybrid_rounds, rng,
                             spec.two_coin.lazy_product);
    case CorrectorKind::OracleMh:
      return oracle_mh_decision(p, oracle, rng);
    case CorrectorKind::OracleBarker:
      return oracle_barker_decision(p, oracle, rng);
    case CorrectorKind::None:
      break;
  }
  throw ConfigError("corrector kind 'none' has no decision rule");
}

void corrector_step(CorrectorState& state, ScoreOracle& oracle, const CorrectorSpec& spec, double t, double h,
                    Rng& rng, LevelStats& stats) {
  const auto before = oracle.queries();
  if (!state.has_score) {
    state.score = oracle.score(state.x, t);
    state.has_score = true;
  }
  const LangevinProposal p = ula_propose_from(state.x, state.score, rng.normal_vector(state.x.size()), oracle, t, h);
  const Decision d = corrector_decision(spec, p, oracle, rng);
  ++stats.proposals;
  stats.rounds += d.rounds;
  if (d.path == DecisionPath::Quadrature && spec.kind == CorrectorKind::Hybrid) ++stats.fallbacks;
  if (d.accepted()) {
    ++stats.accepted;
    stats.squared_jumps += p.delta.squaredNorm();
    state.x = p.x_new;
    state.score = p.score_new;
  }
  stats.queries += oracle.queries() - before;
}

namespace {

struct ChainFailure {
  std::exception_ptr error;
  std::size_t level = 0;
  double t = 0.0;
};

[[noreturn]] void rethrow_with_context(std::exception_ptr error, const std::string& context) {
  try {
    std::rethrow_exception(error);
  } catch (const NonTerminationError& e) {
    throw NonTerminationError(context + e.what(), e.rounds(), e.log_h(), e.bound());
  } catch (const BoundViolationError& e) {
    throw BoundViolationError(context + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(context + e.what());
  } catch (const DegenerateMixtureError& e) {
    throw DegenerateMixtureError(context + e.what());
  } catch (const DomainError& e) {
    throw DomainError(context + e.what());
  } catch (const std::exception& e) {
    throw Error(context + e.what());
  }
}

}  // namespace

RunReport run_pc(const RunConfig& config) {
  if (!config.target) throw ConfigError("run_pc: no target");
  if (config.predictor.steps < 1) throw ConfigError("run_pc: predictor steps must be at least 1");
  if (config.chains < 1) throw ConfigError("run_pc: chains must be at least 1");
  if (config.corrector.kind != CorrectorKind::None && !(config.corrector.c > 0.0))
    throw ConfigError("run_pc: corrector scale c must be positive");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t levels = config.predictor.steps;
  const std::size_t chains = config.chains;
  const Index dim = config.target->dim();
  const double n_levels = static_cast<double>(levels);

  RunReport report;
  report.samples.resize(dim, static_cast<Index>(chains));
  report.levels.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const double t_lo = static_cast<double>(levels - 1 - l) / n_levels;
    const double t_hi = static_cast<double>(levels - l) / n_levels;
    report.levels[l].t = t_lo;
    const bool corrects = config.corrector.kind != CorrectorKind::None && config.corrector.steps > 0 &&
                          config.target->defined_at(t_lo);
    report.levels[l].h = corrects ? corrector_step_size(config.corrector, config.schedule, t_lo, t_hi) : 0.0;
  }

  std::vector<LevelStats> chain_stats(chains * levels);
  std::vector<std::uint64_t> predictor_queries(chains, 0);
  std::vector<std::uint64_t> corrector_queries(chains, 0);
  std::vector<ChainFailure> failures(chains);

  auto run_chain = [&](std::size_t chain) {
    Rng rng(config.seed, chain);
    ScoreOracle oracle(config.target);
    std::size_t level = 0;
    try {
      Vector x = rng.normal_vector(dim);
      for (level = 0; level < levels; ++level) {
        const double t_lo = report.levels[level].t;
        const double t_hi = static_cast<double>(levels - level) / n_levels;
        const auto before = oracle.queries();
        switch (config.predictor.kind) {
          case PredictorKind::Ancestral:
            x = ancestral_step(x, oracle, t_hi, config.schedule.effective_beta(t_lo, t_hi), rng);
            break;
          case PredictorKind::PfOdeEuler:
            x = pf_ode_step_euler(x, oracle, config.schedule, t_hi, t_hi - t_lo);
            break;
          case PredictorKind::PfOdeHeun:
            x = pf_ode_step_heun(x, oracle, config.schedule, t_hi, t_hi - t_lo);
            break;
          case PredictorKind::None:
            break;
        }
        predictor_queries[chain] += oracle.queries() - before;

        const double h = report.levels[level].h;
        if (h > 0.0) {
          LevelStats& stats = chain_stats[chain * levels + level];
          CorrectorState state{x, Vector(), false};
          for (std::size_t k = 0; k < config.corrector.steps; ++k)
            corrector_step(state, oracle, config.corrector, t_lo, h, rng, stats);
          corrector_queries[chain] += stats.queries;
          x = std::move(state.x);
        }
      }
      report.samples.col(static_cast<Index>(chain)) = x;
    } catch (...) {
      failures[chain] = {std::current_exception(), level, level < levels ? report.levels[level].t : 0.0};
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, chains);
  if (threads == 1) {
    for (std::size_t c = 0; c < chains; ++c) {
      run_chain(c);
      if (failures[c].error) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chains && !failed; c = next++) {
          run_chain(c);
          if (failures[c].error) failed = true;
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t c = 0; c < chains; ++c) {
    if (failures[c].error)
      rethrow_with_context(failures[c].error, "chain " + std::to_string(c) + ", level " +
                                                  std::to_string(failures[c].level) + " (t = " +
                                                  std::to_string(failures[c].t) + "): ");
  }

  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t l = 0; l < levels; ++l) report.levels[l].merge(chain_stats[c * levels + l]);
    report.predictor_queries += predictor_queries[c];
    report.corrector_queries += corrector_queries[c];
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CorrectorChainResult run_corrector_chain(ScoreOracle& oracle, const CorrectorSpec& spec, double t, double h,
                                         Vector x0, std::size_t steps, std::size_t burn_in, Rng& rng) {
  if (spec.kind == CorrectorKind::None) throw ConfigError("corrector chain: kind 'none' has nothing to run");
  if (!(h > 0.0)) throw DomainError("corrector chain: h must be positive");
  CorrectorChainResult result;
  result.stats.t = t;
  result.stats.h = h;
  result.trace.reserve(steps > burn_in ? steps - burn_in : 0);
  CorrectorState state{std::move(x0), Vector(), false};
  LevelStats warmup;
  for (std::size_t k = 0; k < steps; ++k) {
    const bool kept = k >= burn_in;
    corrector_step(state, oracle, spec, t, h, rng, kept ? result.stats : warmup);
    if (kept) result.trace.push_back(state.x[0]);
  }
  result.final_state = std::move(state.x);
  return result;
}

}  // namespace madm
