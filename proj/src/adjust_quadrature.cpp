#include "madm/adjust_quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "madm/error.hpp"

namespace madm {

QuadratureRule QuadratureRule::trapezoid() { return {"trapezoid", {0.0, 1.0}, {0.5, 0.5}}; }

QuadratureRule QuadratureRule::simpson13() {
  return {"simpson13", {0.0, 0.5, 1.0}, {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0}};
}

QuadratureRule QuadratureRule::simpson38() {
  return {"simpson38", {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0}};
}

QuadratureRule QuadratureRule::composite(const QuadratureRule& base, std::size_t panels) {
  if (panels < 1) throw DomainError("composite rule needs at least one panel");
  if (base.size() < 2) throw DomainError("composite rule needs a closed base rule");
  const std::size_t per = base.size() - 1;
  const std::size_t total = per * panels;
  QuadratureRule rule;
  rule.name = "composite(" + std::to_string(panels) + "," + base.name + ")";
  rule.nodes.resize(total + 1);
  rule.weights.assign(total + 1, 0.0);
  for (std::size_t i = 0; i <= total; ++i) rule.nodes[i] = static_cast<double>(i) / static_cast<double>(total);
  const double scale = 1.0 / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k)
    for (std::size_t j = 0; j <= per; ++j) rule.weights[k * per + j] += scale * base.weights[j];
  return rule;
}

QuadratureRule quadrature_rule_from_string(const std::string& name) {
  if (name == "trapezoid") return QuadratureRule::trapezoid();
  if (name == "simpson13") return QuadratureRule::simpson13();
  if (name == "simpson38") return QuadratureRule::simpson38();
  throw ConfigError("unknown quadrature rule '" + name + "' (expected trapezoid, simpson13, simpson38)");
}

double quadrature_log_ratio(const LangevinProposal& p, ScoreOracle& oracle, const QuadratureRule& rule) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * line_integrand(p, oracle, rule.nodes[i]);
  return sum;
}

bool mh_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) throw NumericalError("acceptance log-ratio is NaN");
  return std::log(rng.uniform()) <= std::min(0.0, log_ratio);
}

bool barker_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) throw NumericalError("acceptance log-ratio is NaN");
  return rng.uniform() < barker_acceptance(log_ratio);
}

Decision mh_decision_quadrature(const LangevinProposal& p, ScoreOracle& oracle, const QuadratureRule& rule,
                                Rng& rng) {
  const auto before = oracle.queries();
  const double log_r = quadrature_log_ratio(p, oracle, rule);
  if (!std::isfinite(log_r)) throw NumericalError("quadrature log-ratio is non-finite");
  Decision d;
  d.path = DecisionPath::Quadrature;
  d.outcome = mh_accept(log_r + log_H(p), rng) ? Outcome::Accept : Outcome::Reject;
  d.score_queries = oracle.queries() - before;
  return d;
}

double exact_log_acceptance_ratio(const LangevinProposal& p, const ScoreOracle& oracle) {
  if (!oracle.has_log_density())
    throw ConfigError("oracle decision: target '" + oracle.model().name() + "' has no exact log-density");
  return oracle.log_density(p.x_new, p.t) - oracle.log_density(p.x, p.t) + log_H(p);
}

Decision oracle_mh_decision(const LangevinProposal& p, const ScoreOracle& oracle, Rng& rng) {
  Decision d;
  d.path = DecisionPath::Oracle;
  d.outcome = mh_accept(exact_log_acceptance_ratio(p, oracle), rng) ? Outcome::Accept : Outcome::Reject;
  return d;
}

Decision oracle_barker_decision(const LangevinProposal& p, const ScoreOracle& oracle, Rng& rng) {
  Decision d;
  d.path = DecisionPath::Oracle;
  d.outcome = barker_accept(exact_log_acceptance_ratio(p, oracle), rng) ? Outcome::Accept : Outcome::Reject;
  return d;
}

Decision hybrid_decision(const LangevinProposal& p, ScoreOracle& oracle, double C, const QuadratureRule& rule,
                         std::uint64_t K, Rng& rng, bool lazy_product) {
  const auto before = oracle.queries();
  const TwoCoinRun run = run_two_coin_rounds(
      log_H(p), C, [&](double u) { return line_integrand(p, oracle, u); }, rng, K, lazy_product);
  Decision d;
  if (run.outcome) {
    d.outcome = *run.outcome;
    d.rounds = run.rounds;
    d.path = DecisionPath::TwoCoin;
  } else {
    d = mh_decision_quadrature(p, oracle, rule, rng);
    d.rounds = run.rounds + 1;
  }
  d.poisson_total = run.poisson_total;
  d.w_last = run.w_last;
  d.score_queries = oracle.queries() - before;
  return d;
}

}  // namespace madm
