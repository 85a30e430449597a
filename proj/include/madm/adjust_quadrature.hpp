#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "madm/adjust_exact.hpp"

namespace madm {

/// Closed Newton–Cotes rule on [0, 1] with equally spaced nodes.
///
/// Weights sum to one, so applying the rule to the line integrand estimates
/// log r directly.
struct QuadratureRule {
  std::string name;
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule trapezoid();
  static QuadratureRule simpson13();
  static QuadratureRule simpson38();
  // m equal panels of `base`, sharing the panel endpoints.
  static QuadratureRule composite(const QuadratureRule& base, std::size_t panels);

  std::size_t size() const { return nodes.size(); }
  // Score queries per application once both endpoint scores are cached.
  std::size_t interior_nodes() const { return nodes.size() < 2 ? 0 : nodes.size() - 2; }
};

// trapezoid, simpson13, simpson38.
QuadratureRule quadrature_rule_from_string(const std::string& name);

/// sum_i w_i f(i / N) for the line integrand of p.
double quadrature_log_ratio(const LangevinProposal& p, ScoreOracle& oracle, const QuadratureRule& rule);

// Accept iff log U <= min(0, log_ratio). Non-finite input raises NumericalError.
bool mh_accept(double log_ratio, Rng& rng);
// Accept with probability R / (1 + R).
bool barker_accept(double log_ratio, Rng& rng);

/// MH decision with the quadrature estimate standing in for log r.
Decision mh_decision_quadrature(const LangevinProposal& p, ScoreOracle& oracle, const QuadratureRule& rule,
                                Rng& rng);

// MALA decision with the exact density ratio; needs an exact log-density.
Decision oracle_mh_decision(const LangevinProposal& p, const ScoreOracle& oracle, Rng& rng);
// Barker decision with the exact density ratio.
Decision oracle_barker_decision(const LangevinProposal& p, const ScoreOracle& oracle, Rng& rng);

// Exact log(H r) from the target's log-density.
double exact_log_acceptance_ratio(const LangevinProposal& p, const ScoreOracle& oracle);

/// Up to K two-coin rounds, then the quadrature MH decision.
///
/// The returned path says which mechanism decided. On fallback `rounds`
/// counts the two-coin rounds plus the quadrature step.
Decision hybrid_decision(const LangevinProposal& p, ScoreOracle& oracle, double C, const QuadratureRule& rule,
                         std::uint64_t K, Rng& rng, bool lazy_product = false);

}  // namespace madm
