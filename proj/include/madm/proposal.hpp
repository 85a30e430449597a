#pragma once

#include "madm/linalg.hpp"
#include "madm/random.hpp"
#include "madm/targets.hpp"

namespace madm {

/// A ULA move x -> x_new at noise level t with both endpoint scores cached.
struct LangevinProposal {
  Vector x;
  Vector x_new;
  Vector delta;  // x_new - x
  double h = 0.0;
  double t = 0.0;
  Vector score_x;
  Vector score_new;

  // Line integrand at the endpoints, <s, x_new - x>; no score queries.
  double integrand_at_start() const { return score_x.dot(delta); }
  double integrand_at_end() const { return score_new.dot(delta); }
};

// x_new = x + (h/2) s(x, t) + sqrt(h) z with z ~ N(0, I). Costs two queries.
LangevinProposal ula_propose(const Vector& x, ScoreOracle& oracle, double t, double h, Rng& rng);

// Same move with a known score at x and an explicit noise draw. Costs one query.
LangevinProposal ula_propose_from(const Vector& x, const Vector& score_x, const Vector& noise,
                                  ScoreOracle& oracle, double t, double h);

// Builds the record for an arbitrary pair (x, x_new); two queries.
LangevinProposal make_proposal(const Vector& x, const Vector& x_new, ScoreOracle& oracle, double t, double h);

/// log q(x | x_new) - log q(x_new | x) for the ULA Gaussian proposal.
double log_H(const LangevinProposal& p);

/// f(u) = <s(x + u (x_new - x), t), x_new - x>. Endpoints reuse cached scores.
double line_integrand(const LangevinProposal& p, ScoreOracle& oracle, double u);

// Throws NumericalError naming the first non-finite coordinate.
void require_finite(const Vector& v, const char* what);

}  // namespace madm
