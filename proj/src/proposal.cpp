#include "madm/proposal.hpp"

#include <cmath>
#include <string>

#include "madm/error.hpp"

namespace madm {

void require_finite(const Vector& v, const char* what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]))
      throw NumericalError(std::string(what) + " is non-finite at coordinate " + std::to_string(i));
  }
}

LangevinProposal ula_propose_from(const Vector& x, const Vector& score_x, const Vector& noise,
                                  ScoreOracle& oracle, double t, double h) {
  if (!(h > 0.0)) throw DomainError("ula_propose: step size h must be positive");
  if (x.size() != score_x.size() || x.size() != noise.size())
    throw DomainError("ula_propose: dimension mismatch");
  require_finite(score_x, "score at current state");
  LangevinProposal p;
  p.h = h;
  p.t = t;
  p.x = x;
  p.score_x = score_x;
  p.x_new = x + 0.5 * h * score_x + std::sqrt(h) * noise;
  p.delta = p.x_new - p.x;
  p.score_new = oracle.score(p.x_new, t);
  require_finite(p.score_new, "score at proposal");
  return p;
}

LangevinProposal ula_propose(const Vector& x, ScoreOracle& oracle, double t, double h, Rng& rng) {
  if (!(h > 0.0)) throw DomainError("ula_propose: step size h must be positive");
  Vector s = oracle.score(x, t);
  return ula_propose_from(x, s, rng.normal_vector(x.size()), oracle, t, h);
}

LangevinProposal make_proposal(const Vector& x, const Vector& x_new, ScoreOracle& oracle, double t, double h) {
  if (!(h > 0.0)) throw DomainError("make_proposal: step size h must be positive");
  if (x.size() != x_new.size()) throw DomainError("make_proposal: dimension mismatch");
  LangevinProposal p;
  p.h = h;
  p.t = t;
  p.x = x;
  p.x_new = x_new;
  p.delta = x_new - x;
  p.score_x = oracle.score(x, t);
  p.score_new = oracle.score(x_new, t);
  require_finite(p.score_x, "score at current state");
  require_finite(p.score_new, "score at proposal");
  return p;
}

double log_H(const LangevinProposal& p) {
  const double inv = 1.0 / (2.0 * p.h);
  const double forward = (p.delta - 0.5 * p.h * p.score_x).squaredNorm();
  const double backward = (p.delta + 0.5 * p.h * p.score_new).squaredNorm();
  return inv * (forward - backward);
}

double line_integrand(const LangevinProposal& p, ScoreOracle& oracle, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("line_integrand: u must lie in [0, 1]");
  if (u == 0.0) return p.integrand_at_start();
  if (u == 1.0) return p.integrand_at_end();
  return oracle.score(p.x + u * p.delta, p.t).dot(p.delta);
}

}  // namespace madm
