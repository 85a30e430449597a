#include "madm/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "madm/error.hpp"

namespace madm {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::VpDiscrete: return "vp-discrete";
    case ScheduleKind::VpContinuous: return "vp-continuous";
    case ScheduleKind::Edm: return "edm";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "vp-discrete") return ScheduleKind::VpDiscrete;
  if (name == "vp-continuous") return ScheduleKind::VpContinuous;
  if (name == "edm") return ScheduleKind::Edm;
  throw ConfigError("unknown schedule kind '" + name + "' (expected vp-discrete, vp-continuous, edm)");
}

std::vector<double> beta_schedule(std::size_t steps, double beta_min, double beta_max) {
  if (steps < 1) throw DomainError("beta_schedule: T must be at least 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw DomainError("beta_schedule: require 0 < beta_min <= beta_max < 1");
  std::vector<double> betas(steps);
  if (steps == 1) {
    betas[0] = beta_min;
    return betas;
  }
  const double span = beta_max - beta_min;
  const double denom = static_cast<double>(steps - 1);
  for (std::size_t k = 0; k < steps; ++k) betas[k] = beta_min + span * (static_cast<double>(k) / denom);
  betas.back() = beta_max;
  return betas;
}

NoiseSchedule NoiseSchedule::vp_discrete(std::size_t steps, double beta_min, double beta_max) {
  NoiseSchedule s;
  s.kind_ = ScheduleKind::VpDiscrete;
  s.beta_min_ = beta_min;
  s.beta_max_ = beta_max;
  s.betas_ = beta_schedule(steps, beta_min, beta_max);
  s.log_alpha_bar_.assign(steps + 1, 0.0);
  for (std::size_t k = 0; k < steps; ++k)
    s.log_alpha_bar_[k + 1] = s.log_alpha_bar_[k] + std::log1p(-s.betas_[k]);
  return s;
}

NoiseSchedule NoiseSchedule::vp_continuous(double beta_min, double beta_max) {
  if (!(beta_min > 0.0 && beta_min <= beta_max && std::isfinite(beta_max)))
    throw DomainError("vp_continuous: require 0 < beta_min <= beta_max");
  NoiseSchedule s;
  s.kind_ = ScheduleKind::VpContinuous;
  s.beta_min_ = beta_min;
  s.beta_max_ = beta_max;
  return s;
}

NoiseSchedule NoiseSchedule::edm() {
  NoiseSchedule s;
  s.kind_ = ScheduleKind::Edm;
  return s;
}

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time t must lie in [0, 1]");
}

}  // namespace

std::size_t NoiseSchedule::segment(double t) const {
  // Segment k (1-based) covers ((k-1)/T, k/T]; t = 0 belongs to segment 1.
  const auto steps = static_cast<double>(betas_.size());
  auto k = static_cast<std::size_t>(std::ceil(t * steps - 1e-12));
  return std::clamp<std::size_t>(k, 1, betas_.size());
}

double NoiseSchedule::log_r_squared(double t) const {
  check_time(t);
  switch (kind_) {
    case ScheduleKind::VpDiscrete: {
      const double pos = t * static_cast<double>(betas_.size());
      const auto k = std::min(static_cast<std::size_t>(std::floor(pos)), betas_.size());
      if (k == betas_.size()) return log_alpha_bar_.back();
      const double frac = pos - static_cast<double>(k);
      return log_alpha_bar_[k] + frac * (log_alpha_bar_[k + 1] - log_alpha_bar_[k]);
    }
    case ScheduleKind::VpContinuous:
      return -(beta_min_ * t + 0.5 * (beta_max_ - beta_min_) * t * t);
    case ScheduleKind::Edm:
      return 0.0;
  }
  return 0.0;
}

MarginalParams NoiseSchedule::marginal(double t) const {
  check_time(t);
  if (kind_ == ScheduleKind::Edm) return {1.0, t};
  const double lr2 = log_r_squared(t);
  // r^2 sigma^2 = 1 - r^2 for VP, hence sigma^2 = 1/r^2 - 1 = expm1(-log r^2).
  return {std::exp(0.5 * lr2), std::sqrt(std::expm1(-lr2))};
}

double NoiseSchedule::drift(double t) const {
  check_time(t);
  switch (kind_) {
    case ScheduleKind::VpDiscrete: {
      const std::size_t k = segment(t);
      return 0.5 * static_cast<double>(betas_.size()) * std::log1p(-betas_[k - 1]);
    }
    case ScheduleKind::VpContinuous:
      return -0.5 * (beta_min_ + t * (beta_max_ - beta_min_));
    case ScheduleKind::Edm:
      return 0.0;
  }
  return 0.0;
}

double NoiseSchedule::diffusion_sq(double t) const {
  check_time(t);
  // Variance preservation d(r^2 sigma^2)/dt = 2 f r^2 sigma^2 + g^2 with
  // r^2 sigma^2 = 1 - r^2 gives g^2 = -2 f.
  if (kind_ == ScheduleKind::Edm) return 2.0 * t;
  return -2.0 * drift(t);
}

double NoiseSchedule::effective_beta(double t_lo, double t_hi) const {
  if (!(t_lo <= t_hi)) throw DomainError("effective_beta: require t_lo <= t_hi");
  if (kind_ == ScheduleKind::Edm) {
    // Variance-exploding analogue: incremental variance over total variance.
    const double hi = t_hi * t_hi;
    return hi > 0.0 ? (hi - t_lo * t_lo) / hi : 0.0;
  }
  return -std::expm1(log_r_squared(t_hi) - log_r_squared(t_lo));
}

MarginalParams marginal_params(const NoiseSchedule& schedule, double t) {
  return schedule.marginal(t);
}

}  // namespace madm
