#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace madm {

enum class ScheduleKind { VpDiscrete, VpContinuous, Edm };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

// Parameters of the forward conditional p_{t|0}(x_t | x_0) = N(r x_0, r^2 sigma^2 I).
struct MarginalParams {
  double r = 1.0;
  double sigma = 0.0;

  // Variance of the conditional, r^2 sigma^2.
  double variance() const { return r * r * sigma * sigma; }
};

/// Linearly interpolated DDPM betas: beta_1 = beta_min, beta_T = beta_max.
std::vector<double> beta_schedule(std::size_t steps, double beta_min, double beta_max);

/// Forward SDE dX = f_t X dt + g_t dB on t in [0, 1].
///
/// VP-discrete interpolates log(alpha_bar) linearly between the knots
/// t = k/T, so f_t and g_t are piecewise constant and the marginals are exact
/// at the knots. VP-continuous uses beta(t) = beta_min + t (beta_max - beta_min)
/// with f = -beta/2, g^2 = beta. EDM uses r = 1, sigma(t) = t.
///
/// Immutable after construction.
class NoiseSchedule {
 public:
  static NoiseSchedule vp_discrete(std::size_t steps, double beta_min, double beta_max);
  static NoiseSchedule vp_continuous(double beta_min = 0.1, double beta_max = 20.0);
  static NoiseSchedule edm();

  ScheduleKind kind() const { return kind_; }
  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }
  // Number of discrete steps T (0 for continuous kinds).
  std::size_t steps() const { return betas_.size(); }
  std::span<const double> betas() const { return betas_; }

  MarginalParams marginal(double t) const;
  // log r_t^2, i.e. log(alpha_bar) for VP kinds.
  double log_r_squared(double t) const;
  double drift(double t) const;         // f_t
  double diffusion_sq(double t) const;  // g_t^2
  // Effective one-step beta between two times t_lo < t_hi: 1 - (r_hi / r_lo)^2.
  // For VP-discrete with knots k/T and k-1/T this is exactly beta_k.
  double effective_beta(double t_lo, double t_hi) const;

 private:
  NoiseSchedule() = default;
  std::size_t segment(double t) const;

  ScheduleKind kind_ = ScheduleKind::VpDiscrete;
  double beta_min_ = 0.0;
  double beta_max_ = 0.0;
  std::vector<double> betas_;
  std::vector<double> log_alpha_bar_;  // size T + 1, log_alpha_bar_[0] = 0
};

MarginalParams marginal_params(const NoiseSchedule& schedule, double t);

}  // namespace madm
