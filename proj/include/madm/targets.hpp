#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "madm/linalg.hpp"
#include "madm/schedule.hpp"

namespace madm {

struct Dataset2D;

// Tweedie form of a score: s(x, t) = (r d(x, t) - x) / variance with
// ||d(x, t)|| <= bound.
struct DenoiserBound {
  double bound = 0.0;     // b
  double r = 1.0;         // r_t
  double variance = 1.0;  // r_t^2 sigma_t^2
};

/// Target family p_t known through its score.
///
/// Implementations are immutable and shared read-only across chains; the
/// optional capabilities (exact log-density, denoiser bound, Lipschitz
/// constant) default to absent.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual Vector score(const Vector& x, double t) const = 0;

  virtual bool has_log_density() const { return false; }
  // Exact log-density up to an additive constant independent of x.
  virtual double log_density(const Vector& x, double t) const;

  virtual std::optional<DenoiserBound> denoiser(double /*t*/) const { return std::nullopt; }
  virtual std::optional<double> lipschitz(double /*t*/) const { return std::nullopt; }

  // True when s(., t) is affine, so the line integrand is affine in u and
  // attains its maximum modulus at an endpoint.
  virtual bool affine_score() const { return false; }
  // False when p_t depends on t.
  virtual bool time_invariant() const { return true; }
  // False where p_t has no density, e.g. an empirical measure at sigma_t = 0.
  virtual bool defined_at(double /*t*/) const { return true; }
};

using ScoreModelPtr = std::shared_ptr<const ScoreModel>;

/// Counting handle on a shared ScoreModel.
///
/// Each chain owns its own oracle (see fork()), so the counter needs no
/// synchronisation; run totals are merged in chain order.
class ScoreOracle {
 public:
  explicit ScoreOracle(ScoreModelPtr model);

  Vector score(const Vector& x, double t);
  std::uint64_t queries() const { return queries_; }
  void reset_queries() { queries_ = 0; }
  ScoreOracle fork() const { return ScoreOracle(model_); }

  const ScoreModel& model() const { return *model_; }
  const ScoreModelPtr& model_ptr() const { return model_; }
  Index dim() const { return model_->dim(); }

  bool has_log_density() const { return model_->has_log_density(); }
  double log_density(const Vector& x, double t) const { return model_->log_density(x, t); }
  std::optional<double> denoiser_bound(double t) const;
  std::optional<double> lipschitz(double t) const { return model_->lipschitz(t); }

 private:
  ScoreModelPtr model_;
  std::uint64_t queries_ = 0;
};

// N(mean, variance I); time-invariant.
ScoreModelPtr gaussian_model(Vector mean, double variance);
ScoreOracle gaussian_oracle(Vector mean, double variance);

// 1D target with log p = -x^4 / (4 scale) - perturbation cos(x).
ScoreModelPtr quartic_model(double scale, double perturbation = 0.0);
ScoreOracle quartic_oracle(double scale);

// Gaussian data N(mean, data_variance I) pushed through the forward SDE:
// p_t = N(r_t mean, r_t^2 (data_variance + sigma_t^2) I).
ScoreModelPtr diffused_gaussian_model(Vector mean, double data_variance, NoiseSchedule schedule);

// p_t = (1/n) sum_i N(r_t x0_i, r_t^2 sigma_t^2 I) over the columns of data.
ScoreModelPtr diffused_empirical_model(Matrix data, NoiseSchedule schedule);
ScoreModelPtr diffused_empirical_model(const Dataset2D& data, NoiseSchedule schedule);
ScoreOracle diffused_empirical_oracle(const Dataset2D& data, NoiseSchedule schedule);

}  // namespace madm
