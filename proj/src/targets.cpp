#include "madm/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "madm/datasets.hpp"
#include "madm/error.hpp"

namespace madm {

double ScoreModel::log_density(const Vector& /*x*/, double /*t*/) const {
  throw ConfigError("target '" + name() + "' does not expose a log-density");
}

ScoreOracle::ScoreOracle(ScoreModelPtr model) : model_(std::move(model)) {
  if (!model_) throw ConfigError("ScoreOracle requires a model");
}

Vector ScoreOracle::score(const Vector& x, double t) {
  ++queries_;
  return model_->score(x, t);
}

std::optional<double> ScoreOracle::denoiser_bound(double t) const {
  if (auto d = model_->denoiser(t)) return d->bound;
  return std::nullopt;
}

namespace {

class GaussianModel final : public ScoreModel {
 public:
  GaussianModel(Vector mean, double variance) : mean_(std::move(mean)), variance_(variance) {
    if (!(variance > 0.0)) throw DomainError("gaussian target: variance must be positive");
    if (mean_.size() == 0) throw DomainError("gaussian target: mean must be nonempty");
  }

  std::string name() const override { return "gaussian"; }
  Index dim() const override { return mean_.size(); }
  Vector score(const Vector& x, double) const override { return (mean_ - x) / variance_; }
  bool has_log_density() const override { return true; }
  double log_density(const Vector& x, double) const override {
    return -0.5 * (x - mean_).squaredNorm() / variance_;
  }
  std::optional<DenoiserBound> denoiser(double) const override {
    return DenoiserBound{mean_.norm(), 1.0, variance_};
  }
  std::optional<double> lipschitz(double) const override { return 1.0 / variance_; }
  bool affine_score() const override { return true; }

 private:
  Vector mean_;
  double variance_;
};

class QuarticModel final : public ScoreModel {
 public:
  QuarticModel(double scale, double perturbation) : scale_(scale), perturbation_(perturbation) {
    if (!(scale > 0.0)) throw DomainError("quartic target: scale must be positive");
  }

  std::string name() const override { return perturbation_ == 0.0 ? "quartic" : "quartic-perturbed"; }
  Index dim() const override { return 1; }
  Vector score(const Vector& x, double) const override {
    Vector s(1);
    const double v = x[0];
    s[0] = -v * v * v / scale_ + perturbation_ * std::sin(v);
    return s;
  }
  bool has_log_density() const override { return true; }
  double log_density(const Vector& x, double) const override {
    const double v2 = x[0] * x[0];
    return -v2 * v2 / (4.0 * scale_) - perturbation_ * std::cos(x[0]);
  }

 private:
  double scale_;
  double perturbation_;
};

class DiffusedGaussianModel final : public ScoreModel {
 public:
  DiffusedGaussianModel(Vector mean, double data_variance, NoiseSchedule schedule)
      : mean_(std::move(mean)), data_variance_(data_variance), schedule_(std::move(schedule)) {
    if (!(data_variance > 0.0)) throw DomainError("diffused gaussian: data variance must be positive");
  }

  std::string name() const override { return "diffused-gaussian"; }
  Index dim() const override { return mean_.size(); }
  Vector score(const Vector& x, double t) const override {
    const auto [r, var] = params(t);
    return (r * mean_ - x) / var;
  }
  bool has_log_density() const override { return true; }
  double log_density(const Vector& x, double t) const override {
    const auto [r, var] = params(t);
    return -0.5 * (x - r * mean_).squaredNorm() / var -
           0.5 * static_cast<double>(dim()) * std::log(var);
  }
  std::optional<double> lipschitz(double t) const override { return 1.0 / params(t).second; }
  bool affine_score() const override { return true; }
  bool time_invariant() const override { return false; }

 private:
  std::pair<double, double> params(double t) const {
    const auto m = schedule_.marginal(t);
    return {m.r, m.r * m.r * (data_variance_ + m.sigma * m.sigma)};
  }

  Vector mean_;
  double data_variance_;
  NoiseSchedule schedule_;
};

class DiffusedEmpiricalModel final : public ScoreModel {
 public:
  DiffusedEmpiricalModel(Matrix data, NoiseSchedule schedule)
      : data_(std::move(data)), schedule_(std::move(schedule)) {
    if (data_.cols() == 0 || data_.rows() == 0)
      throw DomainError("diffused empirical target: dataset must be nonempty");
    if (!data_.allFinite()) throw DomainError("diffused empirical target: non-finite data");
    bound_ = data_.colwise().norm().maxCoeff();
    // Exact diameter; the posterior covariance of the component means is
    // bounded by diameter^2 / 4 in every direction.
    double diam_sq = 0.0;
    for (Index i = 0; i < data_.cols(); ++i)
      for (Index j = i + 1; j < data_.cols(); ++j)
        diam_sq = std::max(diam_sq, (data_.col(i) - data_.col(j)).squaredNorm());
    diameter_sq_ = diam_sq;
  }

  std::string name() const override { return "diffused-empirical"; }
  Index dim() const override { return data_.rows(); }

  Vector score(const Vector& x, double t) const override {
    const auto [r, var] = params(t);
    const auto& w = component_weights(x, r, var);
    const Vector weighted = data_ * w.matrix();
    return (r * weighted / w.sum() - x) / var;
  }

  bool has_log_density() const override { return true; }
  double log_density(const Vector& x, double t) const override {
    const auto [r, var] = params(t);
    double nearest = 0.0;
    const auto& w = component_weights(x, r, var, &nearest);
    const double lse = -0.5 * nearest / var + std::log(w.sum());
    return lse - std::log(static_cast<double>(data_.cols())) -
           0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi * var);
  }

  std::optional<DenoiserBound> denoiser(double t) const override {
    const auto [r, var] = params(t);
    return DenoiserBound{bound_, r, var};
  }

  std::optional<double> lipschitz(double t) const override {
    const auto [r, var] = params(t);
    // Hessian of log p_t = -I / var + Cov_w(r x0) / var^2.
    const double spread = r * r * diameter_sq_ / 4.0 / (var * var);
    return std::max(1.0 / var, spread - 1.0 / var);
  }

  bool time_invariant() const override { return false; }
  bool defined_at(double t) const override { return schedule_.marginal(t).variance() > 0.0; }

 private:
  // exp(-(||x - r x0_j||^2 - min_k ||x - r x0_k||^2) / (2 var)) for every
  // component, in a per-thread scratch buffer.
  const Eigen::ArrayXd& component_weights(const Vector& x, double r, double var, double* nearest = nullptr) const {
    thread_local Eigen::ArrayXd buffer;
    buffer = ((r * data_).colwise() - x).colwise().squaredNorm().transpose().array();
    const double min_sq = buffer.minCoeff();
    buffer = ((buffer - min_sq) * (-0.5 / var)).exp();
    if (nearest) *nearest = min_sq;
    return buffer;
  }

  std::pair<double, double> params(double t) const {
    const auto m = schedule_.marginal(t);
    const double var = m.variance();
    if (!(var > 0.0))
      throw DegenerateMixtureError("diffused empirical target: sigma_t = 0 at t = " + std::to_string(t) +
                                   " (mixture collapses to atoms)");
    return {m.r, var};
  }

  Matrix data_;
  NoiseSchedule schedule_;
  double bound_ = 0.0;
  double diameter_sq_ = 0.0;
};

}  // namespace

ScoreModelPtr gaussian_model(Vector mean, double variance) {
  return std::make_shared<GaussianModel>(std::move(mean), variance);
}

ScoreOracle gaussian_oracle(Vector mean, double variance) {
  return ScoreOracle(gaussian_model(std::move(mean), variance));
}

ScoreModelPtr quartic_model(double scale, double perturbation) {
  return std::make_shared<QuarticModel>(scale, perturbation);
}

ScoreOracle quartic_oracle(double scale) { return ScoreOracle(quartic_model(scale)); }

ScoreModelPtr diffused_gaussian_model(Vector mean, double data_variance, NoiseSchedule schedule) {
  return std::make_shared<DiffusedGaussianModel>(std::move(mean), data_variance, std::move(schedule));
}

ScoreModelPtr diffused_empirical_model(Matrix data, NoiseSchedule schedule) {
  return std::make_shared<DiffusedEmpiricalModel>(std::move(data), std::move(schedule));
}

ScoreModelPtr diffused_empirical_model(const Dataset2D& data, NoiseSchedule schedule) {
  return diffused_empirical_model(Matrix(data.points), std::move(schedule));
}

ScoreOracle diffused_empirical_oracle(const Dataset2D& data, NoiseSchedule schedule) {
  return ScoreOracle(diffused_empirical_model(data, std::move(schedule)));
}

}  // namespace madm
