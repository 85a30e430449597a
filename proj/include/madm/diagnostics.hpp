#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "madm/datasets.hpp"
#include "madm/linalg.hpp"

namespace madm {

// Mean of ||x_{i+1} - x_i||^2 over consecutive states (one per column, or
// one scalar per entry). Needs at least two states.
double esjd(const Matrix& chain);
double esjd(const std::vector<Vector>& chain);
double esjd(const std::vector<double>& chain);

double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double lag1_autocorrelation(const std::vector<double>& xs);

// Mean and batch-means standard error of a correlated series.
struct BatchMeans {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t batches = 0;
};

BatchMeans batch_means(const std::vector<double>& series, std::size_t batches = 50);

// Variance of a stationary trace with a batch-means standard error, from the
// series of squared deviations about the overall mean.
BatchMeans stationary_variance(const std::vector<double>& trace, std::size_t batches = 50);

/// A(l) = E[1 / (1 + exp(-W))] with W ~ N(-s^2 / 2, s^2), s^2 = l^6 / 16.
///
/// Gauss–Hermite quadrature with 128 nodes for s <= 2. Beyond that the
/// logistic is a near-step on the scale of W and Hermite nodes resolve it
/// poorly, so A is split into P(W > 0) plus a Gauss–Legendre correction.
double barker_limit_A(double ell);

// Gauss–Hermite nodes and weights for weight exp(-x^2) (Golub–Welsch).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t n);
// Gauss–Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n);

struct ScalingPoint {
  double ell = 0.0;
  double acceptance = 0.0;  // A(l)
  double efficiency = 0.0;  // l^2 A(l)
};

struct ScalingCurve {
  std::vector<ScalingPoint> points;
  ScalingPoint best;  // argmax of the efficiency, refined when the grid brackets it
};

ScalingCurve optimal_scaling_curve(const std::vector<double>& ell_grid);

// Golden-section maximiser of l^2 A(l) on [lo, hi].
double maximise_efficiency(double lo, double hi, double tol = 1e-10);

enum class ScalingDecision { Barker, TwoCoin };

std::string to_string(ScalingDecision decision);
ScalingDecision scaling_decision_from_string(const std::string& name);

struct EmpiricalScalingPoint {
  std::size_t dim = 0;
  double ell = 0.0;
  double h = 0.0;
  std::size_t proposals = 0;
  double acceptance = 0.0;
  double acceptance_se = 0.0;
  // Mean Barker probability over the same proposals; lower-variance estimate
  // of the acceptance rate.
  double mean_barker_probability = 0.0;
  double esjd = 0.0;
  double mean_rounds = 0.0;
  double mean_queries = 0.0;  // per proposal, including the proposal's own score
};

/// Barker-adjusted Langevin chain on N(0, I_d) with h = l^2 d^{-1/3},
/// started in stationarity. The two-coin decision uses the tight endpoint
/// bound and the lazy product; it can raise NonTerminationError.
EmpiricalScalingPoint empirical_scaling(std::size_t dim, double ell, std::size_t proposals, ScalingDecision decision,
                                        std::uint64_t seed, std::uint64_t max_rounds = 1'000'000);

struct ContainmentResult {
  double quantile_distance = 0.0;
  double mean_distance = 0.0;
  std::vector<double> distances;  // per sample, in sample order
};

// Nearest-neighbour distance from each sample to the reference cloud via a
// uniform grid index (2D) or brute force (other dimensions).
std::vector<double> nearest_distances(const Matrix& samples, const Matrix& reference);
std::vector<double> nearest_distances_brute(const Matrix& samples, const Matrix& reference);

// Nearest-rank quantile: the ceil(q n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

ContainmentResult containment_distance(const Matrix& samples, const Matrix& reference, double q = 0.95);

struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Least-squares slope of log(error) against log(h).
///
/// Non-positive errors raise DomainError unless `floor` > 0, in which case
/// errors are clamped up to it first.
OrderFit order_fit(const std::vector<std::pair<double, double>>& pairs, double floor = 0.0);

}  // namespace madm
