#include "madm/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "madm/adjust_quadrature.hpp"
#include "madm/error.hpp"
#include "madm/sampler.hpp"

namespace madm {

double esjd(const Matrix& chain) {
  if (chain.cols() < 2) throw DomainError("esjd: need at least two states");
  double sum = 0.0;
  for (Index i = 1; i < chain.cols(); ++i) sum += (chain.col(i) - chain.col(i - 1)).squaredNorm();
  return sum / static_cast<double>(chain.cols() - 1);
}

double esjd(const std::vector<Vector>& chain) {
  if (chain.size() < 2) throw DomainError("esjd: need at least two states");
  double sum = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) sum += (chain[i] - chain[i - 1]).squaredNorm();
  return sum / static_cast<double>(chain.size() - 1);
}

double esjd(const std::vector<double>& chain) {
  if (chain.size() < 2) throw DomainError("esjd: need at least two states");
  double sum = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i) sum += (chain[i] - chain[i - 1]) * (chain[i] - chain[i - 1]);
  return sum / static_cast<double>(chain.size() - 1);
}

double sample_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("sample_mean: empty series");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw DomainError("sample_variance: need at least two values");
  const double m = sample_mean(xs);
  double sum = 0.0;
  for (double x : xs) sum += (x - m) * (x - m);
  return sum / static_cast<double>(xs.size());
}

double lag1_autocorrelation(const std::vector<double>& xs) {
  if (xs.size() < 3) throw DomainError("lag1_autocorrelation: need at least three values");
  const double m = sample_mean(xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    den += (xs[i] - m) * (xs[i] - m);
    if (i > 0) num += (xs[i] - m) * (xs[i - 1] - m);
  }
  return den > 0.0 ? num / den : 0.0;
}

BatchMeans batch_means(const std::vector<double>& series, std::size_t batches) {
  if (batches < 2) throw DomainError("batch_means: need at least two batches");
  if (series.size() < batches) throw DomainError("batch_means: fewer values than batches");
  const std::size_t size = series.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::size_t i = b * size; i < (b + 1) * size; ++i) sum += series[i];
    means[b] = sum / static_cast<double>(size);
  }
  BatchMeans out;
  out.batches = batches;
  out.mean = sample_mean(means);
  double ss = 0.0;
  for (double m : means) ss += (m - out.mean) * (m - out.mean);
  out.standard_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return out;
}

BatchMeans stationary_variance(const std::vector<double>& trace, std::size_t batches) {
  const double m = sample_mean(trace);
  std::vector<double> sq(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) sq[i] = (trace[i] - m) * (trace[i] - m);
  return batch_means(sq, batches);
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite(std::size_t n) {
  if (n < 1) throw DomainError("gauss_hermite: need at least one node");
  Matrix jacobi = Matrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k) / 2.0);
    jacobi(static_cast<Index>(k), static_cast<Index>(k - 1)) = b;
    jacobi(static_cast<Index>(k - 1), static_cast<Index>(k)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  std::vector<double> nodes(n), weights(n);
  const double mass = std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()[static_cast<Index>(i)];
    const double v = solver.eigenvectors()(0, static_cast<Index>(i));
    weights[i] = mass * v * v;
  }
  return {nodes, weights};
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  Matrix jacobi = Matrix::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const auto kd = static_cast<double>(k);
    const double b = kd / std::sqrt(4.0 * kd * kd - 1.0);
    jacobi(static_cast<Index>(k), static_cast<Index>(k - 1)) = b;
    jacobi(static_cast<Index>(k - 1), static_cast<Index>(k)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  std::vector<double> nodes(n), weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()[static_cast<Index>(i)];
    const double v = solver.eigenvectors()(0, static_cast<Index>(i));
    weights[i] = 2.0 * v * v;
  }
  return {nodes, weights};
}

namespace {

const std::pair<std::vector<double>, std::vector<double>>& hermite_rule() {
  static const auto rule = gauss_hermite(128);
  return rule;
}

const std::pair<std::vector<double>, std::vector<double>>& legendre_rule() {
  static const auto rule = gauss_legendre(32);
  return rule;
}

// E[1 / (1 + exp(-W)) - 1{W > 0}] for W ~ N(mu, sd^2). The integrand decays
// like exp(-|w|), so [-48, 48] split at the jump carries all the mass.
double logistic_step_gap(double mu, double sd) {
  const auto& [nodes, weights] = legendre_rule();
  const int panels = 12;
  const double reach = 48.0, width = reach / panels;
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = k * width;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double w = a + 0.5 * width * (nodes[i] + 1.0);
      // Positive side: f(w) - 1 = -1 / (1 + e^w); negative side: f(-w).
      const double gap = 1.0 / (1.0 + std::exp(w));
      const double up = std::exp(-0.5 * (w - mu) * (w - mu) / (sd * sd));
      const double down = std::exp(-0.5 * (w + mu) * (w + mu) / (sd * sd));
      sum += 0.5 * width * weights[i] * gap * (down - up);
    }
  }
  return norm * sum;
}

}  // namespace

double barker_limit_A(double ell) {
  if (!(ell > 0.0)) throw DomainError("barker_limit_A: ell must be positive");
  const double var = std::pow(ell, 6) / 16.0;
  const double sd = std::sqrt(var);
  if (sd > 2.0) {
    // The logistic is steep on the scale of W; integrate it as a step plus
    // an exponentially small correction.
    return 0.5 * std::erfc(0.5 * sd / std::numbers::sqrt2) + logistic_step_gap(-0.5 * var, sd);
  }
  const auto& [nodes, weights] = hermite_rule();
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double w = -0.5 * var + std::numbers::sqrt2 * sd * nodes[i];
    sum += weights[i] * barker_acceptance(w);
  }
  return sum / std::sqrt(std::numbers::pi);
}

double maximise_efficiency(double lo, double hi, double tol) {
  if (!(lo > 0.0 && lo < hi)) throw DomainError("maximise_efficiency: need 0 < lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eff = [](double l) { return l * l * barker_limit_A(l); };
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = eff(c), fd = eff(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eff(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eff(d);
    }
  }
  return 0.5 * (a + b);
}

ScalingCurve optimal_scaling_curve(const std::vector<double>& ell_grid) {
  if (ell_grid.empty()) throw DomainError("optimal_scaling_curve: empty grid");
  ScalingCurve curve;
  std::size_t best = 0;
  for (std::size_t i = 0; i < ell_grid.size(); ++i) {
    const double l = ell_grid[i];
    if (!(l > 0.0)) throw DomainError("optimal_scaling_curve: grid values must be positive");
    const double a = barker_limit_A(l);
    curve.points.push_back({l, a, l * l * a});
    if (curve.points[i].efficiency > curve.points[best].efficiency) best = i;
  }
  curve.best = curve.points[best];
  const bool sorted = std::is_sorted(ell_grid.begin(), ell_grid.end());
  if (sorted && best > 0 && best + 1 < ell_grid.size()) {
    const double l = maximise_efficiency(ell_grid[best - 1], ell_grid[best + 1]);
    const double a = barker_limit_A(l);
    if (l * l * a >= curve.best.efficiency) curve.best = {l, a, l * l * a};
  }
  return curve;
}

std::string to_string(ScalingDecision decision) {
  return decision == ScalingDecision::Barker ? "barker" : "two-coin";
}

ScalingDecision scaling_decision_from_string(const std::string& name) {
  if (name == "barker") return ScalingDecision::Barker;
  if (name == "two-coin") return ScalingDecision::TwoCoin;
  throw ConfigError("unknown scaling decision '" + name + "' (expected barker, two-coin)");
}

EmpiricalScalingPoint empirical_scaling(std::size_t dim, double ell, std::size_t proposals, ScalingDecision decision,
                                        std::uint64_t seed, std::uint64_t max_rounds) {
  if (dim < 1 || proposals < 1) throw DomainError("empirical_scaling: dim and proposals must be positive");
  const auto d = static_cast<Index>(dim);
  const double h = ell * ell * std::pow(static_cast<double>(dim), -1.0 / 3.0);
  ScoreOracle oracle = gaussian_oracle(Vector::Zero(d), 1.0);
  Rng rng(seed, dim);

  CorrectorSpec spec;
  spec.kind = decision == ScalingDecision::Barker ? CorrectorKind::OracleBarker : CorrectorKind::TwoCoin;
  spec.bound = {BoundStrategy::AffineEndpoint, {}};
  spec.two_coin = {max_rounds, true};

  EmpiricalScalingPoint out;
  out.dim = dim;
  out.ell = ell;
  out.h = h;
  out.proposals = proposals;
  Vector x = rng.normal_vector(d);
  Vector s = oracle.score(x, 0.0);
  const std::uint64_t start_queries = oracle.queries();
  double accepted = 0.0, barker = 0.0, jumps = 0.0, rounds = 0.0;
  for (std::size_t i = 0; i < proposals; ++i) {
    const LangevinProposal p = ula_propose_from(x, s, rng.normal_vector(d), oracle, 0.0, h);
    barker += barker_acceptance(exact_log_acceptance_ratio(p, oracle));
    const Decision dec = corrector_decision(spec, p, oracle, rng);
    rounds += static_cast<double>(dec.rounds);
    if (dec.accepted()) {
      accepted += 1.0;
      jumps += p.delta.squaredNorm();
      x = p.x_new;
      s = p.score_new;
    }
  }
  const double n = static_cast<double>(proposals);
  out.acceptance = accepted / n;
  out.acceptance_se = std::sqrt(out.acceptance * (1.0 - out.acceptance) / n);
  out.mean_barker_probability = barker / n;
  out.esjd = jumps / n;
  out.mean_rounds = rounds / n;
  out.mean_queries = static_cast<double>(oracle.queries() - start_queries) / n;
  return out;
}

std::vector<double> nearest_distances_brute(const Matrix& samples, const Matrix& reference) {
  if (samples.cols() == 0 || reference.cols() == 0) throw DomainError("nearest distances: empty point set");
  if (samples.rows() != reference.rows()) throw DomainError("nearest distances: dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(samples.cols()));
  for (Index i = 0; i < samples.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < reference.cols(); ++j) best = std::min(best, (samples.col(i) - reference.col(j)).squaredNorm());
    out[static_cast<std::size_t>(i)] = std::sqrt(best);
  }
  return out;
}

namespace {

// Uniform bucket grid over the bounding box of a 2D reference cloud.
class GridIndex {
 public:
  explicit GridIndex(const Matrix& ref) : ref_(ref) {
    lo_ = ref.rowwise().minCoeff();
    const Eigen::Vector2d hi = ref.rowwise().maxCoeff();
    const auto n = static_cast<double>(ref.cols());
    side_ = std::max<Index>(1, static_cast<Index>(std::sqrt(n / 2.0)));
    const Eigen::Vector2d span = (hi - lo_).cwiseMax(1e-12);
    cell_ = span / static_cast<double>(side_);
    start_.assign(static_cast<std::size_t>(side_ * side_ + 1), 0);
    std::vector<Index> cell_of(static_cast<std::size_t>(ref.cols()));
    for (Index j = 0; j < ref.cols(); ++j) {
      const auto [cx, cy] = cell_coords(ref.col(j));
      cell_of[static_cast<std::size_t>(j)] = cx * side_ + cy;
      ++start_[static_cast<std::size_t>(cx * side_ + cy + 1)];
    }
    for (std::size_t k = 1; k < start_.size(); ++k) start_[k] += start_[k - 1];
    order_.resize(static_cast<std::size_t>(ref.cols()));
    std::vector<Index> fill(start_.begin(), start_.end() - 1);
    for (Index j = 0; j < ref.cols(); ++j) order_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[static_cast<std::size_t>(j)])]++)] = j;
  }

  double nearest(const Eigen::Vector2d& q) const {
    const auto [cx, cy] = cell_coords(q);
    const double step = std::min(cell_.x(), cell_.y());
    double best = std::numeric_limits<double>::infinity();
    for (Index ring = 0; ring <= side_; ++ring) {
      for (Index i = cx - ring; i <= cx + ring; ++i) {
        if (i < 0 || i >= side_) continue;
        const bool edge_row = (i == cx - ring || i == cx + ring);
        for (Index j = cy - ring; j <= cy + ring; ++j) {
          if (j < 0 || j >= side_) continue;
          if (!edge_row && j != cy - ring && j != cy + ring) continue;
          scan(i * side_ + j, q, best);
        }
      }
      // Every unvisited cell is at least `ring` cells away from q's cell.
      const double reach = static_cast<double>(ring) * step;
      if (best <= reach * reach) break;
    }
    return std::sqrt(best);
  }

 private:
  std::pair<Index, Index> cell_coords(const Eigen::Vector2d& p) const {
    auto coord = [&](int axis) {
      const double v = std::floor((p[axis] - lo_[axis]) / cell_[axis]);
      if (!(v >= 0.0)) return Index{0};
      return std::min<Index>(side_ - 1, static_cast<Index>(std::min(v, 1e15)));
    };
    return {coord(0), coord(1)};
  }

  void scan(Index cell, const Eigen::Vector2d& q, double& best) const {
    for (Index k = start_[static_cast<std::size_t>(cell)]; k < start_[static_cast<std::size_t>(cell + 1)]; ++k)
      best = std::min(best, (ref_.col(order_[static_cast<std::size_t>(k)]) - q).squaredNorm());
  }

  const Matrix& ref_;
  Eigen::Vector2d lo_;
  Eigen::Vector2d cell_;
  Index side_ = 1;
  std::vector<Index> start_;
  std::vector<Index> order_;
};

}  // namespace

std::vector<double> nearest_distances(const Matrix& samples, const Matrix& reference) {
  if (samples.cols() == 0 || reference.cols() == 0) throw DomainError("nearest distances: empty point set");
  if (samples.rows() != reference.rows()) throw DomainError("nearest distances: dimension mismatch");
  if (samples.rows() != 2) return nearest_distances_brute(samples, reference);
  const GridIndex index(reference);
  std::vector<double> out(static_cast<std::size_t>(samples.cols()));
  for (Index i = 0; i < samples.cols(); ++i) out[static_cast<std::size_t>(i)] = index.nearest(samples.col(i));
  return out;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty set");
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in (0, 1]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

ContainmentResult containment_distance(const Matrix& samples, const Matrix& reference, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("containment_distance: q must lie in (0, 1]");
  ContainmentResult out;
  out.distances = nearest_distances(samples, reference);
  out.quantile_distance = nearest_rank_quantile(out.distances, q);
  out.mean_distance = sample_mean(out.distances);
  return out;
}

OrderFit order_fit(const std::vector<std::pair<double, double>>& pairs, double floor) {
  if (pairs.size() < 4) throw DomainError("order_fit: need at least four (h, error) pairs");
  std::vector<double> lx, ly;
  for (const auto& [h, err] : pairs) {
    if (!(h > 0.0)) throw DomainError("order_fit: step sizes must be positive");
    double e = err;
    if (floor > 0.0) {
      e = std::max(e, floor);
    } else if (!(e > 0.0)) {
      throw DomainError("order_fit: non-positive error " + std::to_string(err) + " (pass an error floor)");
    }
    lx.push_back(std::log(h));
    ly.push_back(std::log(e));
  }
  const double mx = sample_mean(lx), my = sample_mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("order_fit: step sizes must not all be equal");
  OrderFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double res = ly[i] - (fit.intercept + fit.slope * lx[i]);
    rss += res * res;
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(lx.size()));
  return fit;
}

}  // namespace madm
