#include <cmath>

#include "doctest.h"
#include "madm/datasets.hpp"
#include "madm/error.hpp"
#include "madm/random.hpp"
#include "madm/targets.hpp"

using namespace madm;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Central differences of the log-density, the finite-difference oracle.
Vector fd_gradient(const ScoreModel& m, const Vector& x, double t, double eps = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += eps;
    lo[i] -= eps;
    g[i] = (m.log_density(hi, t) - m.log_density(lo, t)) / (2.0 * eps);
  }
  return g;
}

double mixture_log_density(const Matrix& data, double r, double var, const Vector& x) {
  // Plain sum without shifting; only used where the exponents are moderate.
  double sum = 0.0;
  for (Index j = 0; j < data.cols(); ++j) sum += std::exp(-0.5 * (x - r * data.col(j)).squaredNorm() / var);
  return std::log(sum / static_cast<double>(data.cols()));
}

}  // namespace

TEST_CASE("gaussian oracle score and density ratio") {
  auto g = gaussian_oracle(Vector::Zero(1), 1.0);
  CHECK(g.score(vec({0.0}), 0.0)[0] == 0.0);
  CHECK(g.score(vec({2.0}), 0.0)[0] == -2.0);
  CHECK(g.queries() == 2);
  const double log_r = g.log_density(vec({1.0}), 0.0) - g.log_density(vec({0.0}), 0.0);
  CHECK(std::exp(log_r) == doctest::Approx(0.6065306597126334).epsilon(1e-14));
  CHECK(*g.lipschitz(0.0) == 1.0);
  REQUIRE(g.model().denoiser(0.0).has_value());
}

TEST_CASE("gaussian oracle rejects non-positive variance") {
  CHECK_THROWS_AS(gaussian_oracle(Vector::Zero(2), 0.0), DomainError);
}

TEST_CASE("quartic oracle") {
  auto q = quartic_oracle(1.0);
  CHECK(q.score(vec({0.0}), 0.0)[0] == 0.0);
  CHECK(q.score(vec({1.0}), 0.0)[0] == -1.0);
  CHECK(q.log_density(vec({1.0}), 0.0) - q.log_density(vec({0.0}), 0.0) == doctest::Approx(-0.25));
}

TEST_CASE("scores equal finite-difference gradients") {
  Rng rng(11);
  const auto schedule = NoiseSchedule::vp_discrete(20, 0.005, 0.5);
  Matrix data(2, 3);
  data << 0.5, -1.0, 1.5, 0.3, 0.8, -1.2;
  const ScoreModelPtr models[] = {
      gaussian_model(vec({0.3, -0.2}), 1.7),
      quartic_model(1.0, 0.1),
      diffused_empirical_model(data, schedule),
      diffused_gaussian_model(vec({1.0, -1.0}), 0.5, schedule),
  };
  for (const auto& m : models) {
    CAPTURE(m->name());
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = rng.normal_vector(m->dim());
      const double t = 0.2 + 0.6 * rng.uniform();
      const Vector s = m->score(x, t);
      const Vector fd = fd_gradient(*m, x, t);
      CHECK((s - fd).norm() <= 1e-5 * std::max(1.0, s.norm()));
    }
  }
}

TEST_CASE("diffused empirical oracle against the plain mixture formula") {
  const auto schedule = NoiseSchedule::vp_discrete(20, 0.005, 0.5);
  Matrix data(2, 3);
  data << 0.5, -1.0, 1.5, 0.3, 0.8, -1.2;
  auto m = diffused_empirical_model(data, schedule);
  const double t = 0.45;
  const auto mp = schedule.marginal(t);
  Rng rng(5);
  const Vector a = rng.normal_vector(2);
  const Vector b = rng.normal_vector(2);
  const double exact = mixture_log_density(data, mp.r, mp.variance(), b) -
                       mixture_log_density(data, mp.r, mp.variance(), a);
  CHECK(m->log_density(b, t) - m->log_density(a, t) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("single-point mixture reduces to a gaussian") {
  const auto schedule = NoiseSchedule::vp_discrete(10, 0.01, 0.6);
  auto m = diffused_empirical_model(Matrix::Zero(2, 1), schedule);
  const double t = 0.5;
  const double var = schedule.marginal(t).variance();
  auto g = gaussian_model(Vector::Zero(2), var);
  const Vector x = vec({0.7, -1.3});
  CHECK((m->score(x, t) - g->score(x, t)).norm() < 1e-14);
}

TEST_CASE("symmetric two-point mixture has zero score at the origin") {
  Matrix data(2, 2);
  data << 1.0, -1.0, 0.5, -0.5;
  auto m = diffused_empirical_model(data, NoiseSchedule::vp_discrete(10, 0.01, 0.6));
  CHECK(m->score(Vector::Zero(2), 0.4).norm() < 1e-15);
}

TEST_CASE("mixture score is finite far from the data and at tiny noise") {
  const auto data = generate_dataset(DatasetName::Checkerboard, 200, 3);
  const auto schedule = NoiseSchedule::vp_discrete(1000, 1e-4, 0.02);
  auto oracle = diffused_empirical_oracle(data, schedule);
  const Vector far = vec({1000.0, -1000.0});
  for (double t : {1e-3, 0.01, 0.5, 1.0}) {
    const Vector s = oracle.score(far, t);
    CHECK(s.allFinite());
    CHECK(std::isfinite(oracle.log_density(far, t)));
  }
}

TEST_CASE("mixture at t = 0 is degenerate") {
  auto m = diffused_empirical_model(Matrix::Zero(2, 1), NoiseSchedule::vp_discrete(10, 0.01, 0.6));
  CHECK_THROWS_AS(m->score(Vector::Zero(2), 0.0), DegenerateMixtureError);
}

TEST_CASE("mixture denoiser bound is the largest data norm") {
  Matrix data(2, 3);
  data << 3.0, 0.0, 1.0, 4.0, 1.0, 1.0;
  auto m = diffused_empirical_model(data, NoiseSchedule::vp_discrete(10, 0.01, 0.6));
  const auto d = m->denoiser(0.5);
  REQUIRE(d.has_value());
  CHECK(d->bound == doctest::Approx(5.0));
}

TEST_CASE("query counter counts score calls only") {
  auto g = gaussian_oracle(Vector::Zero(3), 1.0);
  for (int i = 0; i < 7; ++i) g.score(Vector::Ones(3), 0.0);
  g.log_density(Vector::Ones(3), 0.0);
  CHECK(g.queries() == 7);
  auto child = g.fork();
  CHECK(child.queries() == 0);
  g.reset_queries();
  CHECK(g.queries() == 0);
}

TEST_CASE("datasets are deterministic and well-formed") {
  for (auto name : {DatasetName::Spiral, DatasetName::Funnel, DatasetName::Sierpinski, DatasetName::Pinwheel,
                    DatasetName::Checkerboard}) {
    CAPTURE(to_string(name));
    const auto a = generate_dataset(name, 500, 42);
    const auto b = generate_dataset(name, 500, 42);
    CHECK(a.size() == 500);
    CHECK(a.points == b.points);
    CHECK(a.points.allFinite());
    for (Index j = 0; j < a.points.cols(); ++j) CHECK(a.bounds.contains(a.points.col(j)));
    CHECK(generate_dataset(name, 500, 43).points != a.points);
  }
  CHECK_THROWS_AS(generate_dataset("moons", 10, 0), ConfigError);
  CHECK_THROWS_AS(generate_dataset(DatasetName::Spiral, 0, 0), DomainError);
}

TEST_CASE("checkerboard single point is in an occupied square") {
  const auto d = generate_dataset(DatasetName::Checkerboard, 1, 0);
  REQUIRE(d.size() == 1);
  CHECK(checkerboard_occupied(d.points.col(0)));
  const auto many = generate_dataset(DatasetName::Checkerboard, 2000, 1);
  for (Index j = 0; j < many.points.cols(); ++j) CHECK(checkerboard_occupied(many.points.col(j)));
}

TEST_CASE("spiral points lie near the parametric curve") {
  const auto d = generate_dataset(DatasetName::Spiral, 1000, 0);
  const double pi = 3.141592653589793;
  const double a = 0.5 / pi;
  for (Index j = 0; j < d.points.cols(); ++j) {
    const Eigen::Vector2d p = d.points.col(j);
    double best = 1e300;
    for (int k = 0; k <= 20000; ++k) {
      const double theta = 0.5 * pi + 3.5 * pi * k / 20000.0;
      best = std::min(best, (p - Eigen::Vector2d(a * theta * std::cos(theta), a * theta * std::sin(theta))).norm());
    }
    CHECK(best < 5.0 * 0.03 * 1.5);
  }
}

TEST_CASE("sierpinski points avoid the removed central triangle") {
  const auto d = generate_dataset(DatasetName::Sierpinski, 2000, 9);
  // Midpoints of the outer triangle bound the first removed hole.
  const Eigen::Vector2d v0(-2.0, -1.5), v1(2.0, -1.5), v2(0.0, 1.96410161513775);
  const Eigen::Vector2d m01 = 0.5 * (v0 + v1), m12 = 0.5 * (v1 + v2), m02 = 0.5 * (v0 + v2);
  auto side = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };
  int inside = 0;
  for (Index j = 0; j < d.points.cols(); ++j) {
    const Eigen::Vector2d p = d.points.col(j);
    const double s1 = side(m01, m12, p), s2 = side(m12, m02, p), s3 = side(m02, m01, p);
    // Strictly inside with a margin wider than the 2^-10 residual of the start point.
    const double margin = 0.02;
    if ((s1 > margin && s2 > margin && s3 > margin) || (s1 < -margin && s2 < -margin && s3 < -margin)) ++inside;
  }
  CHECK(inside == 0);
}

TEST_CASE("dataset csv round trip is exact") {
  const auto d = generate_dataset(DatasetName::Pinwheel, 50, 2);
  const auto path = std::filesystem::temp_directory_path() / "madm_pinwheel_roundtrip.csv";
  save_dataset_csv(d, path);
  const auto back = load_dataset_csv(path, DatasetName::Pinwheel);
  CHECK(back.points == d.points);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_dataset_csv("/nonexistent/dir/file.csv"), ConfigError);
}
