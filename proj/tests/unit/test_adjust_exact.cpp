#include <cmath>

#include "doctest.h"
#include "madm/adjust_exact.hpp"
#include "madm/error.hpp"

using namespace madm;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// Standard gaussian, x = 0 -> x_new = 1, h = 0.5: r = e^{-1/2} and
// H = q(0 | 1) / q(1 | 0) = exp(-0.5625 + 1).
struct Fixture {
  ScoreOracle oracle = gaussian_oracle(Vector::Zero(1), 1.0);
  LangevinProposal p = make_proposal(scalar(0.0), scalar(1.0), oracle, 0.0, 0.5);
  double r = std::exp(-0.5);
  double H = std::exp(0.4375);
};

double binomial_sd(double p, int n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("C bound vanishes for a null move") {
  auto oracle = gaussian_oracle(Vector::Zero(2), 1.0);
  const auto p = make_proposal(Vector::Ones(2), Vector::Ones(2), oracle, 0.0, 0.5);
  CHECK(bound_C(p, {BoundStrategy::Lipschitz, {}}, oracle) == 0.0);
  CHECK(bound_C(p, {BoundStrategy::BoundedDenoiser, {}}, oracle) == 0.0);
}

TEST_CASE("C bound formulas on the gaussian fixture") {
  Fixture f;
  // max(|s(0)|, |s(1)|) * 1 + L/2 * 1.
  CHECK(bound_C(f.p, {BoundStrategy::Lipschitz, {}}, f.oracle) == doctest::Approx(1.5));
  // b = 0, r = 1, sigma = 1: (0 + max(|x|, |x_new|)) * |delta|.
  CHECK(bound_C(f.p, {BoundStrategy::BoundedDenoiser, {}}, f.oracle) == doctest::Approx(1.0));
  CHECK(bound_C(f.p, {BoundStrategy::BoundedDenoiser, 0.0}, f.oracle) == doctest::Approx(1.0));
  CHECK(bound_C(f.p, {BoundStrategy::AffineEndpoint, {}}, f.oracle) == doctest::Approx(1.0));
  CHECK(bound_C(f.p, {BoundStrategy::Manual, 2.5}, f.oracle) == 2.5);
}

TEST_CASE("bounded-denoiser C on a single-point mixture") {
  const auto schedule = NoiseSchedule::vp_discrete(10, 0.01, 0.6);
  ScoreOracle oracle(diffused_empirical_model(Matrix::Zero(2, 1), schedule));
  const double t = 0.6;
  const auto m = schedule.marginal(t);
  Vector x(2), y(2);
  x << 0.3, -0.4;
  y << 1.0, 0.5;
  const auto p = make_proposal(x, y, oracle, t, 0.1);
  const double expected = (0.0 * m.r + y.norm()) / (m.r * m.r * m.sigma * m.sigma) * (y - x).norm();
  CHECK(bound_C(p, {BoundStrategy::BoundedDenoiser, {}}, oracle) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("C bound capability and validity errors") {
  auto quartic = quartic_oracle(1.0);
  const auto p = make_proposal(scalar(0.0), scalar(1.0), quartic, 0.0, 0.5);
  CHECK_THROWS_AS(bound_C(p, {BoundStrategy::BoundedDenoiser, {}}, quartic), ConfigError);
  CHECK_THROWS_AS(bound_C(p, {BoundStrategy::Lipschitz, {}}, quartic), ConfigError);
  CHECK_THROWS_AS(bound_C(p, {BoundStrategy::AffineEndpoint, {}}, quartic), ConfigError);
  CHECK_THROWS_AS(bound_C(p, {BoundStrategy::Manual, {}}, quartic), ConfigError);
  // |f(1)| = 1 exceeds the manual constant.
  CHECK_THROWS_AS(bound_C(p, {BoundStrategy::Manual, 0.5}, quartic), BoundViolationError);
}

TEST_CASE("W with C = 0 is one") {
  Fixture f;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(poisson_product_W([](double) { return 0.0; }, 0.0, rng) == 1.0);
}

TEST_CASE("W for a null move is a power of one half") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t n = 0;
    const double w = poisson_product_W([](double) { return 0.0; }, 1.3, rng, &n);
    CHECK(w == std::ldexp(1.0, -static_cast<int>(n)));
  }
}

TEST_CASE("W is unbiased for exp(-C) r") {
  Fixture f;
  Rng rng(5);
  const double C = 1.0;
  const int n = 200'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = poisson_product_W(f.p, f.oracle, C, rng);
    CHECK_UNARY(w >= 0.0);
    CHECK_UNARY(w <= 1.0);
    sum += w;
    sum_sq += w * w;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - std::exp(-1.5)) < 4.0 * sd);
}

TEST_CASE("W detects an invalid bound") {
  Fixture f;
  Rng rng(6);
  // Factors 1/2 - u fall below zero for u > 1/2.
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) poisson_product_W(f.p, f.oracle, 0.5, rng);
      }(),
      BoundViolationError);
}

TEST_CASE("immediate-reject coin limits") {
  CHECK(immediate_reject_probability(0.0, 0.0) == doctest::Approx(0.5));
  CHECK(immediate_reject_probability(800.0, 1.0) == 0.0);
  CHECK(immediate_reject_probability(-800.0, 1.0) == 1.0);
}

TEST_CASE("two-coin with H = 1 and C = 0 decides in one round") {
  Rng rng(8);
  const int n = 100'000;
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = two_coin_decide(0.0, 0.0, [](double) { return 0.0; }, rng);
    CHECK(d.rounds == 1);
    CHECK(d.score_queries == 0);
    accepted += d.accepted();
  }
  CHECK(std::abs(accepted / double(n) - 0.5) < 3.0 * binomial_sd(0.5, n));
}

TEST_CASE("two-coin acceptance is Barker on the gaussian fixture") {
  for (bool lazy : {false, true}) {
    CAPTURE(lazy);
    Fixture f;
    Rng rng(lazy ? 10 : 9);
    const int n = 100'000;
    int accepted = 0;
    double rounds = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto d = two_coin_decision(f.p, f.oracle, 1.5, rng, {1'000'000, lazy});
      accepted += d.accepted();
      rounds += static_cast<double>(d.rounds);
      CHECK_UNARY(d.w_last >= 0.0);
      CHECK_UNARY(d.w_last <= 1.0);
    }
    const double alpha = f.H * f.r / (1.0 + f.H * f.r);
    CHECK(std::abs(accepted / double(n) - alpha) < 3.0 * binomial_sd(alpha, n));
    // Geometric rounds with success probability (1 + H r) / (1 + H e^C).
    const double success = (1.0 + f.H * f.r) / (1.0 + f.H * std::exp(1.5));
    const double sd = std::sqrt((1.0 - success) / (success * success) / n);
    CHECK(std::abs(rounds / n - expected_rounds(1.5, f.H, f.r)) < 4.0 * sd);
    CHECK(expected_rounds(1.5, f.H, f.r) == doctest::Approx(1.0 / success));
  }
}

TEST_CASE("two-coin query count tracks the oracle counter") {
  Fixture f;
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto before = f.oracle.queries();
    const auto d = two_coin_decision(f.p, f.oracle, 1.0, rng);
    CHECK(d.score_queries == f.oracle.queries() - before);
    CHECK(d.score_queries <= d.poisson_total);
  }
}

TEST_CASE("two-coin raises instead of deciding silently") {
  Rng rng(13);
  // H huge and every factor zero: no round can decide unless N = 0.
  try {
    two_coin_decide(50.0, 20.0, [](double) { return -20.0; }, rng, {5, false});
    FAIL("expected NonTerminationError");
  } catch (const NonTerminationError& e) {
    CHECK(e.rounds() == 5);
    CHECK(e.log_h() == 50.0);
    CHECK(e.bound() == 20.0);
  }
  CHECK_THROWS_AS(two_coin_decide(0.0, 0.0, [](double) { return 0.0; }, rng, {0, false}), DomainError);
}

TEST_CASE("expected query formula") {
  CHECK(expected_queries(0.0, 1.0, 0.5) == 0.0);
  const double r = std::exp(-0.5);
  CHECK(expected_queries(1.0, 1.0, r) == doctest::Approx(2.0 * std::exp(1.0) / (1.0 + r)).epsilon(1e-15));
  CHECK(expected_queries(1.0, 1.0, r) == doctest::Approx(3.38404).epsilon(1e-5));
  // H -> infinity tends to 2 C e^C / r.
  const double limit = 2.0 * 0.7 * std::exp(0.7) / 0.3;
  CHECK(expected_queries(0.7, 1e12, 0.3) == doctest::Approx(limit).epsilon(1e-10));
  CHECK(expected_queries(0.7, HUGE_VAL, 0.3) == doctest::Approx(limit).epsilon(1e-15));
  CHECK_THROWS_AS(expected_queries(-1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("bound strategy names round-trip") {
  for (auto s : {BoundStrategy::BoundedDenoiser, BoundStrategy::Lipschitz, BoundStrategy::Manual,
                 BoundStrategy::AffineEndpoint})
    CHECK(bound_strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(bound_strategy_from_string("tight"), ConfigError);
}
