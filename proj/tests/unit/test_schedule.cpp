#include <cmath>
#include <vector>

#include "doctest.h"
#include "madm/error.hpp"
#include "madm/schedule.hpp"

using namespace madm;

TEST_CASE("beta_schedule endpoints and interpolation") {
  CHECK(beta_schedule(1, 0.1, 0.1) == std::vector<double>{0.1});

  const auto three = beta_schedule(3, 0.1, 0.3);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(three[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(three[2] == doctest::Approx(0.3).epsilon(1e-15));

  const auto ddpm = beta_schedule(1000, 1e-4, 0.02);
  REQUIRE(ddpm.size() == 1000);
  CHECK(ddpm.front() == 1e-4);
  CHECK(ddpm.back() == 0.02);
  for (std::size_t k = 1; k < ddpm.size(); ++k) CHECK(ddpm[k] >= ddpm[k - 1]);
  // Midpoint of the index range sits between entries 500 and 501.
  const double midpoint = 0.5 * (ddpm[499] + ddpm[500]);
  CHECK(midpoint == doctest::Approx(0.01005).epsilon(1e-12));
}

TEST_CASE("beta_schedule rejects bad bounds") {
  CHECK_THROWS_AS(beta_schedule(0, 0.1, 0.2), DomainError);
  CHECK_THROWS_AS(beta_schedule(3, 0.0, 0.2), DomainError);
  CHECK_THROWS_AS(beta_schedule(3, 0.3, 0.2), DomainError);
  CHECK_THROWS_AS(beta_schedule(3, 0.1, 1.0), DomainError);
}

TEST_CASE("marginal_params at t = 0 is the identity") {
  for (const auto& s : {NoiseSchedule::vp_discrete(10, 0.01, 0.5), NoiseSchedule::vp_continuous(),
                        NoiseSchedule::edm()}) {
    const auto m = marginal_params(s, 0.0);
    CHECK(m.r == 1.0);
    CHECK(m.sigma == 0.0);
  }
}

TEST_CASE("EDM marginal is (1, t)") {
  const auto m = marginal_params(NoiseSchedule::edm(), 0.7);
  CHECK(m.r == 1.0);
  CHECK(m.sigma == doctest::Approx(0.7));
}

TEST_CASE("VP-discrete terminal marginal against the direct product") {
  const std::size_t T = 1000;
  const auto s = NoiseSchedule::vp_discrete(T, 1e-4, 0.02);
  std::vector<double> betas(T);
  for (std::size_t k = 0; k < T; ++k) betas[k] = 1e-4 + (0.02 - 1e-4) * static_cast<double>(k) / (T - 1.0);

  double r = 1.0;
  double var = 0.0;
  for (double b : betas) {
    r *= std::sqrt(1.0 - b);
    var = (1.0 - b) * var + b;
  }
  const auto m = marginal_params(s, 1.0);
  CHECK(m.r == doctest::Approx(r).epsilon(1e-10));
  CHECK(m.r * m.r * m.sigma * m.sigma == doctest::Approx(var).epsilon(1e-10));
  CHECK(m.r < 0.01);
  CHECK(m.r * m.sigma == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("VP-discrete knot variances compose step by step") {
  const std::size_t T = 50;
  const auto s = NoiseSchedule::vp_discrete(T, 1e-3, 0.2);
  const auto betas = s.betas();
  double var = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    var = (1.0 - betas[k]) * var + betas[k];
    const double t = static_cast<double>(k + 1) / T;
    CHECK(s.marginal(t).variance() == doctest::Approx(var).epsilon(1e-10));
  }
}

TEST_CASE("VP marginals are monotone in t") {
  for (const auto& s : {NoiseSchedule::vp_discrete(20, 0.005, 0.5), NoiseSchedule::vp_continuous()}) {
    double prev_r = 1.0;
    double prev_sigma = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const auto m = s.marginal(i / 400.0);
      CHECK(m.r > 0.0);
      CHECK(m.r <= prev_r);
      CHECK(m.sigma >= prev_sigma);
      prev_r = m.r;
      prev_sigma = m.sigma;
    }
  }
}

TEST_CASE("VP-continuous closed form") {
  const auto s = NoiseSchedule::vp_continuous(0.1, 20.0);
  const double t = 0.3;
  const double integral = 0.1 * t + 0.5 * (20.0 - 0.1) * t * t;
  const auto m = s.marginal(t);
  CHECK(m.r == doctest::Approx(std::exp(-0.5 * integral)).epsilon(1e-14));
  CHECK(m.variance() == doctest::Approx(1.0 - std::exp(-integral)).epsilon(1e-12));
  CHECK(s.drift(t) == doctest::Approx(-0.5 * (0.1 + 19.9 * t)));
  CHECK(s.diffusion_sq(t) == doctest::Approx(0.1 + 19.9 * t));
}

TEST_CASE("effective beta over one knot interval is the knot beta") {
  const auto s = NoiseSchedule::vp_discrete(10, 0.01, 0.6);
  for (std::size_t k = 0; k < 10; ++k)
    CHECK(s.effective_beta(k / 10.0, (k + 1) / 10.0) == doctest::Approx(s.betas()[k]).epsilon(1e-12));
}

TEST_CASE("time outside [0, 1] is a domain error") {
  const auto s = NoiseSchedule::vp_discrete(10, 0.01, 0.6);
  CHECK_THROWS_AS(s.marginal(-0.1), DomainError);
  CHECK_THROWS_AS(s.marginal(1.5), DomainError);
  CHECK_THROWS_AS(NoiseSchedule::edm().marginal(2.0), DomainError);
}

TEST_CASE("schedule kind names round-trip") {
  for (auto k : {ScheduleKind::VpDiscrete, ScheduleKind::VpContinuous, ScheduleKind::Edm})
    CHECK(schedule_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(schedule_kind_from_string("ve"), ConfigError);
}
