import math

import numpy as np
import pytest

import madm


def test_version_is_exposed():
    assert madm.__version__.startswith("v")


def test_schedule_marginal_at_endpoints():
    s = madm.NoiseSchedule.vp_discrete(20, 0.005, 0.5)
    assert s.steps == 20
    r, sigma = s.marginal(0.0)
    assert r == pytest.approx(1.0)
    assert sigma == pytest.approx(0.0)
    alpha_bar = np.prod(1.0 - np.array(s.betas))
    r1, _ = s.marginal(1.0)
    assert r1 * r1 == pytest.approx(alpha_bar, rel=1e-12)


def test_gaussian_score_and_query_count():
    oracle = madm.ScoreOracle(madm.gaussian_model(np.array([1.0, -1.0]), 2.0))
    s = oracle.score(np.array([3.0, 1.0]))
    np.testing.assert_allclose(s, [-1.0, -1.0])
    assert oracle.queries == 1


def test_log_h_matches_direct_formula():
    oracle = madm.ScoreOracle(madm.gaussian_model(np.zeros(1), 1.0))
    h = 0.5
    x, y = np.array([0.3]), np.array([-0.4])
    p = madm.make_proposal(x, y, oracle, 0.0, h)

    def log_q(a, b):
        return -np.sum((b - a - 0.5 * h * (-a)) ** 2) / (2 * h)

    assert madm.log_H(p) == pytest.approx(log_q(y, x) - log_q(x, y), abs=1e-12)
    exact = -0.5 * (y @ y - x @ x)
    assert madm.exact_log_acceptance_ratio(p, oracle) == pytest.approx(exact + madm.log_H(p), abs=1e-12)


def test_simpson_is_exact_on_gaussian_line_integral():
    oracle = madm.ScoreOracle(madm.gaussian_model(np.zeros(2), 1.0))
    p = madm.make_proposal(np.array([0.2, 0.1]), np.array([-0.5, 0.7]), oracle, 0.0, 0.3)
    rule = madm.QuadratureRule.from_name("simpson13")
    expected = -0.5 * (0.5**2 + 0.7**2 - 0.2**2 - 0.1**2)
    assert madm.quadrature_log_ratio(p, oracle, rule) == pytest.approx(expected, abs=1e-12)


def test_expected_queries_closed_form():
    value = madm.expected_queries(1.0, 1.0, math.exp(-0.5))
    assert value == pytest.approx(2 * math.e / (1 + math.exp(-0.5)), rel=1e-12)


def test_two_coin_on_python_integrand_is_reproducible():
    def run(seed):
        rng = madm.Rng(seed)
        return [madm.two_coin_decide(0.0, 1.0, lambda u: -0.5, rng).accepted for _ in range(200)]

    assert run(7) == run(7)
    rate = np.mean(run(7))
    assert 0.2 < rate < 0.8


def test_two_coin_nontermination_raises():
    rng = madm.Rng(0)
    with pytest.raises(madm.NonTerminationError):
        for _ in range(1000):
            madm.two_coin_decide(0.0, 30.0, lambda u: -30.0, rng, max_rounds=2)


def test_barker_limit_at_zero_scale():
    assert madm.barker_limit_A(1e-6) == pytest.approx(0.5, abs=1e-3)


def test_dataset_and_containment_shapes():
    data = madm.generate_dataset("checkerboard", 500, 0)
    assert data.shape == (2, 500)
    q, mean = madm.containment_distance(data, data, 0.95)
    assert q == 0.0 and mean == 0.0


def test_config_rejects_unknown_key():
    cfg = madm.Config()
    with pytest.raises(madm.ConfigError):
        cfg.set("quad.nope", "1")
    assert "quad-order" in madm.Config.preset_names()


def test_sample_small_run():
    cfg = madm.Config.preset("fig1-checkerboard")
    cfg.set("run.chains", "50")
    cfg.set("target.size", "200")
    out = madm.sample(cfg, "ula")
    assert out["samples"].shape == (2, 50)
    assert np.all(np.isfinite(out["samples"]))
    assert len(out["levels"]) > 0


def test_run_experiment_writes_report(tmp_path):
    cfg = madm.Config.preset("quad-order")
    cfg.set("quad.proposals", "50")
    report = madm.run_experiment(cfg, tmp_path)
    assert report["mode"] == "quad-order"
    assert (tmp_path / "report.json").exists()
    assert (tmp_path / "quad_fits.csv").exists()


def test_verify_line_integral_identity():
    result = madm.verify("line-integral-identity")
    assert result["pass"] is True
