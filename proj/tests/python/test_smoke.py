import math

import numpy as np
import pytest

import twinbridge as tb


def test_state_and_grid():
    grid = tb.default_grid()
    assert len(grid) == 2304
    assert len(set(grid)) == 2304
    s = tb.NetworkState(U=50, D=0, C=0.5, R=1.0, Mu=20, Md=0, F=4)
    assert s.is_valid()
    assert tb.state_cost(s) == pytest.approx(1 + 0.5 * 4 + 50 / 100)
    assert all(0.0 <= z <= 1.0 for z in s.normalized())


def test_latency_model():
    s = tb.NetworkState(U=25, D=25, Mu=10, Md=14, F=2)
    real = np.array(tb.sample_latency(s, "real", n=4000, seed=3))
    again = np.array(tb.sample_latency(s, "real", n=4000, seed=3))
    assert np.array_equal(real, again)
    # lognormal: mean of log samples is log m(s)
    assert np.log(real).mean() == pytest.approx(math.log(tb.latency_mean(s, "real")), abs=0.02)
    sim = tb.sample_latency(s, "sim", n=4000, seed=3, bias=0.0, sim_dispersion=1.0)
    assert np.allclose(sim, real)


def test_kl_against_closed_form():
    rng = np.random.default_rng(0)
    p = rng.normal(0, 1, 10000)
    q = rng.normal(0, 2, 10000)
    truth = math.log(2) + 1 / 8 - 0.5
    assert tb.kl_divergence(p, q) == pytest.approx(truth, rel=0.2)
    assert tb.kl_divergence(p, q, method="knn") == pytest.approx(truth, rel=0.2)
    with pytest.raises(ValueError):
        tb.kl_divergence(p[:10], q[:10])


def test_quantile_residuals():
    res = tb.quantile_residuals([1.0, 2.0, 3.0], [0.0, 1.0, 2.0], [0.5])
    assert res == [(0.5, 1.0)]
    assert len(tb.quantile_levels()) == 21


def test_expected_improvement_and_alpha():
    assert tb.expected_improvement(0.0, 1.0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert tb.cost_aware_ei(2.0, 4.0, 0.5) == pytest.approx(1.0)
    assert tb.update_alpha([1.0] * 3) == 0.5
    a = tb.update_alpha([10, 9, 8, 7, 6, 5, 4, 3, 2, 1])
    assert 0.5 <= a <= 1.0


def test_gaussian_process_interpolates():
    rng = np.random.default_rng(1)
    x = rng.uniform(size=(12, 7))
    y = np.sin(x.sum(axis=1))
    gp = tb.GaussianProcess(x, y, noise=1e-8)
    mean, var = gp.predict(x)
    assert np.allclose(mean, y, atol=1e-4)
    assert np.all(var >= 0) and np.all(var < 1e-4)
    assert gp.best == pytest.approx(y.max())


def test_small_run():
    settings = {
        "grid.U": "0:50:50",
        "grid.D": "0:50:50",
        "grid.Mu": "0:20:20",
        "grid.Md": "0:28:28",
        "eval_states": "16",
        "eval_samples": "100",
        "samples_per_query": "100",
        "budget": "40",
    }
    r = tb.run("GS", settings)
    assert r["method"] == "GS"
    assert r["stop"] in ("budget", "exhausted")
    costs = [it["cumulative_cost"] for it in r["iterations"]]
    assert costs == sorted(costs) and costs[-1] <= 40
    assert len({tuple(sorted(it["state"].items())) for it in r["iterations"]}) == len(costs)
    assert r["pre"] > 0
    assert r == tb.run("GS", settings)
    with pytest.raises(ValueError):
        tb.run("GS", {"no_such_key": "1"})
