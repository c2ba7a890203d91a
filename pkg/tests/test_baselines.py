import numpy as np
import pytest

from tcnmf.baselines import (METHODS, BaselineConfig, cim_loss, column_weights,
                             factorize_baseline, huber_loss)
from tcnmf.hq import SolverConfig, factorize
from tcnmf.losses import WeightFunction, baseline_weight
from tcnmf.metrics import rel_error


@pytest.mark.parametrize("method", METHODS)
def test_every_method_runs(method, planted_pair):
    v, vc = planted_pair(2, m=24, n=20, r=2)
    w, h, tr = factorize_baseline(vc, BaselineConfig(method, rank=2, seed=1, max_outer=40))
    assert w.shape == (24, 2) and h.shape == (2, 20)
    assert np.all(w >= 0) and np.all(h >= 0)
    assert np.isfinite(rel_error(v, w, h))
    assert tr.termination in ("converged", "max_iter")
    assert len(tr.objective_trace) == tr.outer_iter


def test_l2_monotone(rng):
    v = rng.random((20, 3)) @ rng.random((3, 18)) + 0.2 * rng.random((20, 18))
    _, _, tr = factorize_baseline(v, BaselineConfig("l2", rank=3, seed=0, max_outer=50))
    f = np.concatenate([[tr.objective_start[0]], tr.objective_trace])
    assert np.all(np.diff(f) <= 1e-8)
    # each iteration starts where the previous one ended
    assert np.allclose(tr.objective_start[1:], tr.objective_trace[:-1], rtol=1e-12)


def test_uniform_residuals_give_uniform_weights():
    e = np.full((4, 5), 0.7)
    for fn in (WeightFunction("huber", c=0.7), WeightFunction("cim", width=0.7),
               WeightFunction("cauchy", gamma=2.0)):
        w = baseline_weight(e, fn)
        assert np.ptp(w) == 0.0


def test_column_weights_broadcast():
    e = np.array([[3.0, 0.0], [4.0, 0.0]])
    w = column_weights(e, WeightFunction("l21-column"))
    assert np.allclose(w[:, 0], 1e-8 / 5.0)
    assert np.array_equal(w[:, 1], [1.0, 1.0])


def test_loss_helpers():
    e = np.array([0.5, -2.0])
    assert huber_loss(e, 1.0) == pytest.approx(0.25 + 3.0)
    assert cim_loss(np.zeros(3), 1.0) == pytest.approx(3 * (1 - 1 / np.sqrt(2 * np.pi)))


def test_cauchy_matches_hq_untruncated(planted_pair):
    _, vc = planted_pair(6)
    _, _, tr = factorize_baseline(vc, BaselineConfig("cauchy", rank=3, seed=6, gamma=0.4, max_outer=30))
    _, _, st = factorize(vc, SolverConfig(rank=3, seed=6, scale_mode="fixed", gamma=0.4,
                                          truncation_mode="none", max_outer=30))
    assert len(tr.objective_trace) == len(st.objective_trace)
    assert np.max(np.abs(np.array(tr.objective_trace) - np.array(st.objective_trace))) <= 1e-10


def test_config_errors():
    with pytest.raises(ValueError):
        BaselineConfig("l0", rank=1).validate()
    with pytest.raises(ValueError):
        factorize_baseline(np.ones((3, 3)), BaselineConfig("l1", rank=4))
