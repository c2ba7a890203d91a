import math

import numpy as np
import pytest

from tcnmf import datagen
from tcnmf.hq import (SolverConfig, default_gamma_min, detect_outliers, estimate_scale_nagy,
                      factorize, coef_bound, coef_bound_check, outlier_threshold,
                      truncated_objective, update_weights)
from tcnmf.losses import WeightFunction, baseline_weight, hq_weight
from tcnmf.matrix import normalize_columns
from tcnmf.metrics import rel_error
from tcnmf.suite import weight_consistency


def test_update_weights_zeroes_outliers():
    e = np.array([[0.0, 1.0], [2.0, -3.0]])
    mask = np.array([[False, False], [False, True]])
    q = update_weights(e, 1.0, mask)
    assert np.array_equal(q, [[1.0, 0.5], [0.2, 0.0]])
    with pytest.raises(ValueError):
        update_weights(e, 0.0)


def test_nagy_fixed_point_exact():
    for g0 in (0.1, 1.0, 3.7):
        e = g0 * np.array([1.0, -1.0, 1.0, 1.0, -1.0])
        assert abs(estimate_scale_nagy(e, g0) - g0) <= 1e-12


@pytest.mark.parametrize("gamma", [0.5, 2.0, 10.0])
def test_nagy_recovers_cauchy_scale(rng, gamma):
    e = gamma * rng.standard_cauchy(100_000)
    est = estimate_scale_nagy(e, 1.0, tol=1e-10, max_iter=500)
    assert abs(est - gamma) / gamma < 0.1


def test_nagy_degenerate_inputs():
    assert estimate_scale_nagy(np.zeros(10), 1.0, gamma_min=1e-5) == 1e-5
    with pytest.raises(ValueError):
        estimate_scale_nagy(np.ones(3), 0.0)


def test_outlier_threshold_hand_value():
    e = np.array([1.0, 1.0, 1.0, 1.0, 100.0, 200.0, 300.0])
    # lower half {1,1,1,1}: mu = 1, std 0 -> floored at 1e-12 + 1e-6
    thr = outlier_threshold(e)
    assert thr == pytest.approx(1.0 + 3 * (1e-12 + 1e-6))
    assert np.array_equal(detect_outliers(e), [False] * 4 + [True] * 3)


def test_outlier_threshold_gaussian_block(rng):
    e = rng.standard_normal(20_000)
    e[:2000] = 50.0
    mask = detect_outliers(e)
    assert mask[:2000].all()


def test_truncated_objective_matches_losses():
    e = np.array([[0.5, -2.0], [4.0, 0.0]])
    gamma, thr = 1.5, 3.0
    sigma = (thr / gamma) ** 2
    direct = 0.5 * sum(math.log1p(min((x / gamma) ** 2, sigma)) for x in e.ravel())
    assert truncated_objective(e, gamma, thr) == pytest.approx(direct, rel=1e-14)


def test_coef_bound_formula_and_checks():
    assert coef_bound(1.0, 2.0, 1.0) == pytest.approx(2 + math.sqrt(2))
    w = np.eye(3)
    assert coef_bound_check(w, np.zeros(3), 2.0, 1.0, 0.1)
    assert not coef_bound_check(w, np.full(3, 10.0), 2.0, 1.0, 1.0)
    with pytest.raises(ValueError, match="normalised"):
        coef_bound_check(2 * w, np.zeros(3), 2.0, 1.0, 1.0)


def test_default_gamma_min():
    assert default_gamma_min(np.array([[0.0, 2.0, 4.0]])) == pytest.approx(2e-4)
    assert default_gamma_min(np.zeros((2, 2))) == 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rank=2, truncation_mode="explicit").validate()
    with pytest.raises(ValueError):
        SolverConfig(rank=2, scale_mode="adaptive").validate()
    with pytest.raises(ValueError):
        SolverConfig(rank=5).validate((4, 10))
    with pytest.raises(ValueError):
        SolverConfig(rank=1, warmup=-1).validate()


def test_factorize_input_errors():
    with pytest.raises(ValueError, match="negative"):
        factorize(-np.ones((3, 3)), SolverConfig(rank=1))
    with pytest.raises(ValueError, match="rank"):
        factorize(np.ones((3, 3)), SolverConfig(rank=4))


def test_clean_lowrank_untruncated():
    v, _, _ = datagen.gen_lowrank(30, 25, 3, seed=4)
    w, h, st = factorize(v, SolverConfig(rank=3, seed=4, truncation_mode="none"))
    assert np.all(w >= 0) and np.all(h >= 0)
    assert st.objective_trace[-1] <= st.objective_start[0]
    assert rel_error(v, w, h) <= 1e-2


def test_full_rank_reconstruction():
    v, _, _ = datagen.gen_lowrank(6, 8, 6, seed=2)
    w, h, _ = factorize(v, SolverConfig(rank=6, seed=2, truncation_mode="none"))
    assert rel_error(v, w, h) <= 1e-3


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_line_recovery_with_four_ninths_outliers(seed):
    v, _, _ = datagen.gen_line(datagen.SyntheticLineSpec(n_outliers=80, seed=seed))
    w, _, _ = factorize(v, SolverConfig(rank=1, seed=seed))
    u = w[:, 0] / np.linalg.norm(w[:, 0])
    ref = np.array([1.0, 0.2]) / np.hypot(1.0, 0.2)
    assert math.degrees(math.acos(min(1.0, u @ ref))) < 5.0


def test_descent_and_weight_consistency(planted_pair):
    _, vc = planted_pair(3, p=0.3)
    seen = []

    def cb(t, phase, e, q, step):
        seen.append(weight_consistency(e, q, step.info))
        sigma = step.info["sigma"]
        ref = baseline_weight(e, WeightFunction("truncated-cauchy", gamma=step.info["gamma"],
                                                sigma=sigma))
        # same weights via the losses module, up to rounding at the threshold
        near = np.isclose(np.abs(e), step.info["threshold"], rtol=1e-12)
        assert np.array_equal(q[~near], ref[~near])

    _, _, st = factorize(vc, SolverConfig(rank=3, seed=3, max_outer=40), callback=cb)
    assert max(seen) == 0.0
    assert len(seen) == 2 * st.outer_iter
    assert np.all(np.array(st.objective_trace) <= np.array(st.objective_start) + 1e-8)


def test_untruncated_fixed_scale_is_cauchy(planted_pair):
    _, vc = planted_pair(5, m=20, n=15, r=2)

    def cb(t, phase, e, q, step):
        assert np.all(q > 0)
        assert np.array_equal(q, baseline_weight(e, WeightFunction("cauchy", gamma=0.5)))

    _, _, st = factorize(vc, SolverConfig(rank=2, scale_mode="fixed", gamma=0.5,
                                          truncation_mode="none", max_outer=10), callback=cb)
    assert set(st.gamma_trace) == {0.5}
    assert not st.outliers.any()


def test_final_state_consistent(planted_pair):
    v, vc = planted_pair(8)
    w, h, st = factorize(vc, SolverConfig(rank=3, seed=8, max_outer=30))
    assert np.array_equal(st.residual, vc - w @ h)
    assert np.array_equal(st.outliers, np.abs(st.residual) > st.threshold)
    expected = np.where(st.outliers, 0.0, hq_weight((st.residual / st.gamma) ** 2))
    assert np.array_equal(st.weights, expected)
    assert st.termination in ("converged", "max_iter")
    assert len(st.objective_trace) == st.outer_iter == len(st.gamma_trace)
    assert st.warmup_iters == 10


def test_deterministic_for_seed(planted_pair):
    _, vc = planted_pair(9)
    cfg = SolverConfig(rank=3, seed=11, max_outer=20)
    a = factorize(vc, cfg)
    b = factorize(vc, cfg)
    assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()


def test_coef_bound_on_solved_instances(planted_pair):
    for seed in range(5):
        _, vc = planted_pair(seed, p=0.2)
        sigma, gamma = 4.0, 0.5
        w, h, _ = factorize(vc, SolverConfig(rank=3, seed=seed, max_outer=20, scale_mode="fixed",
                                             gamma=gamma, truncation_mode="explicit", sigma=sigma))
        wn, s = normalize_columns(w)
        hn = h * s[:, None]
        for j in range(vc.shape[1]):
            assert coef_bound_check(wn, hn[:, j], sigma, gamma, np.linalg.norm(vc[:, j]))


def test_explicit_threshold_level(planted_pair):
    _, vc = planted_pair(1)
    _, _, st = factorize(vc, SolverConfig(rank=3, scale_mode="fixed", gamma=0.2,
                                          truncation_mode="explicit", sigma=9.0, max_outer=5))
    assert st.threshold == pytest.approx(0.6)
