import numpy as np
import pytest

from tcnmf.matrix import (ShapeError, as_matrix, frobenius_norm, make_rng, matmul,
                          normalize_columns, project_nonneg, spectral_norm)


def test_matmul_identity_and_shape_error():
    a = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(matmul(a, np.eye(3)), a)
    with pytest.raises(ShapeError, match="2x3 by 2x3"):
        matmul(a, a)


def test_matmul_associative(rng):
    a, b, c = (rng.random(s) + 1 for s in ((5, 7), (7, 4), (4, 6)))
    left = matmul(matmul(a, b), c)
    right = matmul(a, matmul(b, c))
    assert np.max(np.abs(left - right) / np.abs(right)) < 1e-10


def test_as_matrix_rejects_nan_and_3d():
    with pytest.raises(ValueError, match="NaN"):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((2, 2, 2)))


def test_project_nonneg():
    a = np.array([[-1.0, 0.0, 2.5], [-0.0, 3.0, -1e-300]])
    p = project_nonneg(a)
    assert np.array_equal(p, [[0, 0, 2.5], [0, 3, 0]])
    assert not np.any(np.signbit(p))
    assert np.array_equal(project_nonneg(p), p)


def test_spectral_norm_known_values():
    assert spectral_norm(np.diag([3.0, 1.0, 0.5])) == pytest.approx(3.0, rel=1e-8)
    assert spectral_norm(np.zeros((3, 3))) == 0.0
    # [[2,1],[1,2]] has eigenvalues 3 and 1
    assert spectral_norm([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(ShapeError):
        spectral_norm(np.ones((2, 3)))


def test_spectral_norm_matches_eigvalsh(rng):
    for _ in range(10):
        b = rng.random((8, 4))
        a = b.T @ b
        assert spectral_norm(a) == pytest.approx(np.linalg.eigvalsh(a)[-1], rel=1e-6)


def test_spectral_norm_bounds_rayleigh_ratio(rng):
    b = rng.standard_normal((10, 5))
    a = b.T @ b
    lam = spectral_norm(a)
    x = rng.standard_normal((5, 100))
    ratios = np.linalg.norm(a @ x, axis=0) / np.linalg.norm(x, axis=0)
    assert np.all(ratios <= lam * (1 + 1e-6))


def test_frobenius_and_normalize():
    w = np.array([[3.0, 0.0], [4.0, 2.0]])
    assert frobenius_norm(w) == pytest.approx(np.sqrt(29.0))
    wn, s = normalize_columns(w)
    assert np.allclose(np.linalg.norm(wn, axis=0), 1.0)
    assert np.array_equal(s, [5.0, 2.0])
    with pytest.raises(ValueError, match=r"\[1\]"):
        normalize_columns([[1.0, 0.0], [1.0, 0.0]])


def test_rng_streams():
    a = make_rng(42).random(50)
    assert a.tobytes() == make_rng(42).random(50).tobytes()
    assert a.tobytes() != make_rng(42, 0).random(50).tobytes()
    assert make_rng(42, 3).random(5).tobytes() == make_rng(42, 3).random(5).tobytes()
    with pytest.raises(ValueError):
        make_rng(-1)
    make_rng(2**64 - 1)
