import time

import numpy as np
import pytest

from fbm_infoflow import fbm
from fbm_infoflow.errors import DomainError, GridError


def test_covariance_diagonal_brownian():
    assert fbm.covariance(1.0, 1.0, 0.5) == pytest.approx(1.0)


def test_covariance_brownian_is_min():
    assert fbm.covariance(1.0, 2.0, 0.5) == pytest.approx(1.0)


def test_covariance_hand_value():
    # 0.5 * (2^1.5 + 1 - 1) = sqrt(2)
    assert fbm.covariance(1.0, 2.0, 0.75) == pytest.approx(np.sqrt(2.0), abs=1e-7)


def test_covariance_symmetry_and_diagonal():
    rng = np.random.default_rng(3)
    for _ in range(50):
        s, t = rng.uniform(0, 5, 2)
        h = rng.uniform(0.05, 0.95)
        assert fbm.covariance(s, t, h) == pytest.approx(fbm.covariance(t, s, h))
        assert fbm.covariance(t, t, h) == pytest.approx(t ** (2 * h))


def test_negative_time_raises():
    with pytest.raises(DomainError):
        fbm.covariance(-1.0, 1.0, 0.5)


def test_single_point_variance():
    vals, _ = fbm.sample_paths([1.0], 0.7, method="cholesky", seed=11,
                               n_paths=100_000)
    var = vals.var()
    se = np.sqrt(2.0 / len(vals))  # var of sample variance of N(0,1)
    assert abs(var - 1.0) < 3 * se


def test_brownian_increments_uncorrelated():
    n = 256
    grid = np.arange(1, n + 1) / n
    vals, _ = fbm.sample_paths(grid, 0.5, method="circulant", seed=5,
                               n_paths=2000)
    inc = np.diff(vals, axis=1, prepend=0.0)
    a = inc[:, :-1].ravel()
    b = inc[:, 1:].ravel()
    rho = np.corrcoef(a, b)[0, 1]
    assert abs(rho) < 3.0 / np.sqrt(a.size)


@pytest.mark.parametrize("method", ["cholesky", "circulant"])
def test_empirical_covariance_matches_formula(method):
    n, n_paths = 16, 40_000
    grid = np.arange(1, n + 1) / n
    vals, fallback = fbm.sample_paths(grid, 0.75, method=method, seed=9,
                                      n_paths=n_paths)
    assert not fallback
    exact = fbm.covariance(grid[:, None], grid[None, :], 0.75)
    emp = vals.T @ vals / n_paths
    se = np.sqrt((vals[:, :, None] * vals[:, None, :]).var(axis=0) / n_paths)
    assert np.max(np.abs(emp - exact) / se) < 5.0


def test_cross_method_agreement():
    n, n_paths = 16, 40_000
    grid = np.arange(1, n + 1) / n

    def emp(method, seed):
        vals, _ = fbm.sample_paths(grid, 0.3, method=method, seed=seed,
                                   n_paths=n_paths)
        cov = vals.T @ vals / n_paths
        se = np.sqrt((vals[:, :, None] * vals[:, None, :]).var(axis=0) / n_paths)
        return cov, se

    c1, s1 = emp("cholesky", 21)
    c2, s2 = emp("circulant", 22)
    assert np.max(np.abs(c1 - c2) / np.sqrt(s1 ** 2 + s2 ** 2)) < 5.0


def test_seed_reproducibility():
    grid = np.arange(1, 65) / 64
    a = fbm.sample_path(grid, 0.6, method="circulant", seed=123)
    b = fbm.sample_path(grid, 0.6, method="circulant", seed=123)
    assert np.array_equal(a.values, b.values)
    c = fbm.sample_path(grid, 0.6, method="circulant", seed=124)
    assert not np.array_equal(a.values, c.values)


def test_circulant_rejects_nonuniform_grid():
    with pytest.raises(GridError):
        fbm.sample_paths([0.1, 0.2, 0.5], 0.5, method="circulant")


def test_invalid_hurst_rejected():
    with pytest.raises(DomainError):
        fbm.HurstParameter(1.0)
    with pytest.raises(DomainError):
        fbm.HurstParameter(0.0)


def test_circulant_speed_smoke():
    n = 2 ** 16
    grid = np.arange(1, n + 1) / n
    start = time.monotonic()
    fbm.sample_paths(grid, 0.7, method="circulant", seed=1)
    assert time.monotonic() - start < 1.0
