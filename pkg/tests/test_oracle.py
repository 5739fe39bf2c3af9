import numpy as np
import pytest

from riccati_pade import oracle


def test_harmonic_levels():
    V = oracle.polynomial_potential([1.0])
    grid = oracle.default_grid(V, 2)
    levels = oracle.grid_eigenvalues(V, grid, 2)
    assert np.allclose(levels, [1.0, 3.0], atol=1e-8, rtol=0)


def test_deep_well_pair():
    levels = oracle.grid_eigenvalues([-20.0, 2.0], oracle.default_grid([-20.0, 2.0], 2), 2)
    assert abs(levels[0] + 43.7793165) < 1e-6
    assert abs(levels[1] + 43.77931646) < 1e-6


def test_critical_values():
    assert abs(oracle.critical_check(0, "0.3024048700948614")) < 1e-6
    assert abs(oracle.critical_check(2, "0.07773798178730948966")) < 1e-6
    assert oracle.critical_check(0, 0.5) > 0


def test_level_increases_with_coupling():
    assert oracle.critical_check(1, 0.2) < oracle.critical_check(1, 0.21)


def test_estimates_decrease_with_k():
    est = [oracle.critical_estimate(k) for k in range(4)]
    assert all(a > b for a, b in zip(est, est[1:]))
    assert abs(est[0] - 0.30240487009486) < 1e-7


def test_validation():
    with pytest.raises(ValueError):
        oracle.GridSpec(1.0, 10)
    with pytest.raises(ValueError):
        oracle.GridSpec(-1.0, 100)
    with pytest.raises(ValueError):
        oracle.critical_check(6, 0.01)


def test_small_box_detected():
    with pytest.raises(oracle.OracleError):
        oracle.grid_eigenvalues([1.0], oracle.GridSpec(2.0, 201), 2)
