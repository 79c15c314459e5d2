import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irsbc.chanpen import Rng, complex_normal
from irsbc.errors import OrthogonalityViolated, TooManyUsers
from irsbc.zf import zf_min_power, zf_min_power_batch, zf_rates, zf_two_user_boundary


@given(st.integers(1, 4), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_powers_match_inverse_gram(k, extra, seed):
    gen = Rng(seed).generator()
    h = complex_normal(gen, (k, k + extra))
    gamma = gen.uniform(0.1, 10.0, size=k)
    sol = zf_min_power(h, gamma, 0.7)
    inv = np.linalg.inv(h.conj() @ h.T)
    np.testing.assert_allclose(sol.powers, gamma * 0.7 * np.real(np.diag(inv)), rtol=1e-8)
    np.testing.assert_allclose(zf_rates(h, sol.directions, sol.powers, 0.7), np.log2(1 + gamma),
                               rtol=1e-8)
    leak = np.abs(h.conj() @ sol.directions.T)
    np.testing.assert_allclose(leak[~np.eye(k, dtype=bool)], 0.0, atol=1e-9)


def test_too_many_users(gen):
    with pytest.raises(TooManyUsers):
        zf_min_power(complex_normal(gen, (3, 2)), np.ones(3), 1.0)


def test_rank_deficient_is_infeasible(gen):
    h = complex_normal(gen, (2, 3))
    h[1] = 1j * h[0]
    sol = zf_min_power(h, np.ones(2), 1.0)
    assert not sol.feasible and sol.total == np.inf
    assert np.isinf(zf_min_power_batch(h[None], np.ones(2), 1.0)[0])


def test_zero_target_user_dropped(gen):
    h = complex_normal(gen, (3, 3))
    sol = zf_min_power(h, np.array([1.0, 0.0, 2.0]), 1.0)
    ref = zf_min_power(h[[0, 2]], np.array([1.0, 2.0]), 1.0)
    assert sol.powers[1] == 0
    assert sol.total == pytest.approx(ref.total)


def test_leaky_beams_detected(gen):
    h = complex_normal(gen, (2, 3))
    with pytest.raises(OrthogonalityViolated):
        zf_rates(h, h / np.linalg.norm(h, axis=1, keepdims=True), np.ones(2), 1.0)


def test_batch_matches_scalar(gen):
    h = complex_normal(gen, (5, 2, 4))
    gamma = np.array([2.0, 3.0])
    batch = zf_min_power_batch(h, gamma, 1.0)
    for b in range(5):
        assert batch[b] == pytest.approx(zf_min_power(h[b], gamma, 1.0).total, rel=1e-9)


def test_two_user_boundary_endpoints(gen):
    h1, h2 = complex_normal(gen, (2, 4))
    curve = zf_two_user_boundary(h1, h2, 2.0, 0.5, grid_size=11)
    assert curve.shape == (13, 2)
    assert curve[0, 0] == 0 and curve[-1, 1] == 0
    assert curve[0, 1] == pytest.approx(np.log2(1 + 2.0 * np.vdot(h2, h2).real / 0.5))
    assert np.all(np.diff(curve[1:-1, 0]) > 0)


@given(st.integers(0, 2**32 - 1))
def test_power_split_curve_is_concave(seed):
    gen = Rng(seed).generator()
    h1, h2 = complex_normal(gen, (2, 3))
    c = zf_two_user_boundary(h1, h2, 1.0, 0.1, grid_size=201)[1:-1]
    # r2 as a function of r1 along the split: slopes must be non-increasing
    slopes = np.diff(c[:, 1]) / np.diff(c[:, 0])
    assert np.all(np.diff(slopes) <= 1e-9 * np.max(np.abs(slopes)))
