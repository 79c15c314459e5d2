import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irsbc.chanpen import (Rng, complex_normal, default_iid_scenario, default_scenario,
                           half_circle_positions, impose_direct_correlation,
                           orthogonal_user_channels, pathloss_linear, sample_channels)
from irsbc.errors import InvalidDistance
from irsbc.model import PhaseConfig, correlation


def test_streams_are_reproducible_and_distinct():
    a = Rng(7, 3).generator().standard_normal(5)
    b = Rng(7, 3).generator().standard_normal(5)
    c = Rng(7, 4).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert Rng(7).spawn(3) == Rng(7, 3)


def test_complex_normal_variance():
    z = complex_normal(Rng(1).generator(), 200_000, 2.5)
    # var of |z|^2 estimate is var^2 / n
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2.5, abs=4 * 2.5 / math.sqrt(200_000))
    assert abs(np.mean(z)) < 0.02


def test_pathloss():
    assert pathloss_linear(1.0, 2.2) == pytest.approx(1e-3)
    assert pathloss_linear(10.0, 2.0) == pytest.approx(1e-5)
    with pytest.raises(InvalidDistance):
        pathloss_linear(0.5, 2.0)


def test_half_circle():
    pts = half_circle_positions(3, (50.0, 3.0, 0.0))
    for p in pts:
        assert math.dist(p, (50.0, 3.0, 0.0)) == pytest.approx(5.0)
        assert p[1] > 3.0
    assert len(set(pts)) == 3


def test_sample_shapes_and_modes():
    scn = default_scenario()
    ch = sample_channels(scn, Rng(0))
    ch.check(scn)
    assert ch.G.shape == (8, 4) and ch.hr.shape == (2, 8)
    iid = sample_channels(default_iid_scenario(N=16), Rng(0))
    assert not np.any(iid.hd)


def test_aggregated_variances():
    scn = default_scenario(K=2, N=8)
    geo = scn.geometry
    pl_g = pathloss_linear(math.dist(geo.bs_pos, geo.irs_pos), geo.alpha_bs_irs)
    pl_r = pathloss_linear(5.0, geo.alpha_irs_user)
    g2, r2 = [], []
    for t in range(400):
        ch = sample_channels(scn, Rng(3, t))
        g2.append(np.mean(np.abs(ch.G) ** 2))
        r2.append(np.mean(np.abs(ch.hr) ** 2))
    # grouped rows add Nbar element gains; user links are rescaled to one element's gain
    assert np.mean(g2) == pytest.approx(scn.Nbar * pl_g, rel=0.05)
    assert np.mean(r2) == pytest.approx(pl_r, rel=0.05)


@given(st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_direct_correlation_hits_target(rho_d2, seed):
    hd = complex_normal(Rng(seed).generator(), (2, 4))
    out = impose_direct_correlation(hd, rho_d2)
    np.testing.assert_allclose(out[0], hd[0])
    assert np.linalg.norm(out[1]) == pytest.approx(np.linalg.norm(hd[1]))
    got = abs(np.vdot(out[0], out[1])) ** 2 / (np.vdot(out[0], out[0]).real * np.vdot(out[1], out[1]).real)
    assert got == pytest.approx(rho_d2, abs=1e-12)


def test_scenario_rho_d2_applied():
    scn = default_scenario().replace(rho_d2=0.8)
    ch = sample_channels(scn, Rng(5))
    h1, h2 = ch.hd
    assert abs(np.vdot(h1, h2)) ** 2 / (np.vdot(h1, h1).real * np.vdot(h2, h2).real) == pytest.approx(0.8)


@given(st.integers(0, 2**32 - 1))
def test_orthogonal_channels_stay_orthogonal(seed):
    gen = Rng(seed).generator()
    ch = orthogonal_user_channels(4, 6, gen)
    cfg = PhaseConfig(tuple(gen.integers(0, 4, size=6)), 4)
    assert correlation(ch, cfg, 0, 1) < 1e-12
