import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irsbc.chanpen import (Rng, complex_normal, default_scenario, orthogonal_user_channels,
                           sample_channels)
from irsbc.dpc import sinr_targets
from irsbc.errors import BudgetExceeded, Infeasible
from irsbc.model import ChannelSet, PhaseConfig, RateProfile, effective_channels
from irsbc.phaseopt import DpcPowerCost, ZfPowerCost, exhaustive_search
from irsbc.region import (bisect_rate, boundary_from_rates, convex_hull_2d, convexity_gap,
                          profile_grid, rate_upper_bound, region_to_csv, region_to_dict,
                          sweep_boundary, tdma_boundary)
from irsbc.zf import zf_two_user_boundary

SMALL = default_scenario(N=4)


def _small(seed):
    return sample_channels(SMALL, Rng(seed))


def test_single_user_no_irs_capacity(gen):
    scn = default_scenario(K=1, N=2)
    hd = complex_normal(gen, (1, 4), 1e-9)
    ch = ChannelSet(np.zeros((2, 4)), hd, np.zeros((1, 2)))
    pt = bisect_rate(scn, ch, RateProfile((1.0,)), eps2=1e-4)
    exact = math.log2(1 + scn.Pmax * np.sum(np.abs(hd) ** 2) / scn.sigma2)
    assert abs(pt.sum_rate - exact) <= 1e-4
    assert pt.sum_rate <= exact


def test_degenerate_profile_is_single_user_max():
    ch = _small(1)
    pt = bisect_rate(SMALL, ch, RateProfile((1.0, 0.0)), "dpc", "exhaustive", eps2=1e-4)
    assert pt.rates[1] == 0.0
    gains = [np.sum(np.abs(effective_channels(ch, PhaseConfig(c, SMALL.Q))[0]) ** 2)
             for c in itertools.product(range(SMALL.Q), repeat=ch.N)]
    best = math.log2(1 + SMALL.Pmax * max(gains) / SMALL.sigma2)
    assert pt.rates[0] == pytest.approx(best, abs=1e-4)


@pytest.mark.parametrize("scheme,cost", [("dpc", DpcPowerCost), ("zf", ZfPowerCost)])
def test_power_is_tight_at_termination(scheme, cost):
    ch = _small(2)
    eps2 = 1e-3
    alpha = RateProfile((0.4, 0.6))
    pt = bisect_rate(SMALL, ch, alpha, scheme, "exhaustive", eps2=eps2)
    p = cost(ch, SMALL.Q, sinr_targets(alpha, pt.sum_rate), SMALL.sigma2)(pt.phase.array)
    assert SMALL.Pmax * (1 - 10 * eps2) <= p <= SMALL.Pmax
    assert p == pytest.approx(pt.power)
    np.testing.assert_allclose(pt.rates, pt.sum_rate * alpha.array, atol=1e-12)


def test_iteration_bound():
    ch = _small(3)
    for eps2 in (1e-2, 1e-3, 1e-5):
        pt = bisect_rate(SMALL, ch, RateProfile((0.5, 0.5)), "dpc", "alternating", eps2=eps2)
        assert pt.iterations <= math.ceil(math.log2(rate_upper_bound(SMALL, ch) / eps2))


def test_min_power_increases_with_rate():
    ch = _small(4)
    alpha = RateProfile((0.3, 0.7))
    powers = [exhaustive_search(DpcPowerCost(ch, SMALL.Q, sinr_targets(alpha, r), SMALL.sigma2),
                                ch.N, SMALL.Q).best_cost for r in np.linspace(1, 14, 8)]
    assert np.all(np.diff(powers) > 0)


def test_zf_needs_enough_antennas():
    scn = default_scenario(K=5, N=2)
    ch = sample_channels(scn, Rng(0))
    with pytest.raises(Infeasible):
        bisect_rate(scn, ch, RateProfile((0.2,) * 5), "zf")


def test_budget_propagates():
    with pytest.raises(BudgetExceeded):
        bisect_rate(SMALL, _small(0), RateProfile((0.5, 0.5)), budget=100)


def test_profile_grid():
    assert [p.alpha for p in profile_grid(2, 2)] == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]
    grid3 = profile_grid(3, 4)
    assert len(grid3) == 15
    assert all(abs(sum(p.alpha) - 1) < 1e-12 for p in grid3)


def test_grid_one_gives_corners_and_origin():
    b = sweep_boundary(SMALL, _small(5), "dpc", "exhaustive", grid=1)
    assert len(b.points) == 2
    assert b.points[0].rates[0] == 0 and b.points[1].rates[1] == 0
    assert set(b.hull_sources) == {"origin", 0, 1}


def test_orthogonal_channels_dpc_equals_zf():
    ch = orthogonal_user_channels(4, 4, Rng(6).generator(), var=1e-9)
    d = sweep_boundary(SMALL, ch, "dpc", "exhaustive", grid=4)
    z = sweep_boundary(SMALL, ch, "zf", "exhaustive", grid=4)
    np.testing.assert_allclose(d.rates, z.rates, atol=1e-6)


def _inside(hull, p, tol):
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < -tol:
            return False
    return True


def test_dpc_dominates_zf():
    ch = _small(7)
    eps2 = 1e-3
    d = sweep_boundary(SMALL, ch, "dpc", "exhaustive", grid=6, eps2=eps2)
    z = sweep_boundary(SMALL, ch, "zf", "exhaustive", grid=6, eps2=eps2)
    assert np.all(d.rates >= z.rates - eps2 - 1e-9)
    for v in z.hull:
        assert _inside(d.hull, v, 2 * eps2 * np.max(d.rates))


def test_tdma_line():
    b = tdma_boundary(SMALL, _small(8), grid=4)
    r = b.rates
    r1, r2 = r[-1, 0], r[0, 1]
    np.testing.assert_allclose(r[:, 0] / r1 + r[:, 1] / r2, 1.0)
    assert convexity_gap(b) < 1e-9
    assert len(b.hull) == 3


def test_single_point_hull():
    hull, sources, shares = convex_hull_2d([[1.0, 1.0]])
    assert [tuple(v) for v in hull] == [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert sources == ("origin", "axis1", 0, "axis2")
    assert shares == ()


def test_collinear_points_dropped():
    pts = [[0.0, 2.0], [1.0, 1.0], [2.0, 0.0], [0.5, 1.5]]
    hull, sources, shares = convex_hull_2d(pts)
    assert [tuple(v) for v in hull] == [(0, 0), (2, 0), (0, 2)]
    assert {s.point for s in shares} == {1, 3}
    for s in shares:
        assert s.target == pytest.approx(tuple(pts[s.point]))


def _brute_hull(pts):
    """Extreme points of the convex hull by checking every ordered pair as a supporting line."""
    pts = np.asarray(pts)
    keep = set()
    for i, j in itertools.permutations(range(len(pts)), 2):
        d = pts[j] - pts[i]
        if not np.any(d):
            continue
        cross = d[0] * (pts[:, 1] - pts[i, 1]) - d[1] * (pts[:, 0] - pts[i, 0])
        if np.all(cross >= -1e-9):
            on = np.abs(cross) <= 1e-9
            proj = (pts[on] - pts[i]) @ d
            line = pts[on]
            keep.add(tuple(line[np.argmin(proj)]))
            keep.add(tuple(line[np.argmax(proj)]))
    return keep


# rates finer than the bisection tolerance carry no information
rate = st.floats(0, 10).map(lambda x: round(x, 4))
clouds = st.lists(st.tuples(rate, rate), min_size=1, max_size=12)


@given(clouds)
def test_hull_matches_brute_force(cloud):
    pts = np.array(cloud, dtype=float)
    hull, _, _ = convex_hull_2d(pts)
    full = np.vstack([pts, [[0, 0], [pts[:, 0].max(), 0], [0, pts[:, 1].max()]]])
    got = {tuple(v) for v in hull}
    want = _brute_hull(full) if np.ptp(full, axis=0).min() > 0 else got
    assert got == want


@given(clouds)
def test_hull_properties(cloud):
    pts = np.array(cloud, dtype=float)
    hull, sources, shares = convex_hull_2d(pts)
    again, _, _ = convex_hull_2d(hull)
    np.testing.assert_array_equal(again, hull)
    n = len(hull)
    if n >= 3:
        d = np.roll(hull, -1, axis=0) - hull
        cross = d[:, 0] * np.roll(d, -1, axis=0)[:, 1] - d[:, 1] * np.roll(d, -1, axis=0)[:, 0]
        assert min(cross) > 0
    for s, v in zip(sources, hull):
        if isinstance(s, int):
            np.testing.assert_array_equal(pts[s], v)
    for s in shares:
        assert 0.0 <= s.beta <= 1.0
        a, b = hull[s.edge[0]], hull[s.edge[1]]
        np.testing.assert_allclose(s.beta * a + (1 - s.beta) * b, s.target, atol=1e-9)
        assert np.all(np.asarray(s.target) >= pts[s.point] - 1e-9)


def test_zf_gap_zero_iff_orthogonal(gen):
    h = complex_normal(gen, (2, 4))
    h[1] -= np.vdot(h[0], h[1]) / np.vdot(h[0], h[0]) * h[0]
    cfg = PhaseConfig.zeros(1, 4)
    flat = boundary_from_rates(zf_two_user_boundary(h[0], h[1], 1.0, 0.1, 101), "zf", "fixed", cfg)
    assert convexity_gap(flat) <= 1e-9
    h[1] += 0.5 * h[0]
    bent = boundary_from_rates(zf_two_user_boundary(h[0], h[1], 1.0, 0.1, 101), "zf", "fixed", cfg)
    assert convexity_gap(bent) > 0


def test_correlated_direct_links_make_zf_nonconvex():
    scn = default_scenario().replace(rho_d2=0.8)
    ch = sample_channels(scn, Rng(0)).without_irs()
    b = sweep_boundary(scn, ch, "zf", "exhaustive", grid=10)
    assert convexity_gap(b) > 0


def test_dpc_default_setup_nearly_convex():
    scn = default_scenario()
    ch = sample_channels(scn, Rng(0))
    b = sweep_boundary(scn, ch, "dpc", "alternating", grid=20)
    peak = max(b.rates[:, 0].max(), b.rates[:, 1].max())
    assert convexity_gap(b) < 0.01 * peak


def test_serialization():
    b = sweep_boundary(SMALL, _small(9), "zf", "alternating", grid=2)
    csv_text = region_to_csv(b)
    lines = csv_text.splitlines()
    assert lines[0] == "alpha1,alpha2,r1,r2,scheme,method,phase_indices"
    assert len(lines) == 4 and lines[1].split(",")[4:6] == ["zf", "alternating"]
    doc = region_to_dict(b)
    assert set(doc) == {"points", "hull", "hull_sources", "timeshare"}
    assert len(doc["points"][0]["phase_indices"]) == 4
