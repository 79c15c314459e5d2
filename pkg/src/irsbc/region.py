"""Rate/capacity region characterization.

``bisect_rate`` finds the largest sum rate ``R`` whose SINR targets
``2^(alpha_k R) - 1`` are reachable with ``Pmax`` after minimizing the
required power over phase configurations.  Sweeping the rate profile gives
the static Pareto boundary; its convex hull with the origin is the region
under time sharing.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .dpc import sinr_targets
from .errors import Infeasible
from .model import PhaseConfig, RateProfile
from .parallel import pmap
from .phaseopt import (DEFAULT_BUDGET, ChannelGainCost, DpcPowerCost, ZfPowerCost,
                       alternating_search, exhaustive_search)

SCHEMES = ("dpc", "zf")
METHODS = ("exhaustive", "alternating")


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    alpha: RateProfile
    rates: tuple
    phase: PhaseConfig
    scheme: str
    method: str
    sum_rate: float = 0.0
    power: float = 0.0
    iterations: int = 0

    @property
    def rate_array(self):
        return np.asarray(self.rates, dtype=float)


@dataclass(frozen=True)
class TimeShare:
    """Hull point dominating a sampled point: ``target = beta * a + (1 - beta) * b``.

    ``edge`` holds the hull vertex indices ``(a, b)``; ``beta`` is the time
    fraction spent on the configuration generating vertex ``a``.
    """

    point: int
    edge: tuple
    beta: float
    target: tuple


@dataclass(frozen=True, eq=False)
class RegionBoundary:
    points: tuple
    hull: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    hull_sources: tuple = ()
    timeshare: tuple = ()

    @property
    def rates(self):
        return np.array([p.rates for p in self.points], dtype=float)

    @property
    def K(self):
        return len(self.points[0].rates) if self.points else 0


def rate_upper_bound(scn, ch):
    """Sum of interference-free single-user rates at full power and perfect phase alignment."""
    gnorm = np.linalg.norm(ch.G, axis=1)
    amp = np.linalg.norm(ch.hd, axis=1) + np.abs(ch.hr) @ gnorm
    return float(np.sum(np.log2(1.0 + scn.Pmax * amp ** 2 / scn.sigma2)))


def _power_cost(scheme, ch, q, gamma, sigma2):
    if scheme == "dpc":
        return DpcPowerCost(ch, q, gamma, sigma2)
    if scheme == "zf":
        return ZfPowerCost(ch, q, gamma, sigma2)
    raise ValueError(f"unknown scheme {scheme!r}")


def _search(cost, ch, q, method, budget, init, eps1, max_sweeps, extra_inits=()):
    if not ch.has_irs:
        zeros = np.zeros(ch.N, dtype=np.int64)
        return PhaseConfig(tuple(zeros), q), float(cost(zeros))
    if method == "exhaustive":
        rep = exhaustive_search(cost, ch.N, q, budget)
        return rep.best, rep.best_cost
    if method != "alternating":
        raise ValueError(f"unknown method {method!r}")
    best = None
    for start in (init, *extra_inits):
        rep = alternating_search(cost, ch.N, q, init=start, eps1=eps1, max_sweeps=max_sweeps)
        if best is None or rep.best_cost < best.best_cost:
            best = rep
    return best.best, best.best_cost


def bisect_rate(scn, ch, alpha, scheme="dpc", method="exhaustive", eps2=1e-3,
                budget=DEFAULT_BUDGET, eps1=1e-4, max_sweeps=50, restarts=0, rng=None,
                r_max=None) -> BoundaryPoint:
    """Largest sum rate achievable along rate profile ``alpha``.

    Bisects ``[0, r_max]`` until the bracket is at most ``eps2`` wide and
    returns the feasible end of the bracket together with the phase config
    that achieved it.  In alternating mode each probe is warm-started from
    the previous probe's config; ``restarts`` random configs are added on
    the first probe.
    """
    if not eps2 > 0:
        raise ValueError("eps2 must be positive")
    if not isinstance(alpha, RateProfile):
        alpha = RateProfile(tuple(alpha))
    if alpha.K != ch.K:
        raise ValueError(f"rate profile has {alpha.K} entries for {ch.K} users")
    if scheme == "zf" and ch.K > ch.M:
        raise Infeasible(f"ZF cannot serve K={ch.K} users with M={ch.M} antennas")
    q = scn.Q
    hi = rate_upper_bound(scn, ch) if r_max is None else float(r_max)
    lo = 0.0
    best_cfg = PhaseConfig.zeros(ch.N, q)
    best_power = 0.0
    warm = None
    extra = ()
    if method == "alternating" and restarts:
        from .phaseopt import _as_generator
        gen = _as_generator(rng)
        extra = tuple(gen.integers(0, q, size=ch.N) for _ in range(restarts))
    iterations = 0
    while hi - lo > eps2:
        mid = 0.5 * (lo + hi)
        cost = _power_cost(scheme, ch, q, sinr_targets(alpha, mid), scn.sigma2)
        cfg, power = _search(cost, ch, q, method, budget, warm, eps1, max_sweeps, extra)
        extra = ()
        warm = cfg
        iterations += 1
        if power > scn.Pmax:
            hi = mid
        else:
            lo, best_cfg, best_power = mid, cfg, power
    rates = tuple(float(x) for x in lo * alpha.array)
    return BoundaryPoint(alpha=alpha, rates=rates, phase=best_cfg, scheme=scheme, method=method,
                         sum_rate=lo, power=best_power, iterations=iterations)


def profile_grid(k, s):
    """All rate profiles with entries in ``{0, 1/s, ..., 1}``; for K = 2 ordered by alpha_1."""
    if k == 1:
        return [RateProfile((1.0,))]
    if k == 2:
        return [RateProfile((i / s, 1.0 - i / s)) for i in range(s + 1)]
    out = []
    for parts in itertools.product(range(s + 1), repeat=k - 1):
        rest = s - sum(parts)
        if rest >= 0:
            out.append(RateProfile(tuple(p / s for p in parts) + (rest / s,)))
    return out


def _bisect_task(alpha, scn, ch, scheme, method, eps2, budget, eps1, max_sweeps):
    return bisect_rate(scn, ch, alpha, scheme, method, eps2=eps2, budget=budget, eps1=eps1,
                       max_sweeps=max_sweeps)


def sweep_boundary(scn, ch, scheme="dpc", method="exhaustive", grid=20, eps2=1e-3,
                   budget=DEFAULT_BUDGET, eps1=1e-4, max_sweeps=50, threads=1) -> RegionBoundary:
    """Pareto samples over a rate-profile grid; hull and time sharing for K = 2."""
    alphas = profile_grid(ch.K, grid)
    task = partial(_bisect_task, scn=scn, ch=ch, scheme=scheme, method=method, eps2=eps2,
                   budget=budget, eps1=eps1, max_sweeps=max_sweeps)
    points = tuple(pmap(task, alphas, threads))
    return build_region(points)


def tdma_boundary(scn, ch, method="exhaustive", grid=20, budget=DEFAULT_BUDGET,
                  eps1=1e-4, max_sweeps=50) -> RegionBoundary:
    """Time sharing between single-user transmissions, each with its own best phases.

    The phase stored with a point is the one of the user holding the larger
    time share.
    """
    q = scn.Q
    rmax, cfgs = [], []
    for k in range(ch.K):
        cfg, neg_gain = _search(ChannelGainCost(ch, q, k), ch, q, method, budget, None,
                                eps1, max_sweeps)
        rmax.append(math.log2(1.0 + scn.Pmax * (-neg_gain) / scn.sigma2))
        cfgs.append(cfg)
    points = []
    for alpha in profile_grid(ch.K, grid):
        # time fractions proportional to alpha_k / rmax_k keep rates on the profile ray
        w = np.array([a / r if r > 0 else 0.0 for a, r in zip(alpha.alpha, rmax)])
        share = w / w.sum() if w.sum() > 0 else np.full(ch.K, 1.0 / ch.K)
        rates = tuple(float(x) for x in share * np.asarray(rmax))
        points.append(BoundaryPoint(alpha=alpha, rates=rates, phase=cfgs[int(np.argmax(share))],
                                    scheme="tdma", method=method, sum_rate=float(sum(rates)),
                                    power=scn.Pmax))
    return build_region(tuple(points))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _monotone_chain(pts):
    """Indices of the strict convex hull, counter-clockwise from the lowest-leftmost point."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    if len(order) <= 2:
        return order
    scale = max(max(abs(c) for c in p) for p in pts)
    # turns within rounding of a straight line count as collinear
    tol = 1e-12 * scale * scale
    lower, upper = [], []
    for i in order:
        while len(lower) >= 2 and _cross(pts[lower[-2]], pts[lower[-1]], pts[i]) <= tol:
            lower.pop()
        lower.append(i)
    for i in reversed(order):
        while len(upper) >= 2 and _cross(pts[upper[-2]], pts[upper[-1]], pts[i]) <= tol:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def convex_hull_2d(rates):
    """Convex hull of two-user rate pairs with the origin and the axis closures.

    Returns ``(hull, sources, timeshare)``: vertices counter-clockwise from
    the origin, where each vertex came from (an input index, ``"origin"``,
    ``"axis1"`` or ``"axis2"``), and a :class:`TimeShare` for every input
    point that is not itself a vertex.
    """
    rates = np.asarray(rates, dtype=float).reshape(-1, 2)
    if rates.shape[0] == 0:
        return np.zeros((1, 2)), ("origin",), ()
    if np.any(rates < 0):
        raise ValueError("rates must be non-negative")
    r1max, r2max = float(rates[:, 0].max()), float(rates[:, 1].max())
    cand = [(tuple(map(float, r)), i) for i, r in enumerate(rates)]
    cand += [((0.0, 0.0), "origin"), ((r1max, 0.0), "axis1"), ((0.0, r2max), "axis2")]
    seen, pts, srcs = set(), [], []
    for p, s in cand:
        if p not in seen:
            seen.add(p)
            pts.append(p)
            srcs.append(s)
    idx = _monotone_chain(pts)
    start = next((j for j, i in enumerate(idx) if pts[i] == (0.0, 0.0)), 0)
    idx = idx[start:] + idx[:start]
    hull = np.array([pts[i] for i in idx], dtype=float)
    sources = tuple(srcs[i] for i in idx)
    vertex_inputs = {s for s in sources if isinstance(s, int)}
    shares = []
    for i, r in enumerate(rates):
        if i in vertex_inputs or not np.any(r > 0):
            continue
        ts = _dominating(hull, r, i)
        if ts is not None:
            shares.append(ts)
    return hull, sources, tuple(shares)


def _dominating(hull, p, i):
    """Hull edge hit by the ray from the origin through ``p``."""
    nv = len(hull)
    for j in range(1, nv):
        a = hull[j]
        b = hull[(j + 1) % nv]
        d = b - a
        den = p[0] * d[1] - p[1] * d[0]
        if abs(den) < 1e-300:
            continue
        t = (a[0] * p[1] - a[1] * p[0]) / den
        if -1e-12 <= t <= 1 + 1e-12:
            t = min(max(t, 0.0), 1.0)
            target = a + t * d
            if target @ p < 0:
                continue
            return TimeShare(point=i, edge=(j, (j + 1) % nv), beta=1.0 - t,
                             target=(float(target[0]), float(target[1])))
    return None


def build_region(points) -> RegionBoundary:
    points = tuple(points)
    if not points or len(points[0].rates) != 2:
        return RegionBoundary(points=points)
    hull, sources, shares = convex_hull_2d([p.rates for p in points])
    return RegionBoundary(points=points, hull=hull, hull_sources=sources, timeshare=shares)


def boundary_from_rates(rates, scheme, method, phase):
    """Wrap raw two-user rate pairs (e.g. a power-split curve) as a region boundary."""
    pts = []
    for r in np.asarray(rates, dtype=float):
        total = float(r.sum())
        alpha = RateProfile(tuple(r / total)) if total > 0 else RateProfile((0.5, 0.5))
        pts.append(BoundaryPoint(alpha=alpha, rates=tuple(map(float, r)), phase=phase,
                                 scheme=scheme, method=method, sum_rate=total))
    return build_region(pts)


def _segment_distance(p, a, b):
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0 else min(max(float((p - a) @ d) / dd, 0.0), 1.0)
    return float(np.linalg.norm(p - (a + t * d)))


def convexity_gap(boundary: RegionBoundary) -> float:
    """Largest distance from a sampled point to its dominating hull edge (0 if convex)."""
    if boundary.K != 2:
        raise ValueError("convexity gap is defined for two users")
    gap = 0.0
    rates = boundary.rates
    for ts in boundary.timeshare:
        a, b = boundary.hull[ts.edge[0]], boundary.hull[ts.edge[1]]
        gap = max(gap, _segment_distance(rates[ts.point], a, b))
    return gap


def region_to_rows(boundary):
    k = boundary.K
    header = [f"alpha{i + 1}" for i in range(k)] + [f"r{i + 1}" for i in range(k)]
    header += ["scheme", "method", "phase_indices"]
    rows = []
    for p in boundary.points:
        rows.append([*p.alpha.alpha, *p.rates, p.scheme, p.method,
                     " ".join(str(i) for i in p.phase.indices)])
    return header, rows


def region_to_csv(boundary):
    header, rows = region_to_rows(boundary)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def region_to_dict(boundary):
    return {
        "points": [
            {"alpha": list(p.alpha.alpha), "rates": list(p.rates), "sum_rate": p.sum_rate,
             "power": p.power, "phase_indices": list(p.phase.indices), "Q": p.phase.Q,
             "scheme": p.scheme, "method": p.method, "iterations": p.iterations}
            for p in boundary.points
        ],
        "hull": [[float(x), float(y)] for x, y in boundary.hull],
        "hull_sources": list(boundary.hull_sources),
        "timeshare": [
            {"point": t.point, "edge": list(t.edge), "beta": t.beta, "target": list(t.target)}
            for t in boundary.timeshare
        ],
    }
