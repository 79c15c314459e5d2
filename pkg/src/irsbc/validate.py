"""Fast self-checks against independent oracles, for ``irsbc validate``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .chanpen import Rng, complex_normal, default_scenario, orthogonal_user_channels, sample_channels
from .dpc import achieved_sinr, backward_power_oracle, dpc_min_power
from .experiments import rate_loss_bound
from .model import ChannelSet, RateProfile
from .phaseopt import DpcPowerCost, alternating_search, exhaustive_search
from .region import bisect_rate, convex_hull_2d
from .zf import zf_min_power, zf_rates


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def check_hermitian_solve(gen):
    worst = 0.0
    for m in (1, 2, 4, 8):
        a = complex_normal(gen, (m, m))
        a = a @ a.conj().T + m * np.eye(m)
        b = complex_normal(gen, m)
        x = numerics.hermitian_solve(a, b)
        worst = max(worst, np.linalg.norm(a @ x - b) / np.linalg.norm(b))
    return worst < 1e-10, f"max relative residual {worst:.2e}"


def check_dpc_duality(gen):
    worst_total, worst_sinr = 0.0, 0.0
    for _ in range(50):
        m = int(gen.choice([2, 4, 8]))
        k = int(gen.integers(1, min(m, 4) + 1))
        h = complex_normal(gen, (k, m))
        gamma = gen.uniform(0.1, 10.0, size=k)
        sol = dpc_min_power(h, gamma, 1.0)
        p = backward_power_oracle(h, sol.directions, gamma, 1.0)
        worst_total = max(worst_total, _rel(sol.p_star, float(np.sum(p))))
        sinr = achieved_sinr(h, sol.directions, p, 1.0)
        worst_sinr = max(worst_sinr, float(np.max(np.abs(sinr - gamma) / gamma)))
    ok = worst_total < 1e-8 and worst_sinr < 1e-8
    return ok, f"total {worst_total:.1e}, sinr {worst_sinr:.1e}"


def check_zf(gen):
    worst = 0.0
    for _ in range(20):
        h = complex_normal(gen, (3, 5))
        gamma = gen.uniform(0.5, 5.0, size=3)
        sol = zf_min_power(h, gamma, 1.0)
        inv = np.linalg.inv(h.conj() @ h.T)  # (H^H H)^-1 with columns h_k
        worst = max(worst, float(np.max(np.abs(sol.powers - gamma * np.real(np.diag(inv))) /
                                       sol.powers)))
        rates = zf_rates(h, sol.directions, sol.powers, 1.0)
        worst = max(worst, float(np.max(np.abs(rates - np.log2(1 + gamma)))))
    return worst < 1e-9, f"max deviation {worst:.1e}"


def check_search(gen):
    scn = default_scenario(N=4)
    worse = 0
    for t in range(10):
        ch = sample_channels(scn, Rng(int(gen.integers(1 << 30)), t))
        cost = DpcPowerCost(ch, scn.Q, np.array([3.0, 3.0]), scn.sigma2)
        ex = exhaustive_search(cost, ch.N, scn.Q).best_cost
        alt = alternating_search(cost, ch.N, scn.Q).best_cost
        brute = min(cost(np.array(c)) for c in itertools.product(range(scn.Q), repeat=ch.N))
        if alt < ex * (1 - 1e-12) or _rel(ex, brute) > 1e-12:
            worse += 1
    return worse == 0, f"{worse} violations in 10 instances"


def check_bisection(gen):
    scn = default_scenario(K=1, N=2)
    worst = 0.0
    for _ in range(10):
        hd = complex_normal(gen, (1, 4), 1e-9)
        ch = ChannelSet(np.zeros((2, 4)), hd, np.zeros((1, 2)))
        exact = math.log2(1 + scn.Pmax * float(np.sum(np.abs(hd) ** 2)) / scn.sigma2)
        got = bisect_rate(scn, ch, RateProfile((1.0,)), "dpc", "exhaustive", eps2=1e-4).sum_rate
        worst = max(worst, abs(got - exact))
    return worst <= 1e-4, f"max error {worst:.1e} bps/Hz"


def _brute_hull_edges(pts):
    edges = set()
    for i, j in itertools.permutations(range(len(pts)), 2):
        d = pts[j] - pts[i]
        cross = d[0] * (pts[:, 1] - pts[i, 1]) - d[1] * (pts[:, 0] - pts[i, 0])
        if np.all(cross >= -1e-12):
            edges.add((i, j))
    return edges


def check_hull(gen):
    bad = 0
    for _ in range(20):
        r = gen.uniform(0.0, 1.0, size=(12, 2))
        hull, _, _ = convex_hull_2d(r)
        pts = np.vstack([r, [[0, 0], [r[:, 0].max(), 0], [0, r[:, 1].max()]]])
        verts = {i for e in _brute_hull_edges(pts) for i in e}
        # keep only extreme points: drop those lying strictly inside an edge
        brute = {tuple(pts[i]) for i in verts if _is_extreme(pts, i)}
        if brute != {tuple(v) for v in hull}:
            bad += 1
    return bad == 0, f"{bad} mismatches in 20 clouds"


def _is_extreme(pts, i):
    others = np.delete(pts, i, axis=0)
    for a, b in itertools.combinations(range(len(others)), 2):
        pa, pb = others[a], others[b]
        d = pb - pa
        if abs(d[0] * (pts[i, 1] - pa[1]) - d[1] * (pts[i, 0] - pa[0])) < 1e-12:
            t = np.dot(pts[i] - pa, d) / np.dot(d, d)
            if 0 <= t <= 1:
                return False
    return True


def check_orthogonal_equality(gen):
    scn = default_scenario(N=4)
    ch = orthogonal_user_channels(scn.M, 4, gen, var=1e-9)
    worst = 0.0
    for a in (0.2, 0.5, 0.8):
        alpha = RateProfile((a, 1 - a))
        d = bisect_rate(scn, ch, alpha, "dpc", "exhaustive").rates
        z = bisect_rate(scn, ch, alpha, "zf", "exhaustive").rates
        worst = max(worst, float(np.max(np.abs(np.subtract(d, z)))))
    return worst <= 2e-3, f"max DPC/ZF gap {worst:.1e} bps/Hz"


def check_rate_loss(gen):
    vals = (rate_loss_bound(0.0), rate_loss_bound(1e-3), rate_loss_bound(0.5))
    ok = vals[0] == 0.0 and abs(vals[1] - 1.4434e-3) < 1e-6 and abs(vals[2] - 1.0) < 1e-15
    return ok, ", ".join(f"{v:.4e}" for v in vals)


CHECKS = (
    ("hermitian_solve", check_hermitian_solve),
    ("dpc_duality", check_dpc_duality),
    ("zf_power", check_zf),
    ("phase_search", check_search),
    ("bisection_single_user", check_bisection),
    ("convex_hull", check_hull),
    ("orthogonal_dpc_equals_zf", check_orthogonal_equality),
    ("rate_loss", check_rate_loss),
)


def run_checks(seed=0):
    out = []
    for i, (name, fn) in enumerate(CHECKS):
        gen = Rng(seed, i).generator()
        try:
            ok, detail = fn(gen)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
