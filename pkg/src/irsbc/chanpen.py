"""Seeded channel generation.

Random numbers come from numpy's counter-based Philox generator keyed by
``(seed, stream)``, so a Monte Carlo trial can be regenerated from its
stream index alone regardless of how trials are spread over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDistance
from .model import ChannelSet, GeometrySpec, IidSpec, Scenario

__all__ = [
    "GeometrySpec", "Rng", "RNG_VERSION", "pathloss_linear", "sample_channels",
    "default_scenario", "default_iid_scenario", "half_circle_positions",
    "impose_direct_correlation", "complex_normal", "orthogonal_user_channels",
]

# bump when the mapping (seed, stream) -> channel draws changes
RNG_VERSION = 1

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Rng:
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream", int(self.stream) & _MASK64)

    def generator(self):
        return np.random.Generator(np.random.Philox(key=self.seed | (self.stream << 64)))

    def spawn(self, stream):
        return Rng(self.seed, stream)


def complex_normal(gen, shape, var=1.0):
    """CN(0, var) samples: real and imaginary parts each N(0, var/2)."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    z = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    return z * scale


def pathloss_linear(d, exponent, pl_ref_db=30.0):
    if not d >= 1.0:
        raise InvalidDistance(f"distance {d} m is inside the 1 m reference distance")
    return 10.0 ** (-pl_ref_db / 10.0) * d ** (-exponent)


def half_circle_positions(k, center, radius=5.0):
    """``k`` points equally spaced at angles in (0, pi) around ``center`` (xy plane)."""
    cx, cy, cz = center
    angles = [math.pi * (i + 1) / (k + 1) for i in range(k)]
    return tuple((cx + radius * math.cos(a), cy + radius * math.sin(a), cz) for a in angles)


def default_scenario(K=2, N=8):
    irs = (50.0, 3.0, 0.0)
    geo = GeometrySpec(
        bs_pos=(0.0, 0.0, 0.0),
        irs_pos=irs,
        user_positions=half_circle_positions(K, irs, 5.0),
        alpha_bs_irs=2.2,
        alpha_irs_user=2.2,
        alpha_bs_user=3.4,
        pl_ref_db=30.0,
    )
    return Scenario(M=4, K=K, N=N, Nbar=4, b=2, Pmax_dBm=20.0, sigma2_dBm=-80.0,
                    channel_mode="geometric", geometry=geo)


def default_iid_scenario(M=4, K=2, N=64, b=8, Pmax_dBm=40.0, sigma2_dBm=30.0):
    """Unit-variance Rayleigh setup without direct links (10 dB transmit SNR)."""
    return Scenario(M=M, K=K, N=N, Nbar=1, b=b, Pmax_dBm=Pmax_dBm, sigma2_dBm=sigma2_dBm,
                    channel_mode="iid", iid=IidSpec(rho2_r=(1.0,) * K, rho2_g=1.0))


def _aggregate(g_el, hr_el, nbar):
    """Fold element-level channels into per-subsurface channels.

    Elements in a group share one phase, so their cascaded contributions add
    up. G rows are summed and h_r entries summed then scaled by 1/sqrt(Nbar),
    which keeps the expected cascaded power of a group equal to Nbar element
    products.
    """
    if nbar == 1:
        return g_el, hr_el
    nr, m = g_el.shape
    n = nr // nbar
    g = g_el.reshape(n, nbar, m).sum(axis=1)
    hr = hr_el.reshape(hr_el.shape[0], n, nbar).sum(axis=2) / math.sqrt(nbar)
    return g, hr


def _distance(a, b):
    return math.dist(a, b)


def sample_channels(scn: Scenario, rng: Rng) -> ChannelSet:
    gen = rng.generator()
    m, k, nr = scn.M, scn.K, scn.NR
    if scn.channel_mode == "geometric":
        geo = scn.geometry
        pl_g = pathloss_linear(_distance(geo.bs_pos, geo.irs_pos), geo.alpha_bs_irs, geo.pl_ref_db)
        pl_r = np.array([pathloss_linear(_distance(geo.irs_pos, u), geo.alpha_irs_user, geo.pl_ref_db)
                         for u in geo.user_positions])
        pl_d = np.array([pathloss_linear(_distance(geo.bs_pos, u), geo.alpha_bs_user, geo.pl_ref_db)
                         for u in geo.user_positions])
        g_el = complex_normal(gen, (nr, m), pl_g)
        hr_el = complex_normal(gen, (k, nr), pl_r[:, None])
        hd = complex_normal(gen, (k, m), pl_d[:, None])
    else:
        iid = scn.iid
        g_el = complex_normal(gen, (nr, m), iid.rho2_g)
        hr_el = complex_normal(gen, (k, nr), np.asarray(iid.rho2_r)[:, None])
        hd = np.zeros((k, m), dtype=complex)
    g, hr = _aggregate(g_el, hr_el, scn.Nbar)
    if scn.rho_d2 is not None:
        hd = impose_direct_correlation(hd, scn.rho_d2)
    return ChannelSet(G=g, hd=hd, hr=hr)


def impose_direct_correlation(hd, rho_d2):
    """Rotate user 2's direct channel so the pair has squared correlation ``rho_d2``.

    User 1's channel and both norms are kept; user 2 becomes
    ``|h2| (rho u1 e^{j phi} + sqrt(1 - rho^2) u_perp)`` where ``u_perp`` is the
    normalized part of h2 orthogonal to u1.
    """
    hd = np.array(hd, dtype=complex)
    h1, h2 = hd[0], hd[1]
    n1, n2 = np.linalg.norm(h1), np.linalg.norm(h2)
    if n1 == 0 or n2 == 0:
        return hd
    u1 = h1 / n1
    inner = np.vdot(u1, h2)
    phase = inner / abs(inner) if abs(inner) > 0 else 1.0
    perp = h2 - inner * u1
    pn = np.linalg.norm(perp)
    if pn < 1e-14 * n2:
        # h2 parallel to h1: pick any direction orthogonal to u1
        e = np.zeros_like(u1)
        e[int(np.argmin(np.abs(u1)))] = 1.0
        perp = e - np.vdot(u1, e) * u1
        pn = np.linalg.norm(perp)
    rho = math.sqrt(rho_d2)
    hd[1] = n2 * (rho * phase * u1 + math.sqrt(max(0.0, 1.0 - rho_d2)) * perp / pn)
    return hd


def orthogonal_user_channels(m, n, gen, var=1.0):
    """Two-user channels whose effective channels are orthogonal for every phase config.

    User 1 lives on the first ``m // 2`` antennas and user 2 on the rest;
    the first half of the subsurfaces reflect only onto user 1's antennas
    and serve only user 1, and likewise for the second half.
    """
    if m < 2 or n < 2:
        raise ValueError("need at least two antennas and two subsurfaces")
    ma, na = m // 2, n // 2
    g = np.zeros((n, m), dtype=complex)
    hd = np.zeros((2, m), dtype=complex)
    hr = np.zeros((2, n), dtype=complex)
    g[:na, :ma] = complex_normal(gen, (na, ma))
    g[na:, ma:] = complex_normal(gen, (n - na, m - ma))
    hd[0, :ma] = complex_normal(gen, ma, var)
    hd[1, ma:] = complex_normal(gen, m - ma, var)
    hr[0, :na] = complex_normal(gen, na, var)
    hr[1, na:] = complex_normal(gen, n - na, var)
    return ChannelSet(G=g, hd=hd, hr=hr)
