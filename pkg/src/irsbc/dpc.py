"""Dirty-paper-coding side: rates, minimum power for SINR targets, beams.

Users are encoded in index order: user ``k`` sees interference only from
users ``i > k``.  Channels are passed as a (K, M) array whose rows are the
column channels ``h_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DimensionMismatch, NonPsdCovariance, ZeroChannel, ZeroGain

ZERO_NORM = 1e-30


def sinr_targets(alpha, rate):
    """Linear SINR targets ``2^(alpha_k R) - 1`` for a rate profile and sum rate."""
    a = np.asarray(getattr(alpha, "alpha", alpha), dtype=float)
    return np.exp2(a * rate) - 1.0


@dataclass(frozen=True, eq=False)
class DpcSolution:
    p_star: float
    lam: np.ndarray
    directions: np.ndarray
    powers: np.ndarray

    def covariances(self):
        u = self.directions
        return self.powers[:, None, None] * np.einsum("ki,kj->kij", u, u.conj())


def _channels(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2:
        raise DimensionMismatch(f"channels must be a (K, M) array, got {h.shape}")
    return h


def dpc_rates(h, s, sigma2):
    """Per-user rates (bps/Hz) for covariances ``s`` of shape (K, M, M)."""
    h = _channels(h)
    s = np.asarray(s, dtype=complex)
    k, m = h.shape
    if s.shape != (k, m, m):
        raise DimensionMismatch(f"covariances {s.shape} do not match channels {h.shape}")
    for sk in s:
        scale = np.linalg.norm(sk)
        if scale == 0:
            continue
        floor = np.linalg.eigvalsh(0.5 * (sk + sk.conj().T)).min()
        if floor < -1e-10 * scale:
            raise NonPsdCovariance(f"covariance eigenvalue {floor} below PSD floor")
    # gains[j, i] = h_j^H S_i h_j
    gains = np.real(np.einsum("jm,imn,jn->ji", h.conj(), s, h))
    rates = np.empty(k)
    for j in range(k):
        interf = gains[j, j + 1:].sum()
        rates[j] = np.log2((sigma2 + gains[j, j] + interf) / (sigma2 + interf))
    return rates


def backward_power_oracle(h, directions, gamma, sigma2):
    """Powers making every SINR constraint tight for fixed unit beams.

    Solved from the last-encoded user down, since user ``k`` only sees
    interference from users encoded after it.
    """
    h = _channels(h)
    u = np.asarray(directions, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    k = h.shape[0]
    cross = np.abs(np.einsum("km,im->ki", h.conj(), u)) ** 2  # |h_k^H u_i|^2
    p = np.zeros(k)
    for j in range(k - 1, -1, -1):
        if gamma[j] == 0:
            continue
        if cross[j, j] <= 0:
            raise ZeroGain(f"user {j} has no gain along its beam")
        p[j] = gamma[j] * (sigma2 + cross[j, j + 1:] @ p[j + 1:]) / cross[j, j]
    return p


def achieved_sinr(h, directions, powers, sigma2):
    h = _channels(h)
    cross = np.abs(np.einsum("km,im->ki", h.conj(), np.asarray(directions))) ** 2
    k = h.shape[0]
    out = np.empty(k)
    for j in range(k):
        out[j] = powers[j] * cross[j, j] / (sigma2 + cross[j, j + 1:] @ powers[j + 1:])
    return out


def dpc_min_power(h, gamma, sigma2) -> DpcSolution:
    """Minimum total power meeting SINR targets ``gamma`` under DPC.

    Dual variables follow the forward recursion
    ``lam_k = sigma2 / (h_k^H (I + sum_{i<k} lam_i gamma_i h_i h_i^H / sigma2)^{-1} h_k)``
    and the optimum is ``sum_k lam_k gamma_k``.  The same inverse applied to
    ``h_k`` gives the beam direction; per-user powers then come from
    :func:`backward_power_oracle`.
    """
    h = _channels(h)
    gamma = np.asarray(gamma, dtype=float)
    k, m = h.shape
    if gamma.shape != (k,):
        raise DimensionMismatch(f"{gamma.shape[0]} targets for {k} users")
    if np.any(gamma < 0):
        raise ValueError("SINR targets must be non-negative")
    norms = np.linalg.norm(h, axis=1)
    lam = np.zeros(k)
    directions = np.zeros((k, m), dtype=complex)
    c = np.eye(m, dtype=complex)
    for j in range(k):
        if norms[j] < ZERO_NORM:
            if gamma[j] > 0:
                raise ZeroChannel(f"user {j} has a zero channel but a positive target")
            lam[j] = np.inf
            directions[j, 0] = 1.0
            continue
        if gamma[j] == 0:
            # contributes no power and leaves later users' matrices unchanged
            x = numerics.hermitian_solve(c, h[j])
            lam[j] = sigma2 / np.real(np.vdot(h[j], x))
            directions[j] = h[j] / norms[j]
            continue
        x = numerics.hermitian_solve(c, h[j])
        lam[j] = sigma2 / np.real(np.vdot(h[j], x))
        directions[j] = x / np.linalg.norm(x)
        c = c + (lam[j] * gamma[j] / sigma2) * np.outer(h[j], h[j].conj())
    active = gamma > 0
    p_star = float(np.sum(lam[active] * gamma[active]))
    powers = backward_power_oracle(h, directions, gamma, sigma2)
    return DpcSolution(p_star=p_star, lam=lam, directions=directions, powers=powers)


def dpc_min_power_batch(h, gamma, sigma2):
    """Total minimum DPC power for a stack of channel sets ``h`` of shape (B, K, M).

    Entries with a zero channel for a user with a positive target are ``inf``.
    """
    h = np.asarray(h, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    b, k, m = h.shape
    total = np.zeros(b)
    c = np.broadcast_to(np.eye(m, dtype=complex), (b, m, m)).copy()
    for j in range(k):
        if gamma[j] == 0:
            continue
        hj = h[:, j, :]
        x = numerics.batch_solve(c, hj)
        q = np.real(np.einsum("bm,bm->b", hj.conj(), x))
        with np.errstate(divide="ignore"):
            lam = np.where(q > 0, sigma2 / np.where(q > 0, q, 1.0), np.inf)
        total += lam * gamma[j]
        w = np.where(np.isfinite(lam), lam * gamma[j] / sigma2, 0.0)
        c += w[:, None, None] * np.einsum("bi,bj->bij", hj, hj.conj())
    return total
