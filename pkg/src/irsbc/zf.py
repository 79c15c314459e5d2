"""Zero-forcing side: minimum power, rates, and the two-user power-split boundary."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DimensionMismatch, OrthogonalityViolated, RankDeficient, TooManyUsers


@dataclass(frozen=True, eq=False)
class ZfSolution:
    powers: np.ndarray
    directions: np.ndarray
    feasible: bool

    @property
    def total(self):
        return float(np.sum(self.powers)) if self.feasible else np.inf


def _zf_columns(hsub):
    """Normalized columns of H (H^H H)^{-1} and the diagonal of (H^H H)^{-1}."""
    hmat = hsub.T  # M x K'
    diag = numerics.gram_inverse_diag(hmat)
    gram = hmat.conj().T @ hmat
    cols = hmat @ np.linalg.inv(gram)
    cols = cols / np.linalg.norm(cols, axis=0)
    return cols.T, diag


def zf_min_power(h, gamma, sigma2) -> ZfSolution:
    """Per-user ZF powers ``gamma_k sigma2 [(H^H H)^{-1}]_kk``.

    Users with a zero target are left out of ``H`` before inversion.
    """
    h = np.asarray(h, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    k, m = h.shape
    if gamma.shape != (k,):
        raise DimensionMismatch(f"{gamma.shape[0]} targets for {k} users")
    if k > m:
        raise TooManyUsers(f"ZF needs K <= M, got K={k}, M={m}")
    active = np.flatnonzero(gamma > 0)
    powers = np.zeros(k)
    directions = np.zeros((k, m), dtype=complex)
    try:
        if active.size:
            cols, diag = _zf_columns(h[active])
            directions[active] = cols
            powers[active] = gamma[active] * sigma2 * diag
    except RankDeficient:
        return ZfSolution(powers=np.zeros(0), directions=np.zeros((0, m), complex), feasible=False)
    idle = np.flatnonzero(gamma == 0)
    if idle.size:
        try:
            full, _ = _zf_columns(h)
            directions[idle] = full[idle]
        except RankDeficient:
            for j in idle:
                n = np.linalg.norm(h[j])
                directions[j] = h[j] / n if n > 0 else np.eye(m)[0]
    return ZfSolution(powers=powers, directions=directions, feasible=True)


def zf_rates(h, directions, powers, sigma2):
    h = np.asarray(h, dtype=complex)
    w = np.asarray(directions, dtype=complex)
    powers = np.asarray(powers, dtype=float)
    inner = np.einsum("jm,km->jk", h.conj(), w)  # h_j^H w_k
    scale = np.outer(np.linalg.norm(h, axis=1), np.linalg.norm(w, axis=1))
    k = h.shape[0]
    off = ~np.eye(k, dtype=bool) & (powers[None, :] > 0)
    if np.any(np.abs(inner[off]) > 1e-6 * scale[off]):
        raise OrthogonalityViolated("beams leak into other users' channels")
    return np.log2(1.0 + powers * np.abs(np.diag(inner)) ** 2 / sigma2)


def zf_min_power_batch(h, gamma, sigma2):
    """Total ZF power for stacks (B, K, M); rank-deficient entries give ``inf``."""
    h = np.asarray(h, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    if h.shape[1] > h.shape[2]:
        raise TooManyUsers(f"ZF needs K <= M, got K={h.shape[1]}, M={h.shape[2]}")
    active = np.flatnonzero(gamma > 0)
    if active.size == 0:
        return np.zeros(h.shape[0])
    hsub = np.swapaxes(h[:, active, :], 1, 2)  # B x M x K'
    diag = numerics.batch_gram_inverse_diag(hsub)
    return sigma2 * diag @ gamma[active]


def zf_two_user_boundary(h1, h2, pmax, sigma2, grid_size=101):
    """Static ZF Pareto curve for two users, sorted by increasing user-1 rate.

    The power split ``p1 = 0 .. Pmax`` (``p2 = Pmax - p1``) gives
    ``log2(1 + p_k |h_k|^2 (1 - rho^2) / sigma2)``; the single-user points
    ``(0, R2max)`` and ``(R1max, 0)`` bracket the curve.
    """
    h1 = np.asarray(h1, dtype=complex)
    h2 = np.asarray(h2, dtype=complex)
    if h1.ndim != 1 or h2.shape != h1.shape:
        raise DimensionMismatch("two equal-length channel vectors expected")
    if h1.shape[0] < 2:
        raise TooManyUsers("two-user ZF needs M >= 2")
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    g1 = np.vdot(h1, h1).real
    g2 = np.vdot(h2, h2).real
    rho2 = min(abs(np.vdot(h1, h2)) ** 2 / (g1 * g2), 1.0)
    p1 = np.linspace(0.0, pmax, grid_size)
    p2 = pmax - p1
    r1 = np.log2(1.0 + p1 * g1 * (1.0 - rho2) / sigma2)
    r2 = np.log2(1.0 + p2 * g2 * (1.0 - rho2) / sigma2)
    r1max = np.log2(1.0 + pmax * g1 / sigma2)
    r2max = np.log2(1.0 + pmax * g2 / sigma2)
    curve = np.column_stack([r1, r2])
    return np.vstack([[0.0, r2max], curve, [r1max, 0.0]])
