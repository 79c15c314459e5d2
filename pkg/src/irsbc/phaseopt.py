"""Discrete phase-shift search over the codebook ``F^N``.

A cost is any callable mapping an integer index array of length N to a
float.  Costs that also provide ``batch(index_matrix)`` and
``candidates(indices, n)`` are evaluated vectorized; the channel-based costs
below do.  Both searches break ties toward the smallest index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import dpc, zf
from .chanpen import Rng
from .errors import BudgetExceeded
from .model import PhaseConfig, codebook, effective_rows

DEFAULT_BUDGET = 2 ** 20
_CHUNK = 2 ** 14


@dataclass(frozen=True)
class PhaseSearchReport:
    best: PhaseConfig
    best_cost: float
    evaluations: int
    iterations: int = 0
    converged: bool = True
    trace: tuple = field(default=(), repr=False)


class ChannelCost:
    """Cost of the effective channels ``h_k(Theta)`` of one channel set.

    Subclasses implement :meth:`of_channels` on (B, K, M) stacks of column
    channels.
    """

    def __init__(self, ch, q):
        self.ch = ch
        self.q = q
        self._book = codebook(q)

    def of_channels(self, h):
        raise NotImplementedError

    def _rows(self, idx):
        return effective_rows(self.ch, self._book[idx])

    def batch(self, idx):
        idx = np.atleast_2d(np.asarray(idx, dtype=np.int64))
        return self.of_channels(np.conj(self._rows(idx)))

    def __call__(self, idx):
        return float(self.batch(np.asarray(idx, dtype=np.int64)[None, :])[0])

    def candidates(self, idx, n):
        """Costs of all Q choices for subsurface ``n`` with the rest fixed."""
        idx = np.asarray(idx, dtype=np.int64)
        rows = self._rows(idx)
        ch = self.ch
        gn = ch.G[n]
        base = rows - np.outer(ch.hr[:, n] * self._book[idx[n]], gn)
        stack = base[None] + (ch.hr[:, n][None, :, None] * self._book[:, None, None]) * gn
        return self.of_channels(np.conj(stack))


class DpcPowerCost(ChannelCost):
    """Minimum DPC transmit power for fixed SINR targets."""

    def __init__(self, ch, q, gamma, sigma2):
        super().__init__(ch, q)
        self.gamma = np.asarray(gamma, dtype=float)
        self.sigma2 = sigma2

    def of_channels(self, h):
        return dpc.dpc_min_power_batch(h, self.gamma, self.sigma2)


class ZfPowerCost(ChannelCost):
    """Minimum ZF transmit power for fixed SINR targets (``inf`` if rank deficient)."""

    def __init__(self, ch, q, gamma, sigma2):
        super().__init__(ch, q)
        self.gamma = np.asarray(gamma, dtype=float)
        self.sigma2 = sigma2

    def of_channels(self, h):
        return zf.zf_min_power_batch(h, self.gamma, self.sigma2)


class MaxCorrelationCost(ChannelCost):
    """Largest squared pairwise correlation; a zero channel counts as fully correlated."""

    def of_channels(self, h):
        k = h.shape[1]
        norms2 = np.sum(np.abs(h) ** 2, axis=2)
        worst = np.zeros(h.shape[0])
        for a, b in itertools.combinations(range(k), 2):
            num = np.abs(np.einsum("bm,bm->b", h[:, a].conj(), h[:, b])) ** 2
            den = norms2[:, a] * norms2[:, b]
            with np.errstate(divide="ignore", invalid="ignore"):
                r2 = np.where(den > 1e-60, num / np.where(den > 0, den, 1.0), 1.0)
            worst = np.maximum(worst, np.minimum(r2, 1.0))
        return worst


class ChannelGainCost(ChannelCost):
    """Negative channel gain ``-|h_k|^2`` of one user (minimizing maximizes the gain)."""

    def __init__(self, ch, q, user):
        super().__init__(ch, q)
        self.user = user

    def of_channels(self, h):
        return -np.sum(np.abs(h[:, self.user]) ** 2, axis=1)


def _digits(start, stop, n, q):
    """Index sequences for codes ``start..stop-1``, most significant digit first."""
    codes = np.arange(start, stop, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = codes % q
        codes //= q
    return out


def exhaustive_search(cost, N, Q, budget=DEFAULT_BUDGET) -> PhaseSearchReport:
    """Global minimizer over all ``Q**N`` configurations (lexicographic tie-break)."""
    total = Q ** N
    if total > budget:
        raise BudgetExceeded(f"{Q}^{N} = {total} configurations exceed budget {budget}")
    batch = getattr(cost, "batch", None)
    best_code, best_val = 0, np.inf
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        idx = _digits(start, stop, N, Q)
        if batch is not None:
            vals = np.asarray(batch(idx), dtype=float)
        else:
            vals = np.array([cost(row) for row in idx], dtype=float)
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_code = float(vals[j]), start + j
    best = _digits(best_code, best_code + 1, N, Q)[0]
    return PhaseSearchReport(best=PhaseConfig(tuple(best), Q), best_cost=best_val,
                             evaluations=total)


def _candidate_costs(cost, idx, n, q):
    cand = getattr(cost, "candidates", None)
    if cand is not None:
        return np.asarray(cand(idx, n), dtype=float)
    vals = np.empty(q)
    trial = idx.copy()
    for v in range(q):
        trial[n] = v
        vals[v] = cost(trial)
    return vals


def _fractional_drop(prev, cur):
    if prev == cur:
        return 0.0
    if not np.isfinite(prev):
        return np.inf
    if prev == 0:
        return 0.0
    return (prev - cur) / abs(prev)


def alternating_search(cost, N, Q, init=None, eps1=1e-4, max_sweeps=50) -> PhaseSearchReport:
    """Element-wise coordinate descent over the codebook.

    Each sweep visits n = 0..N-1 and sets ``theta_n`` to the best codebook
    entry with the others fixed.  Stops once a sweep lowers the cost by a
    fraction below ``eps1`` or after ``max_sweeps`` sweeps.
    """
    if not eps1 > 0:
        raise ValueError("eps1 must be positive")
    idx = np.zeros(N, dtype=np.int64) if init is None else np.array(
        getattr(init, "indices", init), dtype=np.int64)
    if idx.shape != (N,):
        raise ValueError(f"initial config must have {N} entries")
    cur = float(cost(idx))
    evaluations = 1
    trace = [cur]
    converged = False
    sweeps = 0
    while sweeps < max_sweeps:
        prev = cur
        for n in range(N):
            vals = _candidate_costs(cost, idx, n, Q)
            evaluations += Q
            j = int(np.argmin(vals))
            if vals[j] <= vals[idx[n]]:
                idx[n] = j
            cur = float(vals[idx[n]])
        sweeps += 1
        # candidate values can differ from a scalar evaluation by rounding only
        cur = min(cur, prev)
        trace.append(cur)
        if _fractional_drop(prev, cur) < eps1:
            converged = True
            break
    best = PhaseConfig(tuple(idx), Q)
    best_cost = float(cost(idx))
    evaluations += 1
    return PhaseSearchReport(best=best, best_cost=best_cost, evaluations=evaluations,
                             iterations=sweeps, converged=converged, trace=tuple(trace))


def _as_generator(rng):
    if rng is None:
        return Rng().generator()
    if isinstance(rng, Rng):
        return rng.generator()
    return rng


def minmax_correlation(ch, Q, restarts=4, rng=None, eps1=1e-4, max_sweeps=50) -> PhaseSearchReport:
    """Minimize the largest squared pairwise correlation over phase configs.

    Runs :func:`alternating_search` from the all-zeros config and from
    ``restarts`` random configs; returns the best run (earliest on ties).
    """
    if ch.K < 2:
        raise ValueError("correlation needs at least two users")
    gen = _as_generator(rng)
    cost = MaxCorrelationCost(ch, Q)
    inits = [np.zeros(ch.N, dtype=np.int64)]
    inits += [gen.integers(0, Q, size=ch.N) for _ in range(restarts)]
    best = None
    evaluations = 0
    for init in inits:
        rep = alternating_search(cost, ch.N, Q, init=init, eps1=eps1, max_sweeps=max_sweeps)
        evaluations += rep.evaluations
        if best is None or rep.best_cost < best.best_cost:
            best = rep
    return PhaseSearchReport(best=best.best, best_cost=best.best_cost, evaluations=evaluations,
                             iterations=best.iterations, converged=best.converged,
                             trace=best.trace)
