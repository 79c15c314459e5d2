"""Monte Carlo drivers and closed-form bounds.

Trial ``t`` always draws from stream ``t`` of the caller's seed and means
are accumulated with ``math.fsum`` in trial order, so results do not depend
on how trials are distributed over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import numerics
from .chanpen import Rng, complex_normal, sample_channels
from .errors import DomainError, InvalidDims
from .model import RateProfile, codebook, effective_rows
from .parallel import pmap
from .phaseopt import MaxCorrelationCost, minmax_correlation
from .region import bisect_rate


@dataclass(frozen=True, eq=False)
class McSummary:
    trials: int
    mean: float
    stderr: float
    per_trial: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("at least one trial required")


def summarize(values, keep=False) -> McSummary:
    v = np.asarray(values, dtype=float)
    n = v.size
    mean = math.fsum(v) / n
    var = math.fsum((v - mean) ** 2) / (n - 1) if n > 1 else 0.0
    return McSummary(trials=n, mean=mean, stderr=math.sqrt(var / n), per_trial=v if keep else None)


def _as_rng(rng):
    if rng is None:
        return Rng()
    if isinstance(rng, int):
        return Rng(rng)
    return rng


def _random_phases(gen, n, bits):
    if bits is None:
        return np.exp(1j * gen.uniform(0.0, 2 * np.pi, size=n))
    return codebook(2 ** bits)[gen.integers(0, 2 ** bits, size=n)]


def _lemma2_trial(t, rng, g, bits):
    gen = rng.spawn(t + 1).generator()
    n = g.shape[0]
    hk = complex_normal(gen, n)
    hm = complex_normal(gen, n)
    theta = _random_phases(gen, n, bits)
    # row vectors h^H Theta G
    a = (hk.conj() * theta) @ g
    b = (hm.conj() * theta) @ g
    return abs(np.vdot(b, a)) ** 2, np.vdot(a, a).real, np.vdot(b, b).real


def lemma2_ratio(M, N, trials=10_000, rng=None, phase_bits=None, fixed_g=True,
                 threads=1, keep=False) -> McSummary:
    """Ratio of the mean cross term to the product of mean cascaded gains.

    Estimates ``E|a_k a_m^H|^2 / (E|a_k|^2 E|a_m|^2)`` with
    ``a_k = h_{r,k}^H Theta G`` under unit-variance Rayleigh links and random
    phases (continuous when ``phase_bits`` is None).  With ``fixed_g`` the
    BS-IRS link is drawn once per call and the expectation runs over the
    user links and phases only; the ratio then lies in ``[1/M, 1]``.  The
    standard error uses the delta method on the three sample means.
    """
    if trials < 100:
        raise ValueError("trials must be at least 100")
    rng = _as_rng(rng)
    if fixed_g:
        g = complex_normal(rng.spawn(0).generator(), (N, M))
        samples = pmap(partial(_lemma2_trial, rng=rng, g=g, bits=phase_bits), range(trials), threads)
    else:
        samples = pmap(partial(_lemma2_trial_random_g, rng=rng, m=M, n=N, bits=phase_bits),
                       range(trials), threads)
    x, y, z = (np.array(s) for s in zip(*samples))
    xm, ym, zm = (math.fsum(v) / trials for v in (x, y, z))
    r = xm / (ym * zm)
    # influence values shifted so their mean is r
    pseudo = x / (ym * zm) - r * y / ym - r * z / zm + 2 * r
    s = summarize(pseudo, keep)
    return McSummary(trials=trials, mean=r, stderr=s.stderr, per_trial=s.per_trial)


def _lemma2_trial_random_g(t, rng, m, n, bits):
    gen = rng.spawn(t + 1).generator()
    g = complex_normal(gen, (n, m))
    return _lemma2_trial(t, rng.spawn(t + 1 + (1 << 40)), g, bits)


def rate_loss_bound(rho2) -> float:
    """Rate lost by a user whose channel has squared correlation ``rho2`` with another."""
    if not 0.0 <= rho2 < 1.0:
        raise DomainError(f"rho2 must lie in [0, 1), got {rho2}")
    return -math.log1p(-rho2) / math.log(2.0)


@dataclass(frozen=True, eq=False)
class Theorem1Report:
    N_values: tuple
    mean_dpc: np.ndarray
    mean_zf: np.ndarray
    stderr_dpc: np.ndarray
    stderr_zf: np.ndarray
    eta: np.ndarray
    upper_dpc: np.ndarray
    lower_zf: np.ndarray
    trials: int = 0

    def rows(self):
        return [
            {"N": n, "mean_dpc": self.mean_dpc[i], "stderr_dpc": self.stderr_dpc[i],
             "mean_zf": self.mean_zf[i], "stderr_zf": self.stderr_zf[i], "eta": self.eta[i],
             "upper_dpc": self.upper_dpc[i], "lower_zf": self.lower_zf[i]}
            for i, n in enumerate(self.N_values)
        ]


def _theorem1_trial(t, rng, m, k, n_values, pmax, sigma2, rho2_r, rho2_g, bits):
    gen = rng.spawn(t).generator()
    nmax = max(n_values)
    g = complex_normal(gen, (nmax, m), rho2_g)
    hr = complex_normal(gen, (k, nmax), np.asarray(rho2_r)[:, None])
    theta = _random_phases(gen, nmax, bits)
    p = pmax / k
    out = np.empty((2, len(n_values)))
    for i, n in enumerate(n_values):
        rows = (hr[:, :n] * theta[:n]) @ g[:n]  # K x M, rows h_k^H
        gains = np.sum(np.abs(rows) ** 2, axis=1)
        out[0, i] = np.sum(np.log2(1.0 + p * gains / sigma2))
        diag = numerics.gram_inverse_diag(rows.conj().T)
        out[1, i] = np.sum(np.log2(1.0 + p / (sigma2 * diag)))
    return out


def theorem1_sweep(M, K, N_values, Pmax, sigma2, variances=(1.0, 1.0), trials=500, rng=None,
                   phase_bits=None, threads=1) -> Theorem1Report:
    """Sum rates of DPC and ZF under random phases and equal power, with closed-form bounds.

    ``Pmax`` and ``sigma2`` are linear.  ``variances`` is ``(rho2_r, rho2_g)``
    where ``rho2_r`` may be per user.  The DPC figure is the
    interference-free equal-power sum rate; ZF uses equal power per user.
    Channels for smaller N are prefixes of the largest draw, so the N sweep
    uses common random numbers.
    """
    if M <= K:
        raise InvalidDims(f"need M > K, got M={M}, K={K}")
    rho2_r, rho2_g = variances
    rho2_r = np.broadcast_to(np.asarray(rho2_r, dtype=float), (K,))
    n_values = tuple(int(n) for n in N_values)
    rng = _as_rng(rng)
    task = partial(_theorem1_trial, rng=rng, m=M, k=K, n_values=n_values, pmax=Pmax,
                   sigma2=sigma2, rho2_r=rho2_r, rho2_g=rho2_g, bits=phase_bits)
    samples = np.stack(pmap(task, range(trials), threads))  # T x 2 x len(N)
    dpc = [summarize(samples[:, 0, i]) for i in range(len(n_values))]
    zfs = [summarize(samples[:, 1, i]) for i in range(len(n_values))]
    mean_dpc = np.array([s.mean for s in dpc])
    mean_zf = np.array([s.mean for s in zfs])
    n_arr = np.array(n_values, dtype=float)
    upper = K * np.log2(1.0 + Pmax * rho2_r.max() * rho2_g * n_arr * M / sigma2)
    lower = K * np.log2(1.0 + Pmax * rho2_r.min() * rho2_g * n_arr * (M - K) / (K * sigma2))
    return Theorem1Report(
        N_values=n_values, mean_dpc=mean_dpc, mean_zf=mean_zf,
        stderr_dpc=np.array([s.stderr for s in dpc]), stderr_zf=np.array([s.stderr for s in zfs]),
        eta=(mean_dpc - mean_zf) / mean_zf, upper_dpc=upper, lower_zf=lower, trials=trials,
    )


def _sumrate_trial(t, rng, scn, vary, values, schemes, method, eps2):
    if vary == "N":
        base = sample_channels(scn.replace(N=max(values)), rng.spawn(t))
        cases = [(scn.replace(N=v), base.subset(v)) for v in values]
    else:
        ch = sample_channels(scn, rng.spawn(t))
        cases = [(scn.replace(Pmax_dBm=v), ch) for v in values]
    alpha = RateProfile((1.0 / scn.K,) * scn.K)
    out = np.empty((len(values), len(schemes), 2))
    for i, (s, ch) in enumerate(cases):
        for j, scheme in enumerate(schemes):
            for irs, c in enumerate((ch.without_irs(), ch)):
                out[i, j, irs] = bisect_rate(s, c, alpha, scheme, method, eps2=eps2).sum_rate
    return out


def sumrate_sweep(scn, vary, values, schemes=("dpc", "zf"), method="alternating", trials=100,
                  rng=None, eps2=1e-3, threads=1):
    """Mean sum rate at the uniform rate profile versus ``Pmax`` (dBm) or ``N``.

    Returns one row per (value, scheme, with/without IRS).  Every trial
    reuses its channels across the swept values; for an N sweep smaller
    surfaces are prefixes of the largest one.
    """
    if vary not in ("N", "Pmax"):
        raise ValueError("vary must be 'N' or 'Pmax'")
    values = tuple(int(v) for v in values) if vary == "N" else tuple(float(v) for v in values)
    schemes = tuple(schemes)
    rng = _as_rng(rng)
    task = partial(_sumrate_trial, rng=rng, scn=scn, vary=vary, values=values, schemes=schemes,
                   method=method, eps2=eps2)
    samples = np.stack(pmap(task, range(trials), threads))
    rows = []
    for i, v in enumerate(values):
        for j, scheme in enumerate(schemes):
            for irs in (1, 0):
                s = summarize(samples[:, i, j, irs])
                rows.append({vary: v, "scheme": scheme, "irs": bool(irs),
                             "mean": s.mean, "stderr": s.stderr})
    return rows


def _correlation_trial(t, rng, scn, n_values, restarts):
    base = sample_channels(scn.replace(N=max(n_values)), rng.spawn(t))
    # restarts and random phases use a stream separate from the channel draw
    gen = rng.spawn(t + (1 << 40)).generator()
    q = scn.Q
    out = np.empty((2, len(n_values)))
    for i, n in enumerate(n_values):
        ch = base.subset(n)
        idx = gen.integers(0, q, size=n)
        out[0, i] = MaxCorrelationCost(ch, q)(idx)
        out[1, i] = minmax_correlation(ch, q, restarts=restarts, rng=gen).best_cost
    return out


def correlation_sweep(scn, N_values, realizations=20, restarts=4, rng=None, threads=1):
    """Squared channel correlation under random and optimized phases versus N.

    Returns rows with the mean over realizations for random phases and the
    median of the min-max optimized value.
    """
    n_values = tuple(int(n) for n in N_values)
    rng = _as_rng(rng)
    task = partial(_correlation_trial, rng=rng, scn=scn, n_values=n_values, restarts=restarts)
    samples = np.stack(pmap(task, range(realizations), threads))
    rows = []
    for i, n in enumerate(n_values):
        rand = summarize(samples[:, 0, i])
        rows.append({"N": n, "random_mean": rand.mean, "random_stderr": rand.stderr,
                     "optimized_median": float(np.median(samples[:, 1, i])),
                     "optimized_max": float(np.max(samples[:, 1, i]))})
    return rows
