"""Problem-instance data model.

Channel convention: ``ChannelSet`` stores *row* vectors, i.e. ``hd[k]`` is
``h_{d,k}^H`` (length M) and ``hr[k]`` is ``h_{r,k}^H`` (length N), so the
effective row channel is ``hd[k] + hr[k] @ diag(theta) @ G``.  Solvers work
with the column channel ``h_k`` (the conjugate of that row), which is what
:func:`effective_channels` returns.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError, DimensionMismatch, IndexOutOfRange, ZeroChannel


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt):
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class GeometrySpec:
    bs_pos: tuple
    irs_pos: tuple
    user_positions: tuple
    alpha_bs_irs: float = 2.2
    alpha_irs_user: float = 2.2
    alpha_bs_user: float = 3.4
    pl_ref_db: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "bs_pos", tuple(float(x) for x in self.bs_pos))
        object.__setattr__(self, "irs_pos", tuple(float(x) for x in self.irs_pos))
        object.__setattr__(
            self, "user_positions",
            tuple(tuple(float(x) for x in p) for p in self.user_positions),
        )
        for name in ("bs_pos", "irs_pos"):
            if len(getattr(self, name)) != 3:
                raise ConfigError(f"{name} must have 3 coordinates", field=f"geometry.{name}")
        for i, p in enumerate(self.user_positions):
            if len(p) != 3:
                raise ConfigError("user position must have 3 coordinates",
                                  field=f"geometry.user_positions[{i}]")
        coords = [*self.bs_pos, *self.irs_pos, *(c for p in self.user_positions for c in p)]
        if not all(math.isfinite(c) for c in coords):
            raise ConfigError("positions must be finite", field="geometry")
        for name in ("alpha_bs_irs", "alpha_irs_user", "alpha_bs_user"):
            if not getattr(self, name) > 0:
                raise ConfigError("path-loss exponent must be positive", field=f"geometry.{name}")


@dataclass(frozen=True)
class IidSpec:
    """Variances for the i.i.d. Rayleigh mode (direct links absent)."""

    rho2_r: tuple
    rho2_g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho2_r", tuple(float(x) for x in self.rho2_r))
        if not all(v > 0 for v in self.rho2_r) or not self.rho2_g > 0:
            raise ConfigError("iid variances must be positive", field="iid")


@dataclass(frozen=True)
class Scenario:
    """Static problem parameters. Powers are kept in dBm; ``Pmax``/``sigma2`` give watts."""

    M: int
    K: int
    N: int
    Nbar: int = 1
    b: int = 2
    Pmax_dBm: float = 20.0
    sigma2_dBm: float = -80.0
    channel_mode: str = "geometric"
    geometry: GeometrySpec | None = None
    iid: IidSpec | None = None
    rho_d2: float | None = None

    def __post_init__(self):
        for name in ("M", "K", "N", "Nbar", "b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer", field=name)
        for name in ("Pmax_dBm", "sigma2_dBm"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", field=name)
        if self.channel_mode == "geometric":
            if self.geometry is None or self.iid is not None:
                raise ConfigError("geometric mode needs geometry and no iid block",
                                  field="geometry")
            if len(self.geometry.user_positions) != self.K:
                raise ConfigError(f"expected {self.K} user positions",
                                  field="geometry.user_positions")
        elif self.channel_mode == "iid":
            if self.iid is None or self.geometry is not None:
                raise ConfigError("iid mode needs an iid block and no geometry", field="iid")
            if len(self.iid.rho2_r) != self.K:
                raise ConfigError(f"expected {self.K} rho2_r entries", field="iid.rho2_r")
        else:
            raise ConfigError(f"unknown channel_mode {self.channel_mode!r}", field="channel_mode")
        if self.rho_d2 is not None:
            if self.K != 2 or not 0.0 <= self.rho_d2 <= 1.0:
                raise ConfigError("rho_d2 needs K = 2 and a value in [0, 1]", field="rho_d2")
            if self.channel_mode != "geometric":
                raise ConfigError("rho_d2 needs direct links (geometric mode)", field="rho_d2")

    @property
    def Q(self):
        return 2 ** self.b

    @property
    def NR(self):
        return self.N * self.Nbar

    @property
    def Pmax(self):
        return dbm_to_watt(self.Pmax_dBm)

    @property
    def sigma2(self):
        return dbm_to_watt(self.sigma2_dBm)

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        out = {
            "M": self.M, "K": self.K, "N": self.N, "Nbar": self.Nbar, "b": self.b,
            "Pmax_dBm": self.Pmax_dBm, "sigma2_dBm": self.sigma2_dBm,
            "channel_mode": self.channel_mode,
        }
        if self.geometry is not None:
            g = asdict(self.geometry)
            g["bs_pos"] = list(g["bs_pos"])
            g["irs_pos"] = list(g["irs_pos"])
            g["user_positions"] = [list(p) for p in g["user_positions"]]
            out["geometry"] = g
        if self.iid is not None:
            out["iid"] = {"rho2_r": list(self.iid.rho2_r), "rho2_g": self.iid.rho2_g}
        if self.rho_d2 is not None:
            out["rho_d2"] = self.rho_d2
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("scenario must be a JSON object")
        known = {"M", "K", "N", "Nbar", "b", "Pmax_dBm", "sigma2_dBm",
                 "channel_mode", "geometry", "iid", "rho_d2"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"unknown key {key!r}", field=key)
        for key in ("M", "K", "N"):
            if key not in doc:
                raise ConfigError(f"missing required key {key!r}", field=key)
        kw = {k: doc[k] for k in known - {"geometry", "iid"} if k in doc}
        for key in ("Pmax_dBm", "sigma2_dBm", "rho_d2"):
            if key in kw and kw[key] is not None and not isinstance(kw[key], (int, float)):
                raise ConfigError(f"{key} must be a number", field=key)
            if key in kw and kw[key] is not None:
                kw[key] = float(kw[key])
        geo = doc.get("geometry")
        if geo is not None:
            if not isinstance(geo, dict):
                raise ConfigError("geometry must be an object", field="geometry")
            allowed = {f.name for f in GeometrySpec.__dataclass_fields__.values()}
            for key in geo:
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r}", field=f"geometry.{key}")
            for key in ("bs_pos", "irs_pos", "user_positions"):
                if key not in geo:
                    raise ConfigError(f"missing required key {key!r}", field=f"geometry.{key}")
            try:
                kw["geometry"] = GeometrySpec(**geo)
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(str(exc), field="geometry") from None
        iid = doc.get("iid")
        if iid is not None:
            if not isinstance(iid, dict) or "rho2_r" not in iid:
                raise ConfigError("iid block needs rho2_r", field="iid.rho2_r")
            try:
                kw["iid"] = IidSpec(rho2_r=iid["rho2_r"], rho2_g=iid.get("rho2_g", 1.0))
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(str(exc), field="iid") from None
        return cls(**kw)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno,
                              column=exc.colno) from None
        return cls.from_dict(doc)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return Scenario.from_json(fh.read())


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One channel realization: ``G`` (N x M), ``hd`` rows (K x M), ``hr`` rows (K x N)."""

    G: np.ndarray
    hd: np.ndarray
    hr: np.ndarray

    def __post_init__(self):
        g = np.array(self.G, dtype=complex)
        hd = np.array(self.hd, dtype=complex)
        hr = np.array(self.hr, dtype=complex)
        if g.ndim != 2 or hd.ndim != 2 or hr.ndim != 2:
            raise DimensionMismatch("G, hd, hr must be 2-D arrays")
        n, m = g.shape
        if hd.shape[1] != m or hr.shape[1] != n or hd.shape[0] != hr.shape[0]:
            raise DimensionMismatch(
                f"inconsistent shapes G{g.shape} hd{hd.shape} hr{hr.shape}")
        for a in (g, hd, hr):
            if not np.all(np.isfinite(a)):
                raise ValueError("channel entries must be finite")
            a.flags.writeable = False
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "hd", hd)
        object.__setattr__(self, "hr", hr)

    @property
    def M(self):
        return self.G.shape[1]

    @property
    def N(self):
        return self.G.shape[0]

    @property
    def K(self):
        return self.hd.shape[0]

    @property
    def has_irs(self):
        return bool(np.any(self.hr != 0))

    def without_irs(self):
        return ChannelSet(self.G, self.hd, np.zeros_like(self.hr))

    def subset(self, n):
        """Channel set restricted to the first ``n`` subsurfaces."""
        return ChannelSet(self.G[:n], self.hd, self.hr[:, :n])

    def check(self, scn):
        if (self.M, self.K, self.N) != (scn.M, scn.K, scn.N):
            raise DimensionMismatch(
                f"channel (M,K,N)={self.M, self.K, self.N} vs scenario "
                f"{scn.M, scn.K, scn.N}")


@dataclass(frozen=True)
class PhaseConfig:
    """Discrete phase indices, one per subsurface, into the ``Q``-level codebook."""

    indices: tuple
    Q: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0:
            raise ValueError("need at least one subsurface")
        if any(i < 0 or i >= self.Q for i in idx):
            raise IndexOutOfRange(f"phase index outside [0, {self.Q})")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def zeros(cls, n, q):
        return cls((0,) * n, q)

    @property
    def N(self):
        return len(self.indices)

    @property
    def array(self):
        return np.asarray(self.indices, dtype=np.int64)

    def values(self):
        return codebook(self.Q)[self.array]

    def phase_value(self, n):
        if not 0 <= n < len(self.indices):
            raise IndexOutOfRange(f"subsurface {n} out of range")
        return complex(np.exp(2j * np.pi * self.indices[n] / self.Q))


def codebook(q):
    """Unit-modulus levels ``exp(j 2 pi q / Q)``, q = 0..Q-1."""
    return np.exp(2j * np.pi * np.arange(q) / q)


def phase_value(cfg, n):
    return cfg.phase_value(n)


@dataclass(frozen=True)
class RateProfile:
    """Point of the probability simplex fixing each user's share of the sum rate."""

    alpha: tuple = field()

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
            raise ValueError("rate profile must be a non-empty finite vector")
        if np.any(a < 0) or np.any(a > 1):
            raise ValueError("rate profile entries must lie in [0, 1]")
        total = float(math.fsum(a))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"rate profile sums to {total}, not 1")
        if total != 1.0:
            a = a / total
        object.__setattr__(self, "alpha", tuple(float(x) for x in a))

    @property
    def K(self):
        return len(self.alpha)

    @property
    def array(self):
        return np.asarray(self.alpha)


def effective_rows(ch, theta):
    """Row channels ``h_k^H`` for phase vectors ``theta`` of shape (..., N)."""
    theta = np.asarray(theta)
    return ch.hd + np.einsum("kn,...n,nm->...km", ch.hr, theta, ch.G)


def effective_channels(ch, cfg):
    """Column channels ``h_k(Theta)`` as a (K, M) array."""
    if cfg.N != ch.N:
        raise DimensionMismatch(f"phase config has {cfg.N} entries, channel has {ch.N}")
    return np.conj(effective_rows(ch, cfg.values()))


def correlation_between(hk, hm):
    nk = np.linalg.norm(hk)
    nm = np.linalg.norm(hm)
    if nk < 1e-30 or nm < 1e-30:
        raise ZeroChannel("correlation undefined for a zero channel")
    return float(min(abs(np.vdot(hk, hm)) / (nk * nm), 1.0))


def correlation(ch, cfg, k, m):
    if k == m:
        raise ValueError("correlation needs two distinct users")
    h = effective_channels(ch, cfg)
    return correlation_between(h[k], h[m])
