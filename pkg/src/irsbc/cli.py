"""``irsbc`` command-line front end.

A config file is a JSON object with an optional ``scenario`` block and
command-specific keys; anything not given falls back to the command's
defaults.  Outputs embed the tool version, a hash of the resolved config
and the seed, and are byte-identical for identical config and seed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys

import numpy as np

from . import __version__
from .chanpen import RNG_VERSION, Rng, default_iid_scenario, default_scenario, sample_channels
from .errors import ConfigError, IrsbcError
from .experiments import correlation_sweep, lemma2_ratio, sumrate_sweep, theorem1_sweep
from .model import PhaseConfig, Scenario, dbm_to_watt, effective_channels
from .phaseopt import DEFAULT_BUDGET, minmax_correlation
from .region import (boundary_from_rates, convexity_gap, region_to_dict, region_to_rows,
                     sweep_boundary, tdma_boundary)
from .validate import run_checks
from .zf import zf_two_user_boundary

DEFAULT_SEED = 20240229
REGION_SCHEMES = ("dpc", "dpc-inner", "zf", "zf-static", "tdma")

COMMANDS = {
    "region": {"schemes": list(REGION_SCHEMES), "grid": 20, "eps2": 1e-3, "restarts": 4,
               "method": None},
    "sweep": {"vary": "N", "values": [4, 8, 16, 32], "schemes": ["dpc", "zf"], "trials": 100,
              "eps2": 1e-3, "method": "alternating"},
    "lemma2": {"M": 4, "N_values": [20, 40, 60, 80, 100], "trials": 10_000, "phase_bits": None,
               "fixed_g": True},
    "theorem1": {"M": 8, "K": 4, "N_values": [16, 32, 64, 128, 256], "Pmax_dBm": 10.0,
                 "sigma2_dBm": 0.0, "rho2_r": 1.0, "rho2_g": 1.0, "trials": 500,
                 "phase_bits": None},
    "correlation": {"N_values": [8, 16, 32, 48, 64], "realizations": 20, "restarts": 4},
    "validate": {},
}
SCENARIO_COMMANDS = {"region": lambda: default_scenario(K=2, N=8),
                     "sweep": lambda: default_scenario(K=4, N=8),
                     "correlation": default_iid_scenario}


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def load_config(command, path):
    doc = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", field="config") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno,
                              column=exc.colno) from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    params = dict(COMMANDS[command])
    for key, value in doc.items():
        if key in ("scenario", "seed"):
            continue
        if key not in params:
            raise ConfigError(f"unknown key {key!r} for command {command}", field=key)
        params[key] = value
    scenario = None
    if command in SCENARIO_COMMANDS:
        scenario = SCENARIO_COMMANDS[command]()
        if "scenario" in doc:
            block = doc["scenario"]
            if not isinstance(block, dict):
                raise ConfigError("scenario must be a JSON object", field="scenario")
            # top-level keys override the command's default scenario
            scenario = Scenario.from_dict({**scenario.to_dict(), **block})
    elif "scenario" in doc:
        raise ConfigError(f"command {command} takes no scenario", field="scenario")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed must be a non-negative integer", field="seed")
    return scenario, params, seed


def _meta(command, scenario, params, seed):
    resolved = {"command": command, "params": params, "seed": seed,
                "scenario": scenario.to_dict() if scenario is not None else None}
    digest = hashlib.sha256(json.dumps(_jsonable(resolved), sort_keys=True).encode()).hexdigest()
    return {"tool": "irsbc", "version": __version__, "rng_version": RNG_VERSION,
            "command": command, "config_sha256": digest, "seed": seed}


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return x


def render_csv(meta, header, rows):
    buf = io.StringIO()
    for key in ("tool", "version", "rng_version", "command", "config_sha256", "seed"):
        buf.write(f"# {key}={meta[key]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(meta, body):
    doc = {"meta": meta, **body}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _table(rows, columns):
    return columns, [[r[c] for c in columns] for r in rows]


def _auto_method(scn, method):
    if method is not None:
        return method
    return "exhaustive" if scn.Q ** scn.N <= DEFAULT_BUDGET else "alternating"


def _region_one(scheme, scn, ch, params, method, threads, rng):
    base = scheme
    if scheme.endswith("-noirs"):
        base = scheme[: -len("-noirs")]
        ch = ch.without_irs()
    if base not in REGION_SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}")
    grid, eps2 = int(params["grid"]), float(params["eps2"])
    if base in ("dpc", "zf"):
        b = sweep_boundary(scn, ch, base, method, grid=grid, eps2=eps2, threads=threads)
    elif base == "dpc-inner":
        b = sweep_boundary(scn, ch, "dpc", "alternating", grid=grid, eps2=eps2, threads=threads)
    elif base == "tdma":
        b = tdma_boundary(scn, ch, method, grid=grid)
    else:
        # power-split curve for the phases minimizing the users' correlation
        if ch.has_irs:
            cfg = minmax_correlation(ch, scn.Q, restarts=int(params["restarts"]), rng=rng).best
        else:
            cfg = PhaseConfig.zeros(ch.N, scn.Q)
        h = effective_channels(ch, cfg)
        rates = zf_two_user_boundary(h[0], h[1], scn.Pmax, scn.sigma2, grid_size=grid + 1)
        b = boundary_from_rates(rates, "zf", "power-split", cfg)
    return b


def cmd_region(scn, params, seed, method, threads):
    if scn.K != 2:
        raise ConfigError("region needs a two-user scenario", field="scenario.K")
    schemes = params["schemes"]
    if not isinstance(schemes, list) or not schemes:
        raise UsageError("at least one scheme is required")
    ch = sample_channels(scn, Rng(seed, 0))
    method = _auto_method(scn, method)
    header, rows, regions = None, [], {}
    for i, scheme in enumerate(schemes):
        b = _region_one(scheme, scn, ch, params, method, threads, Rng(seed, 1 + i))
        h, r = region_to_rows(b)
        header = ["label"] + h
        rows += [[scheme] + row for row in r]
        d = region_to_dict(b)
        d["convexity_gap"] = convexity_gap(b)
        regions[scheme] = d
    return header, rows, {"regions": regions}


def cmd_sweep(scn, params, seed, method, threads):
    schemes = params["schemes"]
    if not isinstance(schemes, list) or not schemes:
        raise UsageError("at least one scheme is required")
    rows = sumrate_sweep(scn, params["vary"], params["values"], schemes,
                         method or params["method"], int(params["trials"]), Rng(seed),
                         eps2=float(params["eps2"]), threads=threads)
    header, table = _table(rows, [params["vary"], "scheme", "irs", "mean", "stderr"])
    return header, table, {"rows": rows}


def cmd_lemma2(params, seed, threads):
    rows = []
    for n in params["N_values"]:
        s = lemma2_ratio(int(params["M"]), int(n), int(params["trials"]), Rng(seed, int(n) << 32),
                         phase_bits=params["phase_bits"], fixed_g=bool(params["fixed_g"]),
                         threads=threads)
        rows.append({"N": int(n), "ratio": s.mean, "stderr": s.stderr})
    header, table = _table(rows, ["N", "ratio", "stderr"])
    return header, table, {"rows": rows}


def cmd_theorem1(params, seed, threads):
    p = params
    rep = theorem1_sweep(int(p["M"]), int(p["K"]), p["N_values"], dbm_to_watt(p["Pmax_dBm"]),
                         dbm_to_watt(p["sigma2_dBm"]), (p["rho2_r"], p["rho2_g"]),
                         int(p["trials"]), Rng(seed), phase_bits=p["phase_bits"],
                         threads=threads)
    rows = rep.rows()
    header, table = _table(rows, ["N", "mean_dpc", "stderr_dpc", "mean_zf", "stderr_zf", "eta",
                                  "upper_dpc", "lower_zf"])
    return header, table, {"rows": rows}


def cmd_correlation(scn, params, seed, threads):
    rows = correlation_sweep(scn, params["N_values"], int(params["realizations"]),
                             int(params["restarts"]), Rng(seed), threads=threads)
    header, table = _table(rows, ["N", "random_mean", "random_stderr", "optimized_median",
                                  "optimized_max"])
    return header, table, {"rows": rows}


def cmd_validate(seed):
    results = run_checks(seed)
    rows = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    header, table = _table(rows, ["check", "passed", "detail"])
    return header, table, {"rows": rows}, all(r.passed for r in results)


def build_parser():
    parser = argparse.ArgumentParser(prog="irsbc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"irsbc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--method", choices=("exhaustive", "alternating"))
        p.add_argument("--grid", type=int, help="rate-profile grid size S")
        p.add_argument("--trials", type=int)
        p.add_argument("--threads", type=int, default=1, help="worker processes, 0 = all cores")
        if name in ("region", "sweep"):
            p.add_argument("--schemes", help="comma-separated scheme list")
    return parser


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run(args):
    scn, params, cfg_seed = load_config(args.command, args.config)
    seed = args.seed if args.seed is not None else (cfg_seed if cfg_seed is not None else DEFAULT_SEED)
    if seed < 0:
        raise UsageError("seed must be non-negative")
    if args.grid is not None:
        if "grid" not in params:
            raise UsageError(f"--grid does not apply to {args.command}")
        params["grid"] = args.grid
    if args.trials is not None:
        if "trials" not in params:
            raise UsageError(f"--trials does not apply to {args.command}")
        params["trials"] = args.trials
    if getattr(args, "schemes", None) is not None:
        params["schemes"] = [s for s in args.schemes.split(",") if s]
    if args.method is not None and "method" in params:
        params["method"] = args.method
    method = params.get("method")
    threads = args.threads
    ok = True
    if args.command == "region":
        header, rows, body = cmd_region(scn, params, seed, method, threads)
    elif args.command == "sweep":
        header, rows, body = cmd_sweep(scn, params, seed, method, threads)
    elif args.command == "lemma2":
        header, rows, body = cmd_lemma2(params, seed, threads)
    elif args.command == "theorem1":
        header, rows, body = cmd_theorem1(params, seed, threads)
    elif args.command == "correlation":
        header, rows, body = cmd_correlation(scn, params, seed, threads)
    else:
        header, rows, body, ok = cmd_validate(seed)
    meta = _meta(args.command, scn, params, seed)
    text = render_csv(meta, header, rows) if args.format == "csv" else render_json(meta, body)
    _emit(text, args.out)
    return 0 if ok else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"error": "UsageError", "message": str(exc)}) + "\n")
        return 2
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return 1
    except (IrsbcError, ValueError, TypeError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                                    sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
