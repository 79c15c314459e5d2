"""Shared driver: run one CLI command per preset config and write CSV files."""

import argparse
import json
import pathlib
import sys
import tempfile
import time

from irsbc.cli import DEFAULT_SEED, main


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", default="results", type=pathlib.Path)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--quick", action="store_true", help="small trial counts for a smoke run")
    return p


def run_all(args, jobs):
    """``jobs`` maps output stem to (command, config dict, extra argv)."""
    args.out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        for stem, (command, config, extra) in jobs.items():
            cfg = pathlib.Path(tmp) / f"{stem}.json"
            cfg.write_text(json.dumps(config))
            out = args.out_dir / f"{stem}.csv"
            start = time.perf_counter()
            code = main([command, "--config", str(cfg), "--seed", str(args.seed),
                         "--threads", str(args.threads), "--out", str(out), *extra])
            print(f"{stem}: exit {code}, {time.perf_counter() - start:.1f} s -> {out}")
            if code != 0:
                sys.exit(code)
