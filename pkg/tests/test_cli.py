import json
import subprocess
import sys

import numpy as np
import pytest

from irsbc.chanpen import default_scenario
from irsbc.cli import DEFAULT_SEED, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# tool=irsbc"
    assert f"# seed={DEFAULT_SEED}" in lines
    assert any(line.startswith("# config_sha256=") for line in lines)
    rows = [line for line in lines if not line.startswith("#")]
    assert rows[0] == "check,passed,detail"
    assert all(",true," in r for r in rows[1:])


def test_lemma2_csv_columns(capsys):
    code, out, _ = run(capsys, "lemma2", "--trials", "200")
    assert code == 0
    rows = [line for line in out.splitlines() if not line.startswith("#")]
    assert rows[0] == "N,ratio,stderr"
    assert [r.split(",")[0] for r in rows[1:]] == ["20", "40", "60", "80", "100"]


def test_empty_scheme_list_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "region", "--schemes", "")
    assert code == 2
    assert json.loads(err.splitlines()[-1])["error"] == "UsageError"
    cfg = write_config(tmp_path, {"schemes": []})
    assert run(capsys, "region", "--config", cfg)[0] == 2


def test_config_errors_are_json(capsys, tmp_path):
    code, _, err = run(capsys, "lemma2", "--config", write_config(tmp_path, {"bogus": 1}))
    assert code == 1
    assert json.loads(err) == {"error": "ConfigError", "field": "bogus",
                               "message": "unknown key 'bogus' for command lemma2"}
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "trials": 100,\n  oops\n}')
    code, _, err = run(capsys, "lemma2", "--config", str(bad))
    doc = json.loads(err)
    assert code == 1 and doc["line"] == 3 and doc["column"] == 3
    scn = default_scenario().to_dict()
    scn["geometry"]["bogus"] = 0
    code, _, err = run(capsys, "region", "--config", write_config(tmp_path, {"scenario": scn}))
    assert json.loads(err)["field"] == "geometry.bogus"


def test_region_needs_two_users(capsys, tmp_path):
    cfg = write_config(tmp_path, {"scenario": default_scenario(K=3).to_dict()})
    code, _, err = run(capsys, "region", "--config", cfg)
    assert code == 1 and json.loads(err)["field"] == "scenario.K"


def test_json_output_and_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "theorem1", "--trials", "20", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == DEFAULT_SEED and doc["meta"]["version"] == "0.1.0"
    assert [r["N"] for r in doc["rows"]] == [16, 32, 64, 128, 256]


def test_seed_and_threads(capsys):
    a = run(capsys, "correlation", "--seed", "3", "--threads", "1")[1]
    b = run(capsys, "correlation", "--seed", "3", "--threads", "2")[1]
    c = run(capsys, "correlation", "--seed", "4")[1]
    assert a == b
    assert a != c


def _regions(capsys, tmp_path, schemes, rho_d2):
    cfg = write_config(tmp_path, {
        "scenario": default_scenario().replace(rho_d2=rho_d2).to_dict(),
        "schemes": schemes, "grid": 10})
    code, out, _ = run(capsys, "region", "--config", cfg, "--format", "json",
                       "--method", "alternating", "--seed", "0")
    assert code == 0
    return {k: np.array([p["rates"] for p in v["points"]])
            for k, v in json.loads(out)["regions"].items()}


def test_zf_without_irs_inside_tdma(capsys, tmp_path):
    r = _regions(capsys, tmp_path, ["zf-noirs", "tdma-noirs"], 0.8)
    t = r["tdma-noirs"]
    r1, r2 = t[-1, 0], t[0, 1]
    z = r["zf-noirs"]
    assert np.all(z[:, 0] / r1 + z[:, 1] / r2 <= 1 + 1e-9)


def test_irs_brings_zf_toward_dpc(capsys, tmp_path):
    r = _regions(capsys, tmp_path, ["dpc", "zf", "dpc-noirs", "zf-noirs"], 0.8)
    peak = {k: v.sum(axis=1).max() for k, v in r.items()}
    with_irs = (peak["dpc"] - peak["zf"]) / peak["dpc"]
    without = (peak["dpc-noirs"] - peak["zf-noirs"]) / peak["dpc-noirs"]
    assert with_irs < without


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "irsbc.cli", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "irsbc 0.1.0"


def test_partial_scenario_overrides_defaults(capsys, tmp_path):
    cfg = write_config(tmp_path, {"scenario": {"N": 3, "b": 1}, "schemes": ["zf"], "grid": 2})
    code, out, _ = run(capsys, "region", "--config", cfg)
    assert code == 0
    rows = [line for line in out.splitlines() if not line.startswith("#")][1:]
    assert all(len(r.split(",")[-1].split()) == 3 for r in rows)
    assert {i for r in rows for i in r.split(",")[-1].split()} <= {"0", "1"}
