import csv
import json
import subprocess
import sys

import pytest
import yaml

from crusader.cli import CSV_COLUMNS, EXIT_AUDIT, EXIT_CONFIG, EXIT_OK, expand_grid, main


def write(tmp_path, d, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(d))
    return str(p)


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


def test_run_ca2_common_input(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA2", "n": 8, "t": 2, "eps": 1, "ell": 64})
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--quiet"]) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == ["ca2-seed0.counters.json", "ca2-seed0.report.json", "ca2-seed0.trace.jsonl"]
    report = json.loads((out / "ca2-seed0.report.json").read_text())
    assert report["ok"]


def test_run_rejects_threshold(tmp_path, capsys):
    cfg = write(tmp_path, {"protocol": "CA2", "n": 9, "t": 3, "eps": 1, "ell": 64})
    assert main(["run", "--config", cfg, "--out-dir", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "t <= n/(3+eps)" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_run_malformed_config(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("protocol: CA2\nn: [8\n")
    assert main(["run", "--config", str(p), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "line" in capsys.readouterr().err
    cfg = write(tmp_path, {"protocol": "CA2", "n": 8, "t": 2, "eps": 1, "ell": 64, "colour": 1}, "u.yaml")
    assert main(["run", "--config", cfg, "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "colour" in capsys.readouterr().err


def test_run_ext_hundred_seeds(tmp_path):
    cfg = write(tmp_path, {"protocol": "EXT", "n": 4, "t": 1, "ell": 16, "seeds": 100,
                           "strategy": "random-fair", "inputs": {"family": "split"}})
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--quiet"]) == EXIT_OK
    assert len(list(out.glob("*.trace.jsonl"))) == 100
    r = rows(out / "runs.csv")
    assert len(r) == 100 and sorted(int(x["seed"]) for x in r) == list(range(100))
    assert all(x["audit_ok"] == "True" for x in r)


def test_flag_overrides(tmp_path):
    cfg = write(tmp_path, {"protocol": "EXT", "n": 4, "t": 1, "ell": 16, "seeds": 10})
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--quiet", "--seed", "7",
                 "--ba-backend", "coin", "--fairness-K", "50"]) == EXIT_OK
    assert [p.name for p in out.glob("*.trace.jsonl")] == ["ext-seed7.trace.jsonl"]
    first = json.loads((out / "ext-seed7.trace.jsonl").read_text().splitlines()[0])
    assert "coin" in json.dumps(first) and "50" in json.dumps(first)


def test_sweep_grid(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA1", "t": "auto", "seeds": 2,
                           "grid": {"ell": [256, 1024, 4096], "n": [7, 10, 13]}})
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out), "--quiet", "--jobs", "2"]) == EXIT_OK
    r = rows(out / "sweep.csv")
    assert len(r) == 9 * 2
    assert list(r[0]) == CSV_COLUMNS
    bits = {(int(x["n"]), int(x["ell"])): int(x["honest_bits"]) for x in r if x["seed"] == "0"}
    for n in (7, 10, 13):
        assert bits[n, 256] < bits[n, 1024] < bits[n, 4096]
    for ell in (256, 1024, 4096):
        assert bits[7, ell] < bits[10, ell] < bits[13, ell]
    assert {int(x["t"]) for x in r if x["n"] == "13"} == {4}


def test_sweep_empty_grid(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA1", "n": 7, "t": 2, "ell": 64, "grid": {"n": []}})
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out), "--quiet"]) == EXIT_OK
    assert (out / "sweep.csv").read_text().strip() == ",".join(CSV_COLUMNS)


def test_sweep_records_bad_points(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA1", "t": 2, "ell": 64, "grid": {"n": [6, 7]}})
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out-dir", str(out), "--quiet"]) == EXIT_AUDIT
    r = rows(out / "sweep.csv")
    assert len(r) == 2
    assert r[0]["error"].startswith("config:") and r[1]["error"] == "" and r[1]["audit_ok"] == "True"


def test_expand_grid_auto_t():
    pts = expand_grid({"protocol": "CA2", "eps": "1/2", "ell": 8, "grid": {"n": [8, 14]}})
    assert [(p["n"], p["t"]) for p in pts] == [(8, 2), (14, 4)]
    assert expand_grid({"protocol": "CA1", "n": 7, "t": 2, "ell": 8}) == [
        {"protocol": "CA1", "n": 7, "t": 2, "ell": 8}]


def test_audit_verb(tmp_path, capsys):
    cfg = write(tmp_path, {"protocol": "SRA", "n": 4, "t": 1, "ell": 64})
    out = tmp_path / "out"
    main(["run", "--config", cfg, "--out-dir", str(out), "--quiet"])
    trace = out / "sra-seed0.trace.jsonl"
    assert main(["audit", str(trace)]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("PASS")
    assert main(["audit", str(trace), "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["ok"]
    # tamper: give party 1 a second output
    lines = trace.read_text().splitlines()
    extra = next(l for l in lines if '"output"' in l)
    trace.write_text("\n".join(lines + [extra]) + "\n")
    assert main(["audit", str(trace)]) == EXIT_AUDIT
    assert main(["audit", str(tmp_path / "missing.jsonl")]) == EXIT_CONFIG


def test_strict_turns_warnings_into_failures(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA1", "n": 7, "t": 2, "ell": 64, "event_cap": 10})
    out = tmp_path / "out"
    # a capped run cannot refute liveness, so only a warning is left
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--quiet"]) == EXIT_OK
    assert main(["run", "--config", cfg, "--out-dir", str(out), "--quiet", "--strict"]) == EXIT_AUDIT


def test_lemma_verb(capsys):
    assert main(["lemma", "--max-vertices", "4", "--samples", "50"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "violations=0" in out and "sampled" in out


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, {"protocol": "CA2", "n": 8, "t": 2, "eps": 1, "ell": 64})
    res = subprocess.run([sys.executable, "-m", "crusader", "run", "--config", cfg,
                          "--out-dir", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and "seed 0: PASS" in res.stdout


def test_shipped_configs_are_valid():
    from pathlib import Path

    from crusader.scenario import Scenario, load_config

    root = Path(__file__).parent.parent / "configs"
    files = sorted(root.glob("*.yaml"))
    assert files
    for f in files:
        for point in expand_grid(load_config(f)):
            Scenario.from_dict(point)
