"""Stored traces, one scenario per protocol, compared byte for byte.

Set CRUSADER_REGEN_GOLDEN=1 to rewrite them after an intended behaviour change.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from crusader.scenario import Scenario, load_config

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = sorted(GOLDEN.glob("*.yaml"))
REGEN = os.environ.get("CRUSADER_REGEN_GOLDEN") == "1"


def test_one_per_protocol():
    protos = {load_config(p)["protocol"] for p in CONFIGS}
    assert protos == {"REC", "SRA", "PRA", "KCA", "CA1", "CA2", "EXT"}


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_golden_trace(cfg):
    sc = Scenario.from_dict(load_config(cfg))
    trace, report = sc.run(sc.seeds[0])
    assert report.ok
    text = trace.to_jsonl()
    stored = cfg.with_suffix(".trace.jsonl")
    if REGEN:
        stored.write_text(text)
    assert stored.read_text() == text


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_replay_from_recorded_scenario(cfg):
    # a trace carries enough to re-run itself
    stored = cfg.with_suffix(".trace.jsonl").read_text()
    meta = json.loads(stored.splitlines()[0])
    meta = meta.get("meta", meta)
    sc = Scenario.from_dict(json.loads(meta["scenario"]))
    trace, _ = sc.run(meta["seed"])
    assert trace.to_jsonl() == stored


def test_independent_of_hash_seed(tmp_path):
    cfg = GOLDEN / "ext.yaml"
    outs = []
    for hs in ("0", "12345"):
        out = tmp_path / hs
        env = dict(os.environ, PYTHONHASHSEED=hs)
        subprocess.run([sys.executable, "-m", "crusader", "run", "--config", str(cfg), "--out-dir", str(out),
                        "--quiet"], check=True, env=env)
        outs.append((out / "ext-seed3.trace.jsonl").read_bytes())
    assert outs[0] == outs[1] == (GOLDEN / "ext.trace.jsonl").read_bytes()
