import json

import pytest
import yaml

from crusader.scenario import SCHEMA_VERSION, ConfigError, Scenario, load_config


BASE = {"protocol": "CA2", "n": 8, "t": 2, "ell": 64, "eps": 1}


def parse(text):
    return Scenario.from_dict(yaml.safe_load(text))


@pytest.mark.parametrize("d", [
    BASE,
    {"protocol": "ext", "n": 7, "t": 2, "ell": 128, "ba_backend": "coin", "strategy": "split-brain",
     "seeds": 5, "fairness_K": 100},
    {"protocol": "REC", "n": 7, "t": 2, "ell": 32, "inputs": {1: 5, 2: {"value": 5, "at": 3}, 4: None}},
    {"protocol": "KCA", "n": 12, "t": 3, "ell": 64, "eps": "1/2",
     "inputs": {"family": "split", "classes": 3}, "seeds": {"start": 10, "count": 3}},
])
def test_round_trip(d):
    sc = Scenario.from_dict(d)
    text = sc.dumps()
    again = parse(text)
    assert again == sc
    assert again.dumps() == text
    assert yaml.safe_load(text)["schema_version"] == SCHEMA_VERSION


def test_seed_forms():
    assert Scenario.from_dict({**BASE, "seeds": 3}).seeds == [0, 1, 2]
    assert Scenario.from_dict({**BASE, "seeds": {"start": 5, "count": 2}}).seeds == [5, 6]
    assert Scenario.from_dict({**BASE, "seeds": [9, 4]}).seeds == [9, 4]


def test_eps_normalised():
    assert Scenario.from_dict({**BASE, "eps": 0.5, "n": 12, "t": 3}).eps == "1/2"
    assert Scenario.from_dict({**BASE, "eps": "1"}).eps == "1"


@pytest.mark.parametrize("change,needle", [
    ({"bogus": 1}, "bogus"),
    ({"protocol": "XYZ"}, "protocol"),
    ({"strategy": "nope"}, "strategy"),
    ({"ba_backend": "magic"}, "ba_backend"),
    ({"n": "eight"}, "n:"),
    ({"schema_version": 7}, "schema_version"),
    ({"inputs": {9: 1}}, "inputs"),
    ({"inputs": {1: 1 << 64}}, "inputs.1"),
])
def test_field_errors_name_the_field(change, needle):
    with pytest.raises(ConfigError, match=needle):
        Scenario.from_dict({**BASE, **change})


def test_missing_field():
    d = dict(BASE)
    del d["ell"]
    with pytest.raises(ConfigError, match="ell: missing"):
        Scenario.from_dict(d)


def test_threshold_rejected_before_run():
    # t = n/3 is above n/(3+eps) for eps = 1
    with pytest.raises(ConfigError, match="CA2"):
        Scenario.from_dict({**BASE, "n": 9, "t": 3})
    with pytest.raises(ConfigError):
        Scenario.from_dict({"protocol": "CA1", "n": 6, "t": 2, "ell": 8})
    with pytest.raises(ConfigError):
        Scenario.from_dict({"protocol": "EXT", "n": 8, "t": 2, "ell": 8, "ca_backend": "CA2"})


def test_yaml_error_reports_line(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("protocol: CA2\nn: 8\nt: [2\nell: 64\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(p)
    q = tmp_path / "bad.json"
    q.write_text('{"protocol": "CA2",\n "n": }')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(q)
    r = tmp_path / "list.yaml"
    r.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(r)


def test_json_and_yaml_agree(tmp_path):
    (tmp_path / "a.json").write_text(json.dumps(BASE))
    (tmp_path / "a.yaml").write_text(yaml.safe_dump(BASE))
    assert load_config(tmp_path / "a.json") == load_config(tmp_path / "a.yaml")


def test_input_schedule():
    sc = Scenario.from_dict({"protocol": "REC", "n": 7, "t": 2, "ell": 32,
                             "inputs": {3: {"value": 4, "at": 7}, 1: 4, 2: None}})
    assert sc.input_schedule(0) == {1: (4, 0), 3: (4, 7)}
    fam = Scenario.from_dict({**BASE, "inputs": {"family": "common", "absent": [2], "at": {3: 5}}})
    sched = fam.input_schedule(1)
    assert 2 not in sched and sched[3][1] == 5 and len({v for v, _ in sched.values()}) == 1


def test_run_records_scenario():
    sc = Scenario.from_dict(BASE)
    tr, rep = sc.run(0)
    assert rep.ok
    assert Scenario.from_dict(json.loads(tr.meta["scenario"])) == sc
