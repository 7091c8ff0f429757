"""Scenario configs: parsing, validation, round-tripping and execution."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Any, Optional

import yaml

from .lab.audit import AuditReport, audit
from .lab.inputs import make_inputs
from .params import ParamError, ProtocolParams, as_fraction
from .protocols import BA_BACKENDS, PROTOCOLS
from .sim import Simulation, make_strategy, strategy_catalog
from .sim.trace import Trace

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    protocol: str
    n: int
    t: int
    ell: int
    lam: int = 32
    eps: Optional[str] = None
    ca_backend: str = "CA1"
    ba_backend: str = "oracle"
    inputs: Any = field(default_factory=lambda: {"family": "common"})
    strategy: str = "fifo"
    strategy_params: dict = field(default_factory=dict)
    seeds: list = field(default_factory=lambda: [0])
    fairness_K: Optional[int] = None
    event_cap: Optional[int] = None
    oracle_rule: str = "all"
    oracle_tiebreak: int = 0
    audit: bool = True

    def __post_init__(self):
        self.protocol = str(self.protocol).upper()
        self.ca_backend = str(self.ca_backend).upper()
        if self.eps is not None:
            self.eps = str(as_fraction(self.eps))

    @property
    def params(self) -> ProtocolParams:
        return ProtocolParams(self.n, self.t, self.ell, self.lam, self.eps)

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol: unknown {self.protocol!r}")
        if self.ca_backend not in ("CA1", "CA2"):
            raise ConfigError(f"ca_backend: unknown {self.ca_backend!r}")
        if self.ba_backend not in BA_BACKENDS:
            raise ConfigError(f"ba_backend: unknown {self.ba_backend!r}")
        if self.strategy not in strategy_catalog():
            raise ConfigError(f"strategy: unknown {self.strategy!r}")
        if self.oracle_rule not in ("all", "quorum"):
            raise ConfigError(f"oracle_rule: must be 'all' or 'quorum'")
        try:
            self.params.require(self.protocol, self.ca_backend)
        except ParamError as e:
            raise ConfigError(str(e)) from None
        if isinstance(self.inputs, dict) and "family" not in self.inputs:
            for pid, spec in self.inputs.items():
                if not 1 <= int(pid) <= self.n:
                    raise ConfigError(f"inputs: party {pid} out of range")
                value = spec["value"] if isinstance(spec, dict) else spec
                if value is not None and not 0 <= int(value) < 1 << self.ell:
                    raise ConfigError(f"inputs.{pid}: value is not an {self.ell}-bit string")

    # -- conversion -------------------------------------------------------------

    def to_dict(self) -> dict:
        d = {"schema_version": SCHEMA_VERSION}
        for f in fields(self):
            d[f.name] = getattr(self, f.name)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        ver = d.pop("schema_version", SCHEMA_VERSION)
        if ver != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: unsupported {ver}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
        for req in ("protocol", "n", "t", "ell"):
            if req not in d:
                raise ConfigError(f"{req}: missing")
        seeds = d.get("seeds")
        if isinstance(seeds, int):
            d["seeds"] = list(range(seeds))
        elif isinstance(seeds, dict):
            d["seeds"] = list(range(seeds.get("start", 0), seeds.get("start", 0) + seeds["count"]))
        for name in ("n", "t", "ell", "lam"):
            if name in d and not isinstance(d[name], int):
                raise ConfigError(f"{name}: expected an integer, got {d[name]!r}")
        try:
            sc = cls(**d)
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise ConfigError(str(e)) from None
        sc.validate()
        return sc

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # -- execution ---------------------------------------------------------------

    def input_schedule(self, seed) -> dict:
        """pid -> (value, release decision)."""
        spec = self.inputs
        if isinstance(spec, dict) and "family" in spec:
            kw = {k: v for k, v in spec.items() if k not in ("family", "absent", "at")}
            if spec["family"] == "colliding" and "delta" not in kw:
                kw["delta"] = self.params.ca2_delta if self.params.eps is not None else 1
            vals = make_inputs(spec["family"], self.n, self.t, self.ell, seed, **kw)
            for pid in spec.get("absent", []):
                vals.pop(int(pid), None)
            at = {int(k): int(v) for k, v in (spec.get("at") or {}).items()}
            return {p: (v, at.get(p, 0)) for p, v in sorted(vals.items())}
        out = {}
        for pid, s in (spec or {}).items():
            if isinstance(s, dict):
                if s.get("value") is None:
                    continue
                out[int(pid)] = (int(s["value"]), int(s.get("at", 0)))
            elif s is not None:
                out[int(pid)] = (int(s), 0)
        return dict(sorted(out.items()))

    def simulation(self, seed) -> Simulation:
        strat = make_strategy(self.strategy, **self.strategy_params)
        return Simulation(self.params, self.protocol, self.input_schedule(seed), strat, seed=seed,
                          fairness_K=self.fairness_K, event_cap=self.event_cap,
                          ca_backend=self.ca_backend, ba_backend=self.ba_backend,
                          oracle_rule=self.oracle_rule, oracle_tiebreak=self.oracle_tiebreak)

    def run(self, seed) -> tuple[Trace, Optional[AuditReport]]:
        trace = self.simulation(seed).run()
        trace.meta["scenario"] = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return trace, (audit(trace) if self.audit else None)


def load_config(path) -> dict:
    """Read a YAML or JSON config file into a dict."""
    with open(path) as f:
        text = f.read()
    try:
        if str(path).endswith(".json"):
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}: {e.msg}") from None
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{path}: {where}{getattr(e, 'problem', e)}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data
