"""Append-only simulation record with counters and a line-delimited JSON form."""

from __future__ import annotations

import json
from collections import defaultdict
from typing import Any, Iterable, Optional

SCHEMA_VERSION = 1

# Event tuples.  The first element is the event type; field names are listed here
# so that the JSON export and import stay in sync.
FIELDS = {
    "send": ("eid", "step", "src", "dst", "path", "kind", "value", "bits", "depth", "origin"),
    "deliver": ("eid", "step"),
    "drop": ("eid", "step"),
    "rewrite": ("eid", "step", "value"),
    "acquire": ("step", "pid", "value", "honest"),
    "corrupt": ("step", "pid", "behavior"),
    "output": ("step", "pid", "path", "value"),
    "subinput": ("step", "pid", "path", "value"),
    "terminate": ("step", "pid", "path"),
    "coin": ("step", "path", "round", "bit"),
    "oracle": ("step", "path", "bit"),
}
PATH_FIELDS = {"path"}

HONEST, BYZANTINE, SERVICE = "h", "b", "o"


def encode_value(v: Any) -> Any:
    if v is None or isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v if -(1 << 53) < v < (1 << 53) else hex(v)
    if isinstance(v, bytes):
        return "b:" + v.hex()
    if isinstance(v, tuple):
        return [encode_value(x) for x in v]
    if isinstance(v, str):
        return "s:" + v
    raise TypeError(f"cannot encode {type(v).__name__}")


def decode_value(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(decode_value(x) for x in v)
    if isinstance(v, str):
        if v.startswith("b:"):
            return bytes.fromhex(v[2:])
        if v.startswith("s:"):
            return v[2:]
        return int(v, 16)
    return v


def path_str(path: tuple) -> str:
    return "/".join(path)


class Trace:
    def __init__(self, meta: Optional[dict] = None):
        self.meta: dict = dict(meta or {})
        self.events: list[tuple] = []
        self.honest_msgs = 0
        self.honest_bits = 0
        self.byz_msgs = 0
        self.byz_bits = 0
        self.service_msgs = 0
        self.per_path: dict[tuple, list] = defaultdict(lambda: [0, 0])
        self.causal_depth = 0
        self.max_deferral = 0
        self.decisions = 0
        self.capped = False
        self.quiescent = False

    # -- recording ----------------------------------------------------------

    def add(self, ev: tuple) -> None:
        self.events.append(ev)

    def record_send(self, eid, step, src, dst, path, msg, depth, origin) -> None:
        self.events.append(("send", eid, step, src, dst, path, msg.kind, msg.value, msg.bits, depth, origin))
        if origin == HONEST:
            self.honest_msgs += 1
            self.honest_bits += msg.bits
            c = self.per_path[path]
            c[0] += 1
            c[1] += msg.bits
        elif origin == BYZANTINE:
            self.byz_msgs += 1
            self.byz_bits += msg.bits
        else:
            self.service_msgs += 1

    # -- summary ------------------------------------------------------------

    def counters(self) -> dict:
        return {
            "honest_msgs": self.honest_msgs,
            "honest_bits": self.honest_bits,
            "byz_msgs": self.byz_msgs,
            "byz_bits": self.byz_bits,
            "service_msgs": self.service_msgs,
            "causal_depth": self.causal_depth,
            "max_deferral": self.max_deferral,
            "decisions": self.decisions,
            "capped": self.capped,
            "quiescent": self.quiescent,
            "per_path": {path_str(p): list(c) for p, c in sorted(self.per_path.items())},
        }

    def subtree(self, prefix: tuple, exclude: Iterable[tuple] = ()) -> tuple[int, int]:
        """Honest (messages, bits) sent on instances under ``prefix`` minus the ``exclude`` subtrees."""
        ex = [tuple(e) for e in exclude]
        msgs = bits = 0
        for p, (m, b) in self.per_path.items():
            if p[:len(prefix)] != prefix or any(p[:len(e)] == e for e in ex):
                continue
            msgs += m
            bits += b
        return msgs, bits

    # -- queries used by auditors -------------------------------------------

    def of(self, kind: str) -> list[tuple]:
        return [e for e in self.events if e[0] == kind]

    @property
    def n(self) -> int:
        return self.meta["n"]

    @property
    def t(self) -> int:
        return self.meta["t"]

    def corrupted(self) -> dict[int, int]:
        return {e[2]: e[1] for e in self.events if e[0] == "corrupt"}

    def honest(self) -> list[int]:
        bad = self.corrupted()
        return [p for p in range(1, self.n + 1) if p not in bad]

    def acquisitions(self) -> dict[int, tuple]:
        """pid -> (step, value, honest at acquisition)."""
        return {e[2]: (e[1], e[3], e[4]) for e in self.events if e[0] == "acquire"}

    def honest_inputs(self) -> dict[int, Any]:
        honest = set(self.honest())
        return {p: v for p, (_, v, _) in self.acquisitions().items() if p in honest}

    def outputs(self, path: tuple) -> dict[int, list]:
        out: dict[int, list] = defaultdict(list)
        for e in self.events:
            if e[0] == "output" and e[3] == path:
                out[e[2]].append(e[4])
        return dict(out)

    def output_steps(self, path: tuple) -> dict[int, int]:
        out: dict[int, int] = {}
        for e in self.events:
            if e[0] == "output" and e[3] == path and e[2] not in out:
                out[e[2]] = e[1]
        return out

    def subinputs(self, path: tuple) -> dict[int, list]:
        out: dict[int, list] = defaultdict(list)
        for e in self.events:
            if e[0] == "subinput" and e[3] == path:
                out[e[2]].append(e[4])
        return dict(out)

    def terminations(self, path: tuple) -> dict[int, int]:
        return {e[2]: e[1] for e in self.events if e[0] == "terminate" and e[3] == path}

    def sends(self, path: Optional[tuple] = None, kind: Optional[str] = None, origin: Optional[str] = None) -> list[tuple]:
        return [e for e in self.events if e[0] == "send"
                and (path is None or e[5] == path)
                and (kind is None or e[6] == kind)
                and (origin is None or e[10] == origin)]

    def fates(self) -> dict[int, str]:
        """eid -> 'deliver' | 'drop' for every resolved envelope."""
        return {e[1]: e[0] for e in self.events if e[0] in ("deliver", "drop")}

    # -- export / import ----------------------------------------------------

    def to_records(self) -> list[dict]:
        recs = [{"type": "header", "schema_version": SCHEMA_VERSION, "meta": _jsonable(self.meta)}]
        for ev in self.events:
            rec = {"type": ev[0]}
            for name, val in zip(FIELDS[ev[0]], ev[1:]):
                if name in PATH_FIELDS:
                    rec[name] = path_str(val)
                elif name == "value":
                    rec[name] = encode_value(val)
                else:
                    rec[name] = val
            recs.append(rec)
        recs.append({"type": "summary", **self.counters()})
        return recs

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.to_records())

    def write(self, fp) -> None:
        with open(fp, "w") as f:
            f.write(self.to_jsonl())

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "Trace":
        tr = cls()
        for rec in records:
            typ = rec["type"]
            if typ == "header":
                if rec.get("schema_version") != SCHEMA_VERSION:
                    raise ValueError(f"unsupported trace schema {rec.get('schema_version')}")
                tr.meta = rec["meta"]
            elif typ == "summary":
                tr.causal_depth = rec["causal_depth"]
                tr.max_deferral = rec["max_deferral"]
                tr.decisions = rec["decisions"]
                tr.capped = rec["capped"]
                tr.quiescent = rec["quiescent"]
            else:
                vals = []
                for name in FIELDS[typ]:
                    v = rec[name]
                    if name in PATH_FIELDS:
                        v = tuple(v.split("/")) if v else ()
                    elif name == "value":
                        v = decode_value(v)
                    vals.append(v)
                ev = (typ, *vals)
                if typ == "send":
                    from ..protocols.base import Msg
                    _, eid, step, src, dst, path, kind, value, bits, depth, origin = ev
                    tr.record_send(eid, step, src, dst, path, Msg(kind, value, bits), depth, origin)
                else:
                    tr.add(ev)
        return tr

    @classmethod
    def read(cls, fp) -> "Trace":
        with open(fp) as f:
            return cls.from_records(json.loads(line) for line in f if line.strip())


def _jsonable(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        if isinstance(v, (int, str, bool, float)) or v is None:
            out[k] = v
        elif isinstance(v, dict):
            out[k] = _jsonable(v)
        elif isinstance(v, (list, tuple)):
            out[k] = [encode_value(x) if not isinstance(x, (str, float)) else x for x in v]
        else:
            out[k] = str(v)
    return out
