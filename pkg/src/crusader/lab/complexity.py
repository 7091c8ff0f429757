"""Communication envelopes, message-count constants and fitting helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from ..params import ProtocolParams
from ..sim.trace import Trace

# Honest messages are at most MSG_CONSTANTS[p] * n^2 in every run (counted exactly).
MSG_CONSTANTS = {"REC": 2, "SRA": 2, "PRA": 1, "KCA": 2, "CA1": 7, "CA2": 7, "EXT-overhead": 3}

# Causal depth bounds with the oracle BA backend.
DEPTH_BOUNDS = {"REC": 3, "SRA": 3, "PRA": 2, "KCA": 3, "CA1": 8, "CA2": 10, "EXT": 14}


def _log2(x) -> float:
    return math.log2(x) if x > 1 else 0.0


def envelope(kind: str, p: ProtocolParams) -> float:
    """The stated bit envelope (without its constant) for ``kind``."""
    n, ell, lam = p.n, p.ell, p.lam
    if kind in ("REC", "EXT-overhead"):
        return ell * n + n * n
    if kind in ("CA1", "SRA"):
        return ell * n + n * n * (lam + _log2(n))
    if kind in ("CA2", "KCA", "PRA"):
        sigma = float(p.sigma)
        eps = float(p.eps)
        return ell * n / sigma ** 2 + n * n * max(1.0, _log2(1 / eps))
    raise KeyError(kind)


def measured(trace: Trace, kind: str) -> tuple[int, int]:
    """Honest (messages, bits) attributed to ``kind`` in the trace."""
    root = (trace.meta["protocol"].lower(),)
    if kind == "EXT-overhead":
        return trace.subtree(root, exclude=[root + ("ca",), root + ("ba",)])
    return trace.subtree(root)


@dataclass
class EnvelopeRow:
    kind: str
    n: int
    t: int
    ell: int
    msgs: int
    bits: int
    depth: int
    envelope: float

    @property
    def ratio(self) -> float:
        return self.bits / self.envelope if self.envelope else 0.0

    @property
    def msg_bound(self) -> int:
        return MSG_CONSTANTS[self.kind] * self.n * self.n


def complexity_audit(trace: Trace, kind: Optional[str] = None) -> dict:
    """Counters of one trace against the envelope and message constant of ``kind``."""
    meta = trace.meta
    p = ProtocolParams(meta["n"], meta["t"], meta["ell"], meta.get("lam", 32), meta.get("eps"))
    kind = kind or meta["protocol"].upper()
    if kind == "EXT":
        kind = "EXT-overhead"
    msgs, bits = measured(trace, kind)
    env = envelope(kind, p)
    c1 = MSG_CONSTANTS.get(kind)
    return {
        "kind": kind, "n": p.n, "t": p.t, "ell": p.ell, "msgs": msgs, "bits": bits,
        "envelope": env, "ratio": bits / env if env else 0.0,
        "msg_bound": None if c1 is None else c1 * p.n * p.n,
        "msgs_ok": None if c1 is None else msgs <= c1 * p.n * p.n,
        "depth": trace.causal_depth,
    }


def fit_constant(pairs: list[tuple[float, float]]) -> tuple[float, float]:
    """Fit bits ~ c * envelope by least squares in log space (the geometric mean of
    the ratios).  Returns (c, worst relative deviation of any point from c * envelope)."""
    if not pairs:
        return 0.0, 0.0
    logs = [math.log(b / e) for b, e in pairs]
    c = math.exp(sum(logs) / len(logs))
    worst = max(abs(b / (c * e) - 1) for b, e in pairs)
    return c, worst


def doubling_ratios(rows: list[EnvelopeRow], key: Callable) -> list[tuple]:
    """Ratios of bits between consecutive rows that differ by a doubling of ``key``."""
    rows = sorted(rows, key=key)
    out = []
    for a, b in zip(rows, rows[1:]):
        if key(b) == 2 * key(a):
            out.append((key(a), key(b), b.bits / a.bits))
    return out
