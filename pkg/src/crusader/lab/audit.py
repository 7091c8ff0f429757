"""Trace auditors for the security properties and lemmas of every protocol.

Conventions used throughout:

* "final-honest" parties are never corrupted in the trace.  Liveness-type
  checks quantify over them.
* Safety checks (consistency, validity of what was output) look at every
  output made by a party that was honest at that moment; those outputs are
  immutable history even if the party is corrupted later.
* An instance is "complete" when nothing above it can halt it early.  The
  sub-instances of EXT are not complete, because EXT terminates its whole
  subtree once it outputs, so only their safety properties are checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

from ..ecc import rs_code
from ..params import ProtocolParams
from ..protocols.base import BOT
from ..sim.trace import HONEST, Trace


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    skipped: bool = False

    def to_dict(self) -> dict:
        d = {"name": self.name, "ok": self.ok, "skipped": self.skipped}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(ok), detail))

    def eventually(self, name: str, ok: bool, detail: str, settled: bool) -> None:
        """A liveness-style check: a miss only counts once the run reached quiescence."""
        if ok or settled:
            self.add(name, ok, detail)
        else:
            self.skip(name, f"undetermined, run hit the event cap ({detail})")

    def skip(self, name: str, why: str) -> None:
        self.checks.append(Check(name, True, why, skipped=True))

    def extend(self, other: "AuditReport") -> None:
        self.checks.extend(other.checks)
        self.warnings.extend(other.warnings)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_dict() for c in self.checks], "warnings": list(self.warnings)}


def params_of(trace: Trace) -> ProtocolParams:
    m = trace.meta
    return ProtocolParams(m["n"], m["t"], m["ell"], m.get("lam", 32), m.get("eps"))


def value_order(v: Any) -> tuple:
    """Total order on protocol values that never formats huge integers."""
    if v is None:
        return (0, 0)
    if isinstance(v, int):
        return (1, v)
    return (2, repr(v))


def _short(v: Any) -> str:
    s = hex(v) if isinstance(v, int) and not isinstance(v, bool) else repr(v)
    return s if len(s) <= 24 else s[:21] + "..."


class View:
    """Indexed, read-only view of a trace for the auditors."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.p = params_of(trace)
        self.n, self.t = self.p.n, self.p.t
        self.corrupt_at = trace.corrupted()
        self.final_honest = [p for p in range(1, self.n + 1) if p not in self.corrupt_at]
        self.acq = trace.acquisitions()
        self.quiescent = trace.quiescent and not trace.capped
        self._outputs: dict = {}
        self._subinputs: dict = {}
        self._terms: dict = {}
        self._sends: dict = {}
        for e in trace.events:
            typ = e[0]
            if typ == "output":
                self._outputs.setdefault(e[3], []).append((e[1], e[2], e[4]))
            elif typ == "subinput":
                self._subinputs.setdefault(e[3], []).append((e[1], e[2], e[4]))
            elif typ == "terminate":
                self._terms.setdefault(e[3], {}).setdefault(e[2], e[1])
            elif typ == "send":
                self._sends.setdefault(e[5], []).append(e)

    def honest_at(self, pid: int, step: int) -> bool:
        c = self.corrupt_at.get(pid)
        return c is None or c > step

    def all_acquired(self) -> bool:
        return all(p in self.acq for p in self.final_honest)

    def inputs(self, path: tuple) -> dict:
        """pid -> (step, value) of the first input to ``path``."""
        if len(path) == 1:
            return {p: (s, v) for p, (s, v, _) in self.acq.items()}
        out: dict = {}
        for step, pid, v in self._subinputs.get(path, ()):
            out.setdefault(pid, (step, v))
        return out

    def input_counts(self, path: tuple) -> dict:
        out: dict = {}
        for step, pid, v in self._subinputs.get(path, ()):
            out[pid] = out.get(pid, 0) + 1
        return out

    def outputs(self, path: tuple) -> list:
        """(step, pid, value) for each output at ``path``."""
        return list(self._outputs.get(path, ()))

    def first_outputs(self, path: tuple) -> dict:
        out: dict = {}
        for step, pid, v in self._outputs.get(path, ()):
            out.setdefault(pid, (step, v))
        return out

    def honest_outputs(self, path: tuple) -> list:
        return [(s, p, v) for s, p, v in self.outputs(path) if self.honest_at(p, s)]

    def terminations(self, path: tuple) -> dict:
        return dict(self._terms.get(path, {}))

    def sends(self, path: tuple) -> list:
        return list(self._sends.get(path, ()))

    def subtree_sends(self, prefix: tuple) -> list:
        out = []
        for path, evs in self._sends.items():
            if path[:len(prefix)] == prefix:
                out.extend(evs)
        return out

    def bot_senders(self, path: tuple, kind: str = "BOT") -> set:
        return {e[3] for e in self.sends(path) if e[6] == kind and e[10] == HONEST}


# -- shared property checks -----------------------------------------------------

def _single_output(v: View, path: tuple, label: str, rep: AuditReport) -> None:
    per: dict = {}
    for s, p, _ in v.honest_outputs(path):
        per[p] = per.get(p, 0) + 1
    bad = sorted(p for p, c in per.items() if c > 1)
    rep.add(f"{label}.single-output", not bad, f"parties with several outputs: {bad}" if bad else "")


def _common_input(v: View, path: tuple) -> Optional[tuple]:
    """(value,) if every final-honest party input the same value to ``path``, else None."""
    ins = v.inputs(path)
    vals = {ins[p][1] for p in v.final_honest if p in ins}
    if len(vals) == 1 and all(p in ins for p in v.final_honest):
        return (vals.pop(),)
    return None


def _liveness(v: View, path: tuple, label: str, rep: AuditReport, who: Optional[list] = None) -> None:
    who = v.final_honest if who is None else who
    outs = v.first_outputs(path)
    missing = [p for p in who if p not in outs]
    rep.eventually(f"{label}.liveness", not missing, f"no output from {missing}" if missing else "", v.quiescent)


# -- REC -------------------------------------------------------------------------

def audit_rec(trace: Trace, path: tuple = ("rec",), complete: bool = True, view: Optional[View] = None) -> AuditReport:
    v = view or View(trace)
    rep = AuditReport()
    label = "rec" if path == ("rec",) else "/".join(path)
    ins = v.inputs(path)
    honest_ins = {p: (s, x) for p, (s, x) in ins.items() if v.honest_at(p, s)}
    cands = sorted({x for _, x in honest_ins.values()}, key=value_order)
    if len(cands) > 1:
        rep.add(f"{label}.single-candidate", False,
                f"honest inputs {[_short(c) for c in cands]}")
        return rep
    _single_output(v, path, label, rep)
    outs = v.honest_outputs(path)
    if not cands:
        rep.add(f"{label}.validity", not outs, f"outputs without any honest input: {len(outs)}" if outs else "")
        mine = [e for e in v.sends(path) if e[10] == HONEST]
        rep.add(f"{label}.no-honest-traffic", not mine, f"{len(mine)} honest sends without input" if mine else "")
        return rep
    vstar = cands[0]
    first_in = min(s for s, _ in honest_ins.values())
    bad = [(p, _short(x)) for s, p, x in outs if x != vstar]
    early = [p for s, p, _ in outs if s < first_in]
    rep.add(f"{label}.validity", not bad and not early,
            f"wrong outputs {bad}, outputs before first honest input {early}" if bad or early else "")
    code = rs_code(v.n, v.p.rec_k, v.p.ell)
    enc = code.encode(vstar)
    wrong = []
    for e in v.sends(path):
        if e[10] != HONEST:
            continue
        src, dst, kind, val = e[3], e[4], e[6], e[7]
        want = enc[src - 1] if kind == "MINE" else enc[dst - 1]
        if val != want:
            wrong.append((kind, src, dst))
    rep.add(f"{label}.acts-validly", not wrong, f"{len(wrong)} honest MINE/YOURS not matching Enc(v*): {wrong[:4]}" if wrong else "")
    if not complete:
        return rep
    fh_in = [p for p in v.final_honest if p in ins]
    if len(fh_in) >= v.t + 1:
        _liveness(v, path, label, rep)
    else:
        rep.skip(f"{label}.liveness", f"only {len(fh_in)} final-honest inputs")
    outs_fh = [p for p in v.first_outputs(path) if p in v.final_honest]
    if outs_fh:
        missing = [p for p in v.final_honest if p not in v.first_outputs(path)]
        rep.eventually(f"{label}.totality", not missing, f"{outs_fh[:3]} output but {missing} did not" if missing else "",
                       v.quiescent)
    else:
        rep.skip(f"{label}.totality", "no final-honest output")
    terms = v.terminations(path)
    unterm = [p for p in v.first_outputs(path) if p in v.final_honest and p not in terms]
    rep.eventually(f"{label}.terminates", not unterm, f"output without termination: {unterm}" if unterm else "",
                   v.quiescent)
    return rep


# -- SRA / PRA ----------------------------------------------------------------------

def audit_ra(trace: Trace, path: tuple, complete: bool = True, view: Optional[View] = None) -> AuditReport:
    """Reliable agreement: consistent outputs, own input as output, validity on common input."""
    v = view or View(trace)
    rep = AuditReport()
    label = "/".join(path)
    _single_output(v, path, label, rep)
    outs = v.honest_outputs(path)
    ins = v.inputs(path)
    vals = sorted({x for _, _, x in outs}, key=value_order)
    rep.add(f"{label}.consistency", len(vals) <= 1, f"distinct outputs {[_short(x) for x in vals]}" if len(vals) > 1 else "")
    notown = [p for _, p, x in outs if p not in ins or ins[p][1] != x]
    rep.add(f"{label}.outputs-own-input", not notown, f"{notown}" if notown else "")
    common = _common_input(v, path)
    if common is not None and complete:
        _liveness(v, path, f"{label}.validity", rep)
    return rep


# -- KCA ---------------------------------------------------------------------------

def audit_kca(trace: Trace, path: tuple = ("kca",), complete: bool = True, view: Optional[View] = None) -> AuditReport:
    v = view or View(trace)
    p = v.p
    rep = AuditReport()
    label = "/".join(path)
    _single_output(v, path, label, rep)
    outs = v.honest_outputs(path)
    ins = v.inputs(path)
    vals = sorted({x for _, _, x in outs if x is not BOT}, key=value_order)
    rep.add(f"{label}.k-weak-consistency", len(vals) <= p.k_weak,
            f"{len(vals)} distinct non-bot outputs > {p.k_weak}" if len(vals) > p.k_weak else "")
    sigma = p.sigma
    for y in vals:
        strict = sum(1 for q in v.final_honest if q in ins and ins[q][1] == y)
        loose = sum(1 for q, (s, x) in ins.items() if x == y and v.honest_at(q, s))
        ok = 8 * strict >= sigma * v.n
        rep.add(f"{label}.support", ok,
                f"output {_short(y)}: {strict} never-corrupted holders ({loose} honest at input), need sigma*n/8 = {float(sigma * v.n / 8):.2f}"
                if not ok else "")
    common = _common_input(v, path)
    if common is not None:
        bad = [q for _, q, x in outs if x != common[0]]
        rep.add(f"{label}.validity", not bad, f"{bad} output something else" if bad else "")
    if complete and _all_input(v, path):
        _liveness(v, path, label, rep)
    return rep


def _all_input(v: View, path: tuple) -> bool:
    ins = v.inputs(path)
    return all(q in ins for q in v.final_honest)


# -- CA1 / CA2 ----------------------------------------------------------------------

def audit_ca(trace: Trace, path: tuple, complete: bool = True, view: Optional[View] = None) -> AuditReport:
    """Weak consistency, validity and liveness of a crusader agreement instance."""
    v = view or View(trace)
    rep = AuditReport()
    label = "/".join(path)
    _single_output(v, path, label, rep)
    outs = v.honest_outputs(path)
    vals = sorted({x for _, _, x in outs if x is not BOT}, key=value_order)
    rep.add(f"{label}.weak-consistency", len(vals) <= 1,
            f"distinct non-bot outputs {[_short(x) for x in vals]}" if len(vals) > 1 else "")
    common = _common_input(v, path)
    if common is not None:
        bad = [(q, _short(x)) for _, q, x in outs if x != common[0]]
        rep.add(f"{label}.validity", not bad, f"{bad}" if bad else "")
    if complete and _all_input(v, path):
        _liveness(v, path, label, rep)
    return rep


def core_predicate(trace: Trace, path: tuple, backend: str, view: Optional[View] = None) -> dict:
    """Evaluate the k-core predicate of a CA instance from ground truth.

    CA1 uses the instance inputs and k = t+1; CA2 uses the KCA outputs and
    k = ceil((n-t)/2).  Supporters are never-corrupted parties holding the
    value that never multicast bot on the instance.
    """
    v = view or View(trace)
    p = v.p
    if backend.upper() == "CA1":
        k = v.t + 1
        held = {q: x for q, (_, x) in v.inputs(path).items()}
    else:
        k = p.ca2_core
        held = {q: x for q, (_, x) in v.first_outputs(path + ("kca",)).items()}
    bots = v.bot_senders(path)
    support: dict = {}
    for q in v.final_honest:
        x = held.get(q, BOT)
        if x is BOT or q in bots:
            continue
        support.setdefault(x, []).append(q)
    witnesses = sorted((x for x, s in support.items() if len(s) >= k), key=value_order)
    return {
        "k": k,
        "holds": bool(witnesses),
        "witnesses": witnesses,
        "witness": witnesses[0] if witnesses else None,
        "support": sorted(support.get(witnesses[0], [])) if witnesses else [],
        "held": held,
        "bot_senders": sorted(q for q in bots if q in v.final_honest),
    }


def audit_dichotomy(trace: Trace, path: tuple, backend: str, complete: bool = True, view: Optional[View] = None) -> AuditReport:
    """Core-predicate dichotomy: REC gating when the predicate holds, t+1 honest bot multicasts otherwise."""
    v = view or View(trace)
    rep = AuditReport()
    label = f"{'/'.join(path)}.core"
    if not _all_input(v, path):
        rep.skip(label, "not every honest party acquired an input")
        return rep
    cp = core_predicate(trace, path, backend, v)
    held = cp["held"]
    rec_in = {q: x for q, (s, x) in v.inputs(path + ("rec",)).items() if q in v.final_honest}
    if cp["holds"]:
        if len(cp["witnesses"]) > 1:
            rep.add(f"{label}.unique-witness", False, f"witnesses {[_short(w) for w in cp['witnesses']]}")
            return rep
        w = cp["witness"]
        wrong = [q for q, x in rec_in.items() if x != w or held.get(q, BOT) != w]
        rep.add(f"{label}.rec-gating", not wrong, f"REC inputs from non-witness holders {wrong}" if wrong else "")
        if complete:
            holders = [q for q in v.final_honest if held.get(q, BOT) == w]
            missing = [q for q in holders if q not in rec_in]
            rep.eventually(f"{label}.holders-input-rec", not missing,
                           f"witness holders without REC input {missing}" if missing else "", v.quiescent)
    elif complete:
        got = len(cp["bot_senders"])
        rep.eventually(f"{label}.bot-multicasts", got >= v.t + 1,
                       f"predicate fails but only {got} honest bot multicasts" if got < v.t + 1 else "", v.quiescent)
    else:
        rep.skip(f"{label}.bot-multicasts", "instance halted by parent")
    return rep


def collision_audit(trace: Trace, path: tuple = ("ca2",), view: Optional[View] = None) -> dict:
    """For each honest P_i with a non-bot KCA output, the honest P_j with another non-bot KCA
    output whose symbol sent to P_i matches P_i's own encoding."""
    v = view or View(trace)
    p = v.p
    z = {q: x for q, (_, x) in v.first_outputs(path + ("kca",)).items()}
    code = rs_code(v.n, p.ca2_delta, p.ell)
    enc = {}
    sent: dict = {}
    for e in v.sends(path):
        if e[6] == "SYM" and e[10] == HONEST and e[3] != e[4]:
            sent.setdefault((e[3], e[4]), e[7])
    report = {}
    for i in v.final_honest:
        zi = z.get(i, BOT)
        if zi is BOT:
            continue
        if zi not in enc:
            enc[zi] = code.encode(zi)
        E = []
        for j in v.final_honest:
            zj = z.get(j, BOT)
            if j == i or zj is BOT or zj == zi:
                continue
            s = sent.get((j, i))
            if s is not None and s == enc[zi][j - 1]:
                E.append(j)
        report[i] = E
    return {"bound": p.collision_bound, "E": report, "max": max((len(e) for e in report.values()), default=0)}


def audit_collisions(trace: Trace, path: tuple = ("ca2",), view: Optional[View] = None) -> AuditReport:
    rep = AuditReport()
    c = collision_audit(trace, path, view)
    ok = c["max"] <= c["bound"]
    rep.add(f"{'/'.join(path)}.collisions", ok, "" if ok else f"max |E_i| = {c['max']} > {c['bound']}")
    return rep


# -- binary BA -------------------------------------------------------------------------

def audit_ba(trace: Trace, path: tuple = ("ba",), complete: bool = True, view: Optional[View] = None) -> AuditReport:
    v = view or View(trace)
    rep = AuditReport()
    label = "/".join(path)
    _single_output(v, path, label, rep)
    outs = v.honest_outputs(path)
    vals = {x for _, _, x in outs}
    rep.add(f"{label}.binary", vals <= {0, 1}, f"{vals}" if not vals <= {0, 1} else "")
    rep.add(f"{label}.consistency", len(vals) <= 1, f"{vals}" if len(vals) > 1 else "")
    ins = v.inputs(path)
    honest_in = {x for q, (s, x) in ins.items() if v.honest_at(q, s)}
    bad = [x for x in vals if x not in honest_in]
    rep.add(f"{label}.validity", not bad, f"output {bad} not an honest input {honest_in}" if bad else "")
    counts = v.input_counts(path)
    twice = [q for q, c in counts.items() if c > 1 and q in v.final_honest]
    rep.add(f"{label}.input-once", not twice, f"{twice}" if twice else "")
    fh_out = [q for q in v.first_outputs(path) if q in v.final_honest]
    if fh_out and complete:
        missing = [q for q in v.final_honest if q not in v.first_outputs(path)]
        rep.eventually(f"{label}.totality", not missing, f"{missing} never terminated" if missing else "", v.quiescent)
    elif complete and _all_input(v, path):
        _liveness(v, path, label, rep)
    return rep


def ba_rounds(trace: Trace, path: tuple = ("ba",)) -> int:
    """Highest coin round revealed for the BA instance at ``path``."""
    return max((e[3] for e in trace.events if e[0] == "coin" and e[2] == path), default=0)


# -- EXT ---------------------------------------------------------------------------------

def audit_ext(trace: Trace, path: tuple = ("ext",), view: Optional[View] = None) -> AuditReport:
    v = view or View(trace)
    rep = AuditReport()
    label = "ext"
    ins = v.inputs(path)
    outs = v.honest_outputs(path)
    _single_output(v, path, label, rep)
    vals = sorted({x for _, _, x in outs}, key=value_order)
    rep.add(f"{label}.consistency", len(vals) <= 1, f"{[_short(x) for x in vals]}" if len(vals) > 1 else "")
    honest_in = {x for q, (s, x) in ins.items() if v.honest_at(q, s)}
    intr = [x for x in vals if x is not BOT and x not in honest_in]
    rep.add(f"{label}.intrusion-tolerance", not intr, f"outputs that are no honest input: {[_short(x) for x in intr]}" if intr else "")
    common = _common_input(v, path)
    if common is not None:
        bad = [(q, _short(x)) for _, q, x in outs if x != common[0]]
        rep.add(f"{label}.validity", not bad, f"{bad}" if bad else "")
    all_in = _all_input(v, path)
    if all_in:
        _liveness(v, path, f"{label}.termination", rep)
    terms = v.terminations(path)
    unterm = [q for q in v.first_outputs(path) if q in v.final_honest and q not in terms]
    rep.eventually(f"{label}.terminates-after-output", not unterm, f"{unterm}" if unterm else "", v.quiescent)
    late = [e[3] for e in v.subtree_sends(path) if e[10] == HONEST and e[3] in terms and e[2] > terms[e[3]]]
    rep.add(f"{label}.silent-after-termination", not late, f"{len(late)} sends after termination" if late else "")
    # the only REC input is the unique non-bot honest CA output
    ca_out = {x for s, q, x in v.honest_outputs(path + ("ca",)) if x is not BOT}
    rec_in = {x for q, (s, x) in v.inputs(path + ("rec",)).items() if v.honest_at(q, s)}
    ok = len(ca_out) <= 1 and rec_in <= ca_out
    rep.add(f"{label}.only-vstar", ok, "" if ok else f"CA outputs {len(ca_out)}, REC inputs {len(rec_in)}")
    # some honest party terminates BA whenever everyone acquired an input
    if all_in:
        ba_done = [q for q in v.final_honest if q in v.terminations(path + ("ba",))]
        rep.eventually(f"{label}.some-ba-termination", bool(ba_done), "" if ba_done else "no honest party terminated BA",
                       v.quiescent)
    else:
        rep.skip(f"{label}.some-ba-termination", "not every honest party acquired an input")
    return rep


# -- dispatch ------------------------------------------------------------------------

def audit(trace: Trace) -> AuditReport:
    """All applicable auditors for the root protocol recorded in the trace meta."""
    v = View(trace)
    proto = trace.meta["protocol"].upper()
    backend = trace.meta.get("ca_backend", "CA1").upper()
    root = (proto.lower(),)
    rep = AuditReport()
    if proto == "REC":
        rep.extend(audit_rec(trace, root, view=v))
    elif proto in ("SRA", "PRA"):
        rep.extend(audit_ra(trace, root, view=v))
    elif proto == "KCA":
        rep.extend(audit_kca(trace, root, view=v))
    elif proto in ("CA1", "CA2"):
        rep.extend(_audit_ca_tree(trace, root, proto, True, v))
    elif proto == "BA":
        rep.extend(audit_ba(trace, root, view=v))
    elif proto == "EXT":
        rep.extend(audit_ext(trace, root, view=v))
        rep.extend(audit_ba(trace, root + ("ba",), complete=True, view=v))
        rep.extend(audit_rec(trace, root + ("rec",), complete=False, view=v))
        core = root + ("ca", "core")
        rep.extend(_audit_ca_tree(trace, core, backend, False, v))
    else:
        raise ValueError(f"no auditor for {proto}")
    if trace.capped:
        rep.warnings.append("event cap reached")
    return rep


def _audit_ca_tree(trace: Trace, path: tuple, backend: str, complete: bool, v: View) -> AuditReport:
    rep = AuditReport()
    rep.extend(audit_ca(trace, path, complete, v))
    rep.extend(audit_dichotomy(trace, path, backend, complete, v))
    cp = core_predicate(trace, path, backend, v)
    rec_path = path + ("rec",)
    if cp["holds"] or len({x for q, (s, x) in v.inputs(rec_path).items() if v.honest_at(q, s)}) <= 1:
        rep.extend(audit_rec(trace, rec_path, complete=False, view=v))
    else:
        rep.skip(f"{'/'.join(rec_path)}.single-candidate", "core predicate fails; REC inputs may differ")
    if backend == "CA1":
        rep.extend(audit_ra(trace, path + ("sra",), complete=False, view=v))
    else:
        rep.extend(audit_kca(trace, path + ("kca",), complete=complete, view=v))
        rep.extend(audit_ra(trace, path + ("pra",), complete=False, view=v))
        rep.extend(audit_collisions(trace, path, v))
    return rep
