"""Command line: run scenarios, sweep grids, re-audit traces, check the graph lemma."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .lab import graph
from .lab.audit import AuditReport, audit
from .scenario import ConfigError, Scenario, load_config
from .sim.trace import Trace

CSV_COLUMNS = ["protocol", "n", "t", "ell", "eps", "lam", "ca_backend", "ba_backend", "strategy", "seed",
               "honest_msgs", "honest_bits", "byz_msgs", "byz_bits", "service_msgs", "causal_depth",
               "decisions", "quiescent", "audit_ok", "warnings", "failures", "error"]

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG = 0, 1, 2


def _verdict(report: Optional[AuditReport], strict: bool) -> bool:
    if report is None:
        return True
    return report.ok and not (strict and report.warnings)


def _row(sc: Scenario, seed, trace: Optional[Trace], report: Optional[AuditReport], error: str = "") -> dict:
    row = {"protocol": sc.protocol, "n": sc.n, "t": sc.t, "ell": sc.ell, "eps": sc.eps or "",
           "lam": sc.lam, "ca_backend": sc.ca_backend, "ba_backend": sc.ba_backend,
           "strategy": sc.strategy, "seed": seed, "error": error}
    if trace is not None:
        c = trace.counters()
        for k in ("honest_msgs", "honest_bits", "byz_msgs", "byz_bits", "service_msgs", "causal_depth",
                  "decisions", "quiescent"):
            row[k] = c[k]
    if report is not None:
        row["audit_ok"] = report.ok
        row["warnings"] = ";".join(report.warnings)
        row["failures"] = ";".join(f.name for f in report.failures())
    return row


def _write_csv(path: Path, rows: list) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def write_run(out: Path, stem: str, trace: Trace, report: Optional[AuditReport]) -> None:
    trace.write(out / f"{stem}.trace.jsonl")
    with open(out / f"{stem}.counters.json", "w") as f:
        json.dump(trace.counters(), f, indent=1, sort_keys=True)
    if report is not None:
        with open(out / f"{stem}.report.json", "w") as f:
            json.dump(report.to_dict(), f, indent=1)


def _overrides(d: dict, args) -> dict:
    d = dict(d)
    if getattr(args, "fairness_K", None) is not None:
        d["fairness_K"] = args.fairness_K
    if getattr(args, "ba_backend", None) is not None:
        d["ba_backend"] = args.ba_backend
    if getattr(args, "seed", None) is not None:
        d["seeds"] = [args.seed]
    return d


# -- grids ----------------------------------------------------------------------

def auto_t(protocol: str, n: int, eps, ca_backend: str = "CA1") -> int:
    """Largest t the protocol tolerates at n."""
    if protocol in ("KCA", "PRA", "CA2") or (protocol == "EXT" and ca_backend == "CA2"):
        return int(Fraction(n) / (3 + Fraction(eps)))
    return (n - 1) // 3


def expand_grid(d: dict) -> list[dict]:
    """Scenario dicts for every point of ``grid`` (a mapping field -> list of values).
    ``t: auto`` picks the largest tolerated t at each point."""
    d = dict(d)
    grid = d.pop("grid", None) or {}
    if not isinstance(grid, dict):
        raise ConfigError("grid: expected a mapping of field -> list of values")
    keys = list(grid)
    for k in keys:
        if not isinstance(grid[k], list):
            raise ConfigError(f"grid.{k}: expected a list")
    out = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        point = dict(d)
        point.update(zip(keys, combo))
        if point.get("t", "auto") == "auto" and "n" in point:
            point["t"] = auto_t(str(point.get("protocol", "")).upper(), point["n"], point.get("eps") or 1,
                                str(point.get("ca_backend", "CA1")).upper())
        out.append(point)
    return out


def _sweep_one(job) -> list:
    point, strict = job
    try:
        sc = Scenario.from_dict(point)
    except ConfigError as e:
        return [{**{k: point.get(k, "") for k in ("protocol", "n", "t", "ell", "eps")}, "error": f"config: {e}"}]
    rows = []
    for seed in sc.seeds:
        try:
            trace, report = sc.run(seed)
            row = _row(sc, seed, trace, report)
            row["audit_ok"] = _verdict(report, strict)
        except Exception as e:  # recorded per row; the sweep carries on
            row = _row(sc, seed, None, None, error=f"{type(e).__name__}: {e}")
        rows.append(row)
    return rows


# -- verbs ----------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        sc = Scenario.from_dict(_overrides(load_config(args.config), args))
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, all_ok = [], True
    for seed in sc.seeds:
        t0 = time.perf_counter()
        trace, report = sc.run(seed)
        ok = _verdict(report, args.strict)
        all_ok &= ok
        write_run(out, f"{sc.protocol.lower()}-seed{seed}", trace, report)
        rows.append(_row(sc, seed, trace, report))
        if not args.quiet:
            fails = ", ".join(f.name for f in report.failures()) if report else ""
            print(f"seed {seed}: {'PASS' if ok else 'FAIL'} msgs={trace.honest_msgs} bits={trace.honest_bits} "
                  f"depth={trace.causal_depth} ({time.perf_counter() - t0:.2f}s){' ' + fails if fails else ''}")
    if len(sc.seeds) > 1:
        _write_csv(out / "runs.csv", rows)
    return EXIT_OK if all_ok else EXIT_AUDIT


def cmd_sweep(args) -> int:
    try:
        base = _overrides(load_config(args.config), args)
        points = expand_grid(base)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(p, args.strict) for p in points]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    rows = [r for rs in results for r in rs]
    path = out / "sweep.csv"
    _write_csv(path, rows)
    bad = [r for r in rows if r.get("error") or not r.get("audit_ok", False)]
    if not args.quiet:
        print(f"{len(rows)} runs, {len(bad)} failing -> {path}")
    return EXIT_OK if not bad else EXIT_AUDIT


def cmd_audit(args) -> int:
    try:
        trace = Trace.read(args.trace)
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    report = audit(trace)
    ok = _verdict(report, args.strict)
    if args.json:
        print(json.dumps(report.to_dict(), indent=1))
    else:
        for c in report.checks:
            tag = "skip" if c.skipped else ("ok" if c.ok else "FAIL")
            print(f"{tag:4} {c.name}{': ' + c.detail if c.detail and not c.ok else ''}")
        for w in report.warnings:
            print(f"warn {w}")
        print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_AUDIT


def cmd_lemma(args) -> int:
    t0 = time.perf_counter()
    res = graph.exhaustive(args.max_vertices)
    total = res["total"]
    for (n, t), r in sorted(res["per"].items()):
        if args.verbose:
            print(f"n={n} t={t}: checked={r.checked} rejected={r.rejected} violations={r.violations}")
    print(f"exhaustive |V|<={args.max_vertices}: checked={total.checked} violations={total.violations} "
          f"min_slack={total.min_slack} ({time.perf_counter() - t0:.1f}s)")
    violations = total.violations
    if args.samples:
        s = graph.sample(args.max_vertices + 2, args.samples, seed=args.seed or 0)
        print(f"sampled |V|={args.max_vertices + 2}: checked={s.checked} violations={s.violations}")
        violations += s.violations
    if total.first_violation:
        print(f"first violation: {total.first_violation}")
    return EXIT_OK if violations == 0 else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crusader", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="scenario file (YAML or JSON)")
            sp.add_argument("--seed", type=int, help="run only this seed")
            sp.add_argument("--out-dir", default="out")
            sp.add_argument("--fairness-K", dest="fairness_K", type=int)
            sp.add_argument("--ba-backend", choices=["oracle", "coin"])
            sp.add_argument("--quiet", action="store_true")
        sp.add_argument("--strict", action="store_true", help="treat audit warnings as failures")

    sp = sub.add_parser("run", help="run one scenario over its seeds")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run a grid and write an aggregate CSV")
    common(sp)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("audit", help="re-run the auditors on a trace file")
    sp.add_argument("trace")
    sp.add_argument("--json", action="store_true")
    common(sp, config=False)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("lemma", help="exhaustive graph-lemma suite")
    sp.add_argument("--max-vertices", type=int, default=6)
    sp.add_argument("--samples", type=int, default=0)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_lemma, strict=False)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
