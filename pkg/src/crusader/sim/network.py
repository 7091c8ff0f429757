"""Deterministic discrete-event asynchronous network with an adaptive adversary.

Every scheduler decision delivers one pending event (an envelope or an input
acquisition), drops an adversary-controlled envelope, or corrupts a party.
Envelopes sent by a party that is honest at send time are "guarded": they
can only be dropped after their sender is corrupted (front-running), and the
fairness guard force-delivers any guarded event that has waited ``K``
adversary decisions.
"""

from __future__ import annotations

import random
from collections import deque
from typing import Any, Optional

from ..params import ProtocolParams
from ..protocols import Msg, Runtime, Services, root_factory
from ..protocols.ba import ORACLE
from ..protocols.base import Multicast, Output, Send, SubInput, Terminate
from .trace import BYZANTINE, HONEST, SERVICE, Trace


class BudgetError(RuntimeError):
    """The adversary tried to corrupt more than t parties."""


class SchedulingError(RuntimeError):
    """The adversary referenced an event that is not pending or may not be dropped."""


class Envelope:
    __slots__ = ("eid", "src", "dst", "path", "msg", "depth", "step", "guarded", "origin",
                 "acquire", "enq", "bucket", "frontrun")

    def __init__(self, eid, src, dst, path, msg, depth, step, guarded, origin, acquire=False):
        self.eid = eid
        self.src = src
        self.dst = dst
        self.path = path
        self.msg = msg
        self.depth = depth
        self.step = step
        self.guarded = guarded
        self.origin = origin
        self.acquire = acquire
        self.enq = step
        self.bucket = 0
        self.frontrun = False

    @property
    def byz(self) -> bool:
        return self.origin == BYZANTINE

    def __repr__(self) -> str:
        if self.acquire:
            return f"Acquire(#{self.eid} P{self.dst})"
        return f"Env(#{self.eid} {self.src}->{self.dst} {'/'.join(self.path)} {self.msg.kind})"


class _Bucket:
    __slots__ = ("items", "pos", "order")

    def __init__(self):
        self.items: list = []
        self.pos: dict = {}
        self.order: deque = deque()


class Pool:
    """Pending events with O(1) add/remove, uniform sampling and oldest-first access per bucket."""

    def __init__(self):
        self.by_eid: dict[int, Envelope] = {}
        self.buckets: dict[int, _Bucket] = {}

    def __len__(self) -> int:
        return len(self.by_eid)

    def __contains__(self, env: Envelope) -> bool:
        return self.by_eid.get(env.eid) is env

    def add(self, env: Envelope, bucket: int = 0) -> None:
        env.bucket = bucket
        self.by_eid[env.eid] = env
        b = self.buckets.get(bucket)
        if b is None:
            b = self.buckets[bucket] = _Bucket()
        b.pos[env.eid] = len(b.items)
        b.items.append(env)
        b.order.append(env)

    def remove(self, env: Envelope) -> None:
        del self.by_eid[env.eid]
        b = self.buckets[env.bucket]
        i = b.pos.pop(env.eid)
        last = b.items.pop()
        if last is not env:
            b.items[i] = last
            b.pos[last.eid] = i

    def move(self, env: Envelope, bucket: int) -> None:
        if env.bucket != bucket:
            self.remove(env)
            self.add(env, bucket)

    def size(self, bucket: int) -> int:
        b = self.buckets.get(bucket)
        return len(b.items) if b else 0

    def oldest(self, bucket: Optional[int] = None) -> Optional[Envelope]:
        if bucket is None:
            best = None
            for k in sorted(self.buckets):
                e = self.oldest(k)
                if e is not None and (best is None or e.eid < best.eid):
                    best = e
            return best
        b = self.buckets.get(bucket)
        if b is None:
            return None
        order = b.order
        while order:
            e = order[0]
            if self.by_eid.get(e.eid) is e and e.bucket == bucket:
                return e
            order.popleft()
        return None

    def sample(self, rng: random.Random, bucket: Optional[int] = None) -> Optional[Envelope]:
        if bucket is None:
            if not self.by_eid:
                return None
            total = len(self.by_eid)
            r = rng.randrange(total)
            for k in sorted(self.buckets):
                items = self.buckets[k].items
                if r < len(items):
                    return items[r]
                r -= len(items)
            return None  # pragma: no cover
        b = self.buckets.get(bucket)
        if b is None or not b.items:
            return None
        return b.items[rng.randrange(len(b.items))]

    def all(self) -> list[Envelope]:
        return sorted(self.by_eid.values(), key=lambda e: e.eid)


class _ShadowServices(Services):
    """Services for byzantine shadow machines: the real coin, no oracle access."""

    def __init__(self, sim: "Simulation"):
        self.sim = sim

    def coin(self, path, rnd):
        return self.sim.coin(path, rnd)

    def oracle_submit(self, path, pid, bit):
        return None


class Simulation(Services):
    def __init__(self, params: ProtocolParams, protocol: str, inputs: dict,
                 strategy, seed: int = 0, fairness_K: Optional[int] = None,
                 event_cap: Optional[int] = None, ca_backend: str = "CA1",
                 ba_backend: str = "oracle", oracle_rule: str = "all",
                 oracle_tiebreak: int = 0, check_params: bool = True):
        if check_params:
            params.require(protocol, ca_backend)
        self.params = params
        self.n, self.t = params.n, params.t
        self.protocol = protocol.upper()
        self.ca_backend = ca_backend.upper()
        self.ba_backend = ba_backend
        self.seed = seed
        self.K = fairness_K if fairness_K is not None else 16 * self.n * self.n
        self.event_cap = event_cap if event_cap is not None else 200 * self.n * self.n * 50
        self.oracle_rule = oracle_rule
        self.oracle_tiebreak = oracle_tiebreak
        self.factory = root_factory(self.protocol, self.ca_backend, ba_backend)
        self.parties: dict[int, Runtime] = {}
        for pid in range(1, self.n + 1):
            rt = Runtime(pid, params, random.Random(f"{seed}/party/{pid}"), services=self)
            rt.install(self.factory)
            self.parties[pid] = rt
        self.inputs = dict(inputs)
        self.corrupted: dict[int, int] = {}
        self.behaviors: dict = {}
        self.pending = Pool()
        self.decisions = 0
        self._eid = 0
        self._guard: deque = deque()
        self._timed = sorted(
            ((spec[1] if isinstance(spec, tuple) else 0, pid, spec[0] if isinstance(spec, tuple) else spec)
             for pid, spec in self.inputs.items() if spec is not None),
            key=lambda x: (x[0], x[1]))
        self._timed = deque(self._timed)
        self._depth = 0
        self._coins: dict = {}
        self._oracles: dict = {}
        self.shadow_services = _ShadowServices(self)
        self.strategy = strategy
        self.trace = Trace({
            "protocol": self.protocol, "n": self.n, "t": self.t, "ell": params.ell, "lam": params.lam,
            "eps": None if params.eps is None else str(params.eps), "seed": seed,
            "strategy": getattr(strategy, "label", type(strategy).__name__),
            "fairness_K": self.K, "ca_backend": self.ca_backend, "ba_backend": ba_backend,
            "root": self.root_path,
        })
        strategy.attach(self)

    @property
    def root_path(self) -> tuple:
        return (self.protocol.lower(),)

    # -- public API for strategies and behaviors ------------------------------

    def is_honest(self, pid: int) -> bool:
        return pid not in self.corrupted

    def honest_parties(self) -> list[int]:
        return [p for p in range(1, self.n + 1) if p not in self.corrupted]

    def machine(self, pid: int, path: tuple):
        """Full-information read access to an honest party's instance."""
        return self.parties[pid].machines.get(path)

    def input_of(self, pid: int):
        spec = self.inputs.get(pid)
        return spec[0] if isinstance(spec, tuple) else spec

    def corrupt(self, pid: int, behavior) -> None:
        if pid in self.corrupted:
            return
        if len(self.corrupted) >= self.t:
            raise BudgetError(f"corruption budget t={self.t} exhausted")
        self.corrupted[pid] = self.decisions
        self.trace.add(("corrupt", self.decisions, pid, getattr(behavior, "name", type(behavior).__name__)))
        for env in self.pending.all():
            if env.src == pid and env.guarded and not env.acquire and env.origin == HONEST:
                env.guarded = False
                env.frontrun = True
                self.pending.move(env, self.strategy.classify(env))
            elif env.acquire and env.dst == pid:
                env.guarded = False
        self.behaviors[pid] = behavior
        behavior.attach(self, pid)
        behavior.on_corrupt()
        for path in list(self._oracles):
            self._oracle_check(path)

    def byz_send(self, src: int, dst: int, path: tuple, msg: Msg) -> None:
        if src not in self.corrupted:
            raise SchedulingError(f"party {src} is honest")
        self._enqueue(src, dst, path, msg, self._depth + 1, BYZANTINE)

    def shadow_runtime(self, pid: int, tag: str) -> Runtime:
        rt = Runtime(pid, self.params, random.Random(f"{self.seed}/byz/{pid}/{tag}"), services=self.shadow_services)
        rt.install(self.factory)
        return rt

    # -- services -------------------------------------------------------------

    def coin(self, path: tuple, rnd: int) -> int:
        key = (path, rnd)
        bit = self._coins.get(key)
        if bit is None:
            bit = random.Random(f"{self.seed}/coin/{'/'.join(path)}/{rnd}").getrandbits(1)
            self._coins[key] = bit
            self.trace.add(("coin", self.decisions, path, rnd, bit))
        return bit

    def revealed_coins(self) -> dict:
        return dict(self._coins)

    def oracle_submit(self, path: tuple, pid: int, bit: int) -> None:
        if pid in self.corrupted:
            return
        st = self._oracles.setdefault(path, {"inputs": {}, "decided": None})
        st["inputs"].setdefault(pid, bit)
        self._oracle_check(path)

    def _oracle_check(self, path: tuple) -> None:
        st = self._oracles[path]
        if st["decided"] is not None:
            return
        honest = self.honest_parties()
        got = {p: b for p, b in st["inputs"].items() if p not in self.corrupted}
        if self.oracle_rule == "quorum":
            ready = len(got) >= self.n - self.t
        else:
            ready = all(p in got for p in honest)
        if not ready or not got:
            return
        vals = set(got.values())
        bit = vals.pop() if len(vals) == 1 else self.oracle_tiebreak
        st["decided"] = bit
        self.trace.add(("oracle", self.decisions, path, bit))
        for dst in range(1, self.n + 1):
            self._enqueue(ORACLE, dst, path, Msg("DECIDED", bit, 1), self._depth + 1, SERVICE)

    # -- core loop ------------------------------------------------------------

    def _next_eid(self) -> int:
        self._eid += 1
        return self._eid

    def _enqueue(self, src, dst, path, msg, depth, origin) -> None:
        eid = self._next_eid()
        guarded = origin != BYZANTINE
        env = Envelope(eid, src, dst, path, msg, depth, self.decisions, guarded, origin)
        self.trace.record_send(eid, self.decisions, src, dst, path, msg, depth, origin)
        self.pending.add(env, self.strategy.classify(env))
        if guarded:
            self._guard.append(env)

    def _release_due(self) -> None:
        timed = self._timed
        while timed and timed[0][0] <= self.decisions:
            _, pid, value = timed.popleft()
            env = Envelope(self._next_eid(), pid, pid, None, value, 0, self.decisions,
                           pid not in self.corrupted, HONEST, acquire=True)
            self.pending.add(env, self.strategy.classify(env))
            if env.guarded:
                self._guard.append(env)

    def _overdue(self) -> Optional[Envelope]:
        g = self._guard
        while g:
            env = g[0]
            if env.guarded and env in self.pending:
                if self.decisions - env.enq >= self.K:
                    return env
                return None
            g.popleft()
        return None

    def _apply(self, pid: int, acts: list, depth: int) -> None:
        n = self.n
        for a in acts:
            if isinstance(a, Multicast):
                for dst in range(1, n + 1):
                    self._enqueue(pid, dst, a.path, a.msg, depth + 1, HONEST)
            elif isinstance(a, Send):
                self._enqueue(pid, a.dst, a.path, a.msg, depth + 1, HONEST)
            elif isinstance(a, Output):
                self.trace.add(("output", self.decisions, pid, a.path, a.value))
            elif isinstance(a, SubInput):
                self.trace.add(("subinput", self.decisions, pid, a.path, a.value))
            elif isinstance(a, Terminate):
                self.trace.add(("terminate", self.decisions, pid, a.path))

    def deliver(self, env: Envelope) -> None:
        if env not in self.pending:
            raise SchedulingError(f"{env!r} is not pending")
        self.pending.remove(env)
        if env.guarded:
            wait = self.decisions - env.enq
            if wait > self.trace.max_deferral:
                self.trace.max_deferral = wait
        if env.acquire:
            pid = env.dst
            honest = pid not in self.corrupted
            self.trace.add(("acquire", self.decisions, pid, env.msg, honest))
            self._depth = 0
            if honest:
                self._apply(pid, self.parties[pid].acquire(env.msg), 0)
            else:
                self.behaviors[pid].on_acquire(env.msg)
            return
        if env.origin == BYZANTINE and env.src in self.behaviors:
            msg = self.behaviors[env.src].rewrite(env)
            if msg is not env.msg:
                env.msg = msg
                self.trace.add(("rewrite", env.eid, self.decisions, msg.value))
        self.trace.add(("deliver", env.eid, self.decisions))
        if env.origin != BYZANTINE and env.depth > self.trace.causal_depth:
            self.trace.causal_depth = env.depth
        self._depth = env.depth
        dst = env.dst
        if dst in self.corrupted:
            self.behaviors[dst].on_message(env)
        else:
            self._apply(dst, self.parties[dst].deliver(env.src, env.path, env.msg), env.depth)

    def drop(self, env: Envelope) -> None:
        if env not in self.pending:
            raise SchedulingError(f"{env!r} is not pending")
        if env.guarded:
            raise SchedulingError(f"{env!r} is from an honest sender and cannot be dropped")
        self.pending.remove(env)
        self.trace.add(("drop", env.eid, self.decisions))

    def run(self) -> Trace:
        self._release_due()
        self.strategy.setup()
        while True:
            self._release_due()
            if not self.pending:
                if self._timed:
                    self.decisions = self._timed[0][0]
                    continue
                self.trace.quiescent = True
                break
            if self.decisions >= self.event_cap:
                self.trace.capped = True
                break
            env = self._overdue()
            if env is not None:
                # forced deliveries are the network's doing, not an adversary decision
                self.deliver(env)
                continue
            self.strategy.step()
            self.decisions += 1
        self.trace.decisions = self.decisions
        self.trace.meta["coins"] = {f"{'/'.join(p)}#{r}": b for (p, r), b in sorted(self._coins.items())}
        return self.trace
