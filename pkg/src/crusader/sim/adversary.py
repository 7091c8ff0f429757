"""Named adversary strategies and byzantine behaviors.

A strategy owns scheduling: it picks which pending event to deliver, may
drop envelopes the network allows it to drop, and decides whom to corrupt and
with which behavior.  A behavior scripts a corrupted party.  Most behaviors
drive one or two "shadow" copies of the honest protocol so that byzantine
traffic is well-formed enough to interact with the protocol logic.
"""

from __future__ import annotations

import random
from typing import Optional

from ..protocols.base import BOT, Msg, Multicast, Send
from .network import Envelope

BYZ_BUCKET, FAST, SLOW = 0, 1, 2


def _order(v) -> tuple:
    return (0, v) if isinstance(v, int) else (1, repr(v))


# -- behaviors ----------------------------------------------------------------

class Behavior:
    name = "behavior"

    def attach(self, sim, pid: int) -> None:
        self.sim = sim
        self.pid = pid
        self.rng = random.Random(f"{sim.seed}/behavior/{pid}/{self.name}")

    def on_corrupt(self) -> None:
        pass

    def on_acquire(self, value) -> None:
        pass

    def on_message(self, env: Envelope) -> None:
        pass

    def rewrite(self, env: Envelope) -> Msg:
        return env.msg

    def _emit(self, acts: list, dsts=None) -> None:
        """Send the actions of a shadow runtime to ``dsts`` (default: all honest)."""
        sim = self.sim
        for a in acts:
            if isinstance(a, Multicast):
                targets = range(1, sim.n + 1) if dsts is None else dsts
                for dst in targets:
                    if sim.is_honest(dst):
                        self.send(dst, a.path, a.msg)
            elif isinstance(a, Send):
                if sim.is_honest(a.dst) and (dsts is None or a.dst in dsts):
                    self.send(a.dst, a.path, a.msg)

    def send(self, dst: int, path: tuple, msg: Msg) -> None:
        self.sim.byz_send(self.pid, dst, path, msg)


class Silent(Behavior):
    """Crash: never sends anything again."""

    name = "silent"


class Shadow(Behavior):
    """Runs the honest protocol on the party's own input (or ``alt`` if given)."""

    name = "shadow"

    def __init__(self, alt=None):
        self.alt = alt

    def on_corrupt(self) -> None:
        self.rt = self.sim.shadow_runtime(self.pid, self.name)

    def on_acquire(self, value) -> None:
        v = self.alt if self.alt is not None else value
        self.emit(self.rt.acquire(v))

    def on_message(self, env: Envelope) -> None:
        self.emit(self.rt.deliver(env.src, env.path, env.msg))

    def emit(self, acts: list) -> None:
        self._emit(acts)


def garble(value, bits: int, rng: random.Random):
    """A different value of the same shape."""
    if value is None:
        return None
    if isinstance(value, bool):
        return not value
    if isinstance(value, int):
        width = max(bits, 1)
        if value in (0, 1) and bits <= 2:
            return value ^ 1
        return (value ^ rng.randrange(1, 1 << width)) & ((1 << max(width, value.bit_length())) - 1)
    if isinstance(value, bytes):
        if not value:
            return value
        out = bytes(rng.getrandbits(8) for _ in value)
        return out if out != value else bytes([value[0] ^ 1]) + value[1:]
    if isinstance(value, tuple):
        if len(value) == 2 and isinstance(value[0], int) and not isinstance(value[1], bytes):
            return (value[0], garble(value[1], 1, rng))  # keep BA round numbers
        return tuple(garble(x, bits // max(len(value), 1), rng) for x in value)
    return value


class Equivocate(Shadow):
    """Honest-looking traffic, but each message is garbled for a random half of its recipients."""

    name = "equivocate"

    def emit(self, acts: list) -> None:
        sim = self.sim
        for a in acts:
            if isinstance(a, Multicast):
                dsts = [d for d in range(1, sim.n + 1) if sim.is_honest(d)]
                self.rng.shuffle(dsts)
                half = set(dsts[: len(dsts) // 2])
                for d in sorted(dsts):
                    msg = a.msg
                    if d in half:
                        msg = Msg(msg.kind, garble(msg.value, msg.bits, self.rng), msg.bits)
                    self.send(d, a.path, msg)
            elif isinstance(a, Send) and sim.is_honest(a.dst):
                msg = a.msg
                if self.rng.random() < 0.5:
                    msg = Msg(msg.kind, garble(msg.value, msg.bits, self.rng), msg.bits)
                self.send(a.dst, a.path, msg)


class Chameleon(Behavior):
    """Two shadows with different inputs; each side of a partition only hears one of them."""

    name = "chameleon"

    def __init__(self, value_a, value_b, group_a: set):
        self.values = (value_a, value_b)
        self.group_a = set(group_a)

    def on_corrupt(self) -> None:
        sim = self.sim
        self.rts = (sim.shadow_runtime(self.pid, "a"), sim.shadow_runtime(self.pid, "b"))
        self.groups = (self.group_a, set(range(1, sim.n + 1)) - self.group_a)

    def on_acquire(self, value) -> None:
        for rt, v, g in zip(self.rts, self.values, self.groups):
            self._emit(rt.acquire(v), g)

    def on_message(self, env: Envelope) -> None:
        for rt, g in zip(self.rts, self.groups):
            self._emit(rt.deliver(env.src, env.path, env.msg), g)


class Spam(Shadow):
    """Floods every instance's bot-like messages first, then behaves like a shadow."""

    name = "spam"

    def on_corrupt(self) -> None:
        super().on_corrupt()
        for path in sorted(self.rt.machines):
            for msg in self.rt.machines[path].spam():
                for dst in range(1, self.sim.n + 1):
                    if self.sim.is_honest(dst):
                        self.send(dst, path, msg)


class Forger(Shadow):
    """Shadow on an alternative input that forges matching payloads.

    For every instance kind with a notion of "matching" (hashes, symbols, SUC),
    the shadow's own message is suppressed; instead each honest receiver gets
    exactly the payload it would accept, sent as soon as the receiver can
    recognise one.  Any byzantine payload still in flight is rewritten at
    delivery time the same way.
    """

    name = "forger"

    def on_corrupt(self) -> None:
        super().on_corrupt()
        sim = self.sim
        self.todo = []
        for path in sorted(self.rt.machines):
            m = self.rt.machines[path]
            for kind in sorted(m.kinds):
                if m.forge_bits(kind) is not None:
                    for dst in range(1, sim.n + 1):
                        if sim.is_honest(dst):
                            self.todo.append((dst, path, kind))
        self.forged = {(path, kind) for _, path, kind in self.todo}
        self.poll()

    def emit(self, acts: list) -> None:
        keep = [a for a in acts if not (isinstance(a, (Multicast, Send)) and (a.path, a.msg.kind) in self.forged)]
        self._emit(keep)

    def on_acquire(self, value) -> None:
        super().on_acquire(value)
        self.poll()

    def on_message(self, env: Envelope) -> None:
        super().on_message(env)
        self.poll()

    def poll(self) -> None:
        sim = self.sim
        left = []
        for item in self.todo:
            dst, path, kind = item
            m = sim.machine(dst, path) if sim.is_honest(dst) else None
            v = m.matching_value(self.pid, kind) if m is not None and not m.halted else None
            if v is None:
                if m is not None and not m.halted:
                    left.append(item)
                continue
            self.send(dst, path, Msg(kind, v, m.forge_bits(kind)))
        self.todo = left

    def rewrite(self, env: Envelope) -> Msg:
        if not self.sim.is_honest(env.dst):
            return env.msg
        m = self.sim.machine(env.dst, env.path)
        if m is None:
            return env.msg
        v = m.matching_value(self.pid, env.msg.kind)
        if v is None or v == env.msg.value:
            return env.msg
        return Msg(env.msg.kind, v, env.msg.bits)


# -- strategies ---------------------------------------------------------------

class Strategy:
    label = "strategy"
    corrupts_at_start = False

    default_pick = "random"

    def __init__(self, byzantine: Optional[list] = None, count: Optional[int] = None,
                 pick: Optional[str] = None):
        self.byzantine = byzantine
        self.count = count
        self.pick = pick or self.default_pick
        if self.pick not in ("random", "balance"):
            raise ValueError(f"unknown pick rule {self.pick!r}")

    def attach(self, sim) -> None:
        self.sim = sim
        self.rng = random.Random(f"{sim.seed}/adversary/{self.label}")

    def classify(self, env: Envelope) -> int:
        return FAST

    def setup(self) -> None:
        if self.corrupts_at_start:
            for pid in self.victims():
                self.sim.corrupt(pid, self.behavior(pid))

    def victims(self) -> list[int]:
        sim = self.sim
        if self.byzantine is not None:
            return sorted(self.byzantine)
        k = sim.t if self.count is None else self.count
        if self.pick == "balance":
            # corrupt from the currently largest input class, so that as many
            # honest classes as possible stay large
            classes: dict = {}
            for pid in range(1, sim.n + 1):
                classes.setdefault(sim.input_of(pid), []).append(pid)
            out = []
            for _ in range(k):
                key = max(classes, key=lambda v: (len(classes[v]), _order(v)))
                out.append(classes[key].pop(self.rng.randrange(len(classes[key]))))
            return sorted(out)
        return sorted(self.rng.sample(range(1, sim.n + 1), k))

    def behavior(self, pid: int) -> Behavior:
        return Silent()

    def step(self) -> None:
        env = self.sim.pending.sample(self.rng)
        self.sim.deliver(env)

    # helpers for behaviors that need to know what honest parties hold
    def input_classes(self) -> tuple:
        sim = self.sim
        byz = set(self.victims_cache)
        counts: dict = {}
        for pid in range(1, sim.n + 1):
            v = sim.input_of(pid)
            if pid in byz or v is None:
                continue
            counts[v] = counts.get(v, 0) + 1
        ranked = sorted(counts, key=lambda v: (-counts[v], _order(v)))
        if not ranked:
            return 0, 1
        a = ranked[0]
        b = ranked[1] if len(ranked) > 1 else a ^ 1
        return a, b


class Fifo(Strategy):
    """Deliver in send order; nobody is corrupted."""

    label = "fifo"

    def step(self) -> None:
        self.sim.deliver(self.sim.pending.oldest())


class RandomFair(Strategy):
    """Uniformly random delivery order; nobody is corrupted."""

    label = "random-fair"


class Crash(Strategy):
    """t parties are silent from the start."""

    label = "crash"
    corrupts_at_start = True


class SplitBrain(Strategy):
    """Partition the honest parties into two halves; byzantine parties show each half a
    different input, and traffic into the slow half is deferred as long as fairness allows."""

    label = "split-brain"
    corrupts_at_start = True

    def setup(self) -> None:
        sim = self.sim
        self.victims_cache = self.victims()
        honest = [p for p in range(1, sim.n + 1) if p not in self.victims_cache]
        self.rng.shuffle(honest)
        self.slow = set(honest[: len(honest) // 2])
        self.a, self.b = self.input_classes()
        super().setup()
        for env in sim.pending.all():
            sim.pending.move(env, self.classify(env))

    def victims(self) -> list[int]:
        if getattr(self, "victims_cache", None) is not None:
            return self.victims_cache
        return super().victims()

    def behavior(self, pid: int) -> Behavior:
        return Chameleon(self.a, self.b, set(range(1, self.sim.n + 1)) - self.slow)

    def classify(self, env: Envelope) -> int:
        return SLOW if env.dst in getattr(self, "slow", ()) and not env.acquire else FAST

    def step(self) -> None:
        pool = self.sim.pending
        env = pool.sample(self.rng, FAST) or pool.oldest(SLOW)
        self.sim.deliver(env)


class Equivocator(Strategy):
    label = "equivocator"
    corrupts_at_start = True

    def behavior(self, pid: int) -> Behavior:
        return Equivocate()


class BotSpammer(Strategy):
    """Byzantine parties flood ⊥-like messages, which are delivered before anything else."""

    label = "bot-spammer"
    corrupts_at_start = True

    def behavior(self, pid: int) -> Behavior:
        return Spam()

    def classify(self, env: Envelope) -> int:
        return BYZ_BUCKET if env.byz else FAST

    def step(self) -> None:
        pool = self.sim.pending
        env = pool.oldest(BYZ_BUCKET) or pool.sample(self.rng, FAST)
        self.sim.deliver(env)


class FrontRunner(Strategy):
    """Random delivery; at random moments corrupts an honest party with envelopes in
    flight and drops each of them with probability 1/2.  Corrupted parties go silent."""

    label = "front-runner"

    def __init__(self, rate: float = 0.02, **kw):
        super().__init__(**kw)
        self.rate = rate

    def step(self) -> None:
        sim = self.sim
        budget = (sim.t if self.count is None else min(self.count, sim.t)) - len(sim.corrupted)
        if budget > 0 and self.rng.random() < self.rate:
            senders = sorted({e.src for e in sim.pending.by_eid.values()
                              if not e.acquire and e.guarded and 1 <= e.src <= sim.n and sim.is_honest(e.src)})
            if self.byzantine is not None:
                senders = [p for p in senders if p in self.byzantine]
            if senders:
                pid = self.rng.choice(senders)
                sim.corrupt(pid, Silent())
                for e in sim.pending.all():
                    if e.src == pid and e.frontrun and self.rng.random() < 0.5:
                        sim.drop(e)
                return
        super().step()


class CollisionSeeker(Strategy):
    """Byzantine parties run the protocol on an honest minority input and rewrite each
    payload to whatever the receiver would accept as matching.  Traffic between
    honest parties with equal inputs (and all byzantine traffic) is delivered
    first, so that every input class gets as far as it can on its own before
    disagreement arrives."""

    label = "collision-seeker"
    corrupts_at_start = True
    default_pick = "balance"

    def setup(self) -> None:
        self.victims_cache = self.victims()
        self.a, self.b = self.input_classes()
        super().setup()
        for env in self.sim.pending.all():
            self.sim.pending.move(env, self.classify(env))

    def classify(self, env: Envelope) -> int:
        if env.acquire or env.byz or env.src == env.dst:
            return FAST
        sim = self.sim
        return FAST if sim.input_of(env.src) == sim.input_of(env.dst) else SLOW

    def step(self) -> None:
        pool = self.sim.pending
        env = pool.sample(self.rng, FAST) or pool.oldest(SLOW)
        self.sim.deliver(env)

    def victims(self) -> list[int]:
        if getattr(self, "victims_cache", None) is not None:
            return self.victims_cache
        return super().victims()

    def behavior(self, pid: int) -> Behavior:
        return Forger(alt=self.b)


_CATALOG = {cls.label: cls for cls in (
    Fifo, RandomFair, Crash, SplitBrain, Equivocator, BotSpammer, FrontRunner, CollisionSeeker)}


def strategy_catalog() -> dict:
    """Name -> strategy class."""
    return dict(_CATALOG)


def make_strategy(name: str, **kw) -> Strategy:
    try:
        cls = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown adversary strategy {name!r}; known: {', '.join(sorted(_CATALOG))}") from None
    return cls(**kw)
