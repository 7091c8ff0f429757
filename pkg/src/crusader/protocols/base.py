"""Per-party protocol state machines.

Each party owns a :class:`Runtime` holding a tree of :class:`Machine`
instances addressed by instance paths such as ``("ext", "ca", "core", "rec")``.
The runtime is driven by two external events (input acquisition and message
delivery) and returns the resulting actions.  Sub-protocol outputs and inputs
are handled inside the runtime through a FIFO queue, so handlers never
re-enter each other.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple, Optional

BOT = None  # the bot value; also "no value yet"

Path = tuple


class ProtocolError(RuntimeError):
    """A protocol contract was violated (double input, double output where forbidden)."""


@dataclass(frozen=True)
class Msg:
    kind: str
    value: Any
    bits: int


class Send(NamedTuple):
    dst: int
    path: Path
    msg: Msg


class Multicast(NamedTuple):
    path: Path
    msg: Msg


class Output(NamedTuple):
    path: Path
    value: Any


class Terminate(NamedTuple):
    path: Path


class SubInput(NamedTuple):
    path: Path
    value: Any


class Services:
    """Simulator-provided services; the defaults make a runtime usable standalone."""

    def coin(self, path: Path, rnd: int) -> int:
        return random.Random(f"coin/{'/'.join(path)}/{rnd}").getrandbits(1)

    def oracle_submit(self, path: Path, pid: int, bit: int) -> None:
        raise ProtocolError("no oracle BA service attached")


class Runtime:
    def __init__(self, pid: int, params, rng: Optional[random.Random] = None,
                 services: Optional[Services] = None):
        self.pid = pid
        self.params = params
        self.n = params.n
        self.t = params.t
        self.rng = rng if rng is not None else random.Random(pid)
        self.services = services if services is not None else Services()
        self.machines: dict[Path, Machine] = {}
        self.root: Optional[Machine] = None
        self._queue: deque = deque()
        self._actions: list = []

    def install(self, factory: Callable[["Runtime"], "Machine"]) -> "Machine":
        self.root = factory(self)
        return self.root

    # -- external events ----------------------------------------------------

    def acquire(self, value) -> list:
        self._post(self.root, self.root._input, value)
        return self._run()

    def deliver(self, src: int, path: Path, msg: Msg) -> list:
        m = self.machines.get(path)
        if m is not None and not m.halted:
            self._post(m, m._message, src, msg)
        return self._run()

    # -- internals ----------------------------------------------------------

    def _post(self, machine: "Machine", fn, *args) -> None:
        self._queue.append((machine, fn, args))

    def _run(self) -> list:
        q = self._queue
        while q:
            machine, fn, args = q.popleft()
            if not machine.halted:
                fn(*args)
        out, self._actions = self._actions, []
        return out


class Machine:
    """Base protocol instance.

    Subclasses override ``on_input``, ``on_message`` and ``on_child_output``.
    With ``wait_for_input`` set, messages delivered before the input is
    acquired are buffered and replayed in arrival order afterwards.
    """

    name = "machine"
    kinds: frozenset = frozenset()
    wait_for_input = True

    def __init__(self, rt: Runtime, path: Path):
        self.rt = rt
        self.path = path
        self.pid = rt.pid
        self.n = rt.n
        self.t = rt.t
        self.params = rt.params
        self.parent: Optional[Machine] = None
        self.children: dict[str, Machine] = {}
        self.halted = False
        self.has_input = False
        self.ready = not self.wait_for_input
        self.outputs: list = []
        self._buffer: list = []
        rt.machines[path] = self

    def child(self, label: str, factory: Callable[[Runtime, Path], "Machine"]) -> "Machine":
        m = factory(self.rt, self.path + (label,))
        m.parent = self
        self.children[label] = m
        return m

    # -- actions ------------------------------------------------------------

    def send(self, dst: int, kind: str, value, bits: int) -> None:
        self.rt._actions.append(Send(dst, self.path, Msg(kind, value, bits)))

    def multicast(self, kind: str, value, bits: int) -> None:
        self.rt._actions.append(Multicast(self.path, Msg(kind, value, bits)))

    def output(self, value) -> None:
        self.outputs.append(value)
        self.rt._actions.append(Output(self.path, value))
        if self.parent is not None:
            label = self.path[-1]
            self.rt._post(self.parent, self.parent.on_child_output, label, value)

    @property
    def has_output(self) -> bool:
        return bool(self.outputs)

    def output_once(self, value) -> None:
        if not self.outputs:
            self.output(value)

    def terminate(self) -> None:
        self.rt._actions.append(Terminate(self.path))
        self._halt()

    def _halt(self) -> None:
        self.halted = True
        for c in self.children.values():
            c._halt()

    def input_child(self, label: str, value) -> None:
        c = self.children[label]
        self.rt._actions.append(SubInput(c.path, value))
        self.rt._post(c, c._input, value)

    # -- event plumbing -----------------------------------------------------

    def _input(self, value) -> None:
        if self.has_input:
            raise ProtocolError(f"second input to {'/'.join(self.path)} at party {self.pid}")
        self.has_input = True
        self.on_input(value)

    def _message(self, src: int, msg: Msg) -> None:
        if not isinstance(msg, Msg) or msg.kind not in self.kinds:
            return
        if not self.ready:
            self._buffer.append((src, msg))
            return
        self.on_message(src, msg)

    def become_ready(self) -> None:
        """Start handling messages, replaying the ones that arrived early."""
        self.ready = True
        buf, self._buffer = self._buffer, []
        for src, msg in buf:
            if self.halted:
                break
            self.on_message(src, msg)

    # -- overridables -------------------------------------------------------

    def on_input(self, value) -> None:
        pass

    def on_message(self, src: int, msg: Msg) -> None:
        pass

    def on_child_output(self, label: str, value) -> None:
        pass

    # Full-information hooks used by adversaries and auditors, never by protocols.

    def matching_value(self, src: int, kind: str):
        """The payload this party would count as matching from ``src``, or None if unknown."""
        return None

    def spam(self) -> list:
        """Bot-like messages a byzantine party may flood for this instance."""
        return []

    def forge_bits(self, kind: str):
        """Payload size of ``kind`` when ``matching_value`` can produce it, else None."""
        return None
