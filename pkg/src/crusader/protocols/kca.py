"""Perfectly secure ceil(8/sigma)-crusader agreement: one symbol exchange round, then one success-indicator round."""

from __future__ import annotations

from ..ecc import rs_code
from .base import BOT, Machine, Msg


class Kca(Machine):
    name = "KCA"
    kinds = frozenset({"SYM", "SUC"})

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.delta = self.params.kca_delta
        self.code = rs_code(self.n, self.delta, self.params.ell)
        self.a = self.code.symbol_bits
        self.M0: set = set()
        self.M1: set = set()
        self.S0: set = set()
        self.S1: set = set()
        self.sent_suc = None

    def on_input(self, value) -> None:
        self.value = value
        self.symbols = s = self.code.encode(value)
        me = s[self.pid - 1]
        for j in range(1, self.n + 1):
            self.send(j, "SYM", (me, s[j - 1]), 2 * self.a)
        self.become_ready()

    def on_message(self, src: int, msg: Msg) -> None:
        n, t = self.n, self.t
        if msg.kind == "SYM":
            if src in self.M0 or src in self.M1:
                return
            if msg.value == (self.symbols[src - 1], self.symbols[self.pid - 1]):
                self.M1.add(src)
            else:
                self.M0.add(src)
            if len(self.M1) == n - 2 * t and len(self.M0) < t + 1 and self.sent_suc is None:
                self.sent_suc = 1
                self.multicast("SUC", 1, 1)
            if len(self.M0) == t + 1 and len(self.M1) < n - 2 * t and self.sent_suc is None:
                self.sent_suc = 0
                self.multicast("SUC", 0, 1)
        else:
            if src in self.S0 or src in self.S1 or msg.value not in (0, 1):
                return
            (self.S1 if msg.value == 1 else self.S0).add(src)
        self._check()

    def _check(self) -> None:
        if self.outputs:
            return
        if len(self.M1 & self.S1) >= self.n - 2 * self.t:
            self.output(self.value)
        elif len(self.M0 | self.S0) >= self.t + 1:
            self.output(BOT)

    def matching_value(self, src: int, kind: str):
        if not self.has_input:
            return None
        if kind == "SYM":
            return (self.symbols[src - 1], self.symbols[self.pid - 1])
        if kind == "SUC":
            return 1
        return None

    def forge_bits(self, kind: str):
        return {"SYM": 2 * self.a, "SUC": 1}.get(kind)

    def spam(self) -> list:
        return [Msg("SUC", 0, 1)]
