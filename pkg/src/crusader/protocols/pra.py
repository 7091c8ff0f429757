"""Perfectly secure reliable agreement: exchange symbols of Enc_{n-3t}(v_i)."""

from __future__ import annotations

from ..ecc import rs_code
from .base import Machine, Msg


class Pra(Machine):
    name = "PRA"
    kinds = frozenset({"SYM"})

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.code = rs_code(self.n, self.n - 3 * self.t, self.params.ell)
        self.a = self.code.symbol_bits
        self.seen: set = set()

    def on_input(self, value) -> None:
        self.value = value
        self.A = {self.pid}
        self.symbols = self.code.encode(value)
        self.multicast("SYM", self.symbols[self.pid - 1], self.a)
        self._check()
        self.become_ready()

    def on_message(self, src: int, msg: Msg) -> None:
        if src == self.pid or src in self.seen:
            return
        self.seen.add(src)
        if msg.value == self.symbols[src - 1]:
            self.A.add(src)
            self._check()

    def _check(self) -> None:
        if len(self.A) == self.n - self.t and not self.outputs:
            self.output(self.value)

    def matching_value(self, src: int, kind: str):
        if self.has_input and kind == "SYM":
            return self.symbols[src - 1]
        return None

    def forge_bits(self, kind: str):
        return self.a if kind == "SYM" else None
