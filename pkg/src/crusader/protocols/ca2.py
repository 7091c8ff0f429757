"""Perfectly secure crusader agreement: KCA pre-processing, symbol checks, REC and PRA."""

from __future__ import annotations

from ..ecc import rs_code
from .base import BOT, Machine, Msg
from .ca1 import CoreSets
from .kca import Kca
from .pra import Pra
from .rec import Rec


class Ca2(CoreSets, Machine):
    name = "CA2"
    kinds = frozenset({"SYM", "BOT"})

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.kca = self.child("kca", Kca)
        self.rec = self.child("rec", Rec)
        self.pra = self.child("pra", Pra)
        self.delta = self.params.ca2_delta
        self.code = rs_code(self.n, self.delta, self.params.ell)
        self.a = self.code.symbol_bits
        self.z = BOT
        self.kca_done = False
        self.ignore = False
        self.seen_sym: set = set()
        self._early: list = []

    def on_input(self, value) -> None:
        self.value = value
        self.input_child("kca", value)

    def on_child_output(self, label: str, value) -> None:
        if label == "kca":
            self._on_kca(value)
        elif label == "rec":
            # Also for parties whose KCA output is bot: otherwise PRA can lack
            # the n-t matching symbols it needs when few parties hold z*.
            if self.kca_done:
                self.input_child("pra", value)
            else:
                self._early.append(value)
        elif label == "pra":
            self.output_once(value)

    def _on_kca(self, z) -> None:
        self.kca_done = True
        self.z = z
        if z is BOT:
            self.multicast("SYM", BOT, 1)
            self.multicast("BOT", BOT, 1)
            self.sent_bot = True
            self.output_once(BOT)
            self._buffer = []  # the rest of the protocol runs only for z != bot
            self.ignore = True
            self.ready = True
        else:
            self.init_sets(z)
            self.symbols = self.code.encode(z)
            self.multicast("SYM", self.symbols[self.pid - 1], self.a)
            self.become_ready()
        for y in self._early:
            self.input_child("pra", y)
        self._early = []

    def on_message(self, src: int, msg: Msg) -> None:
        if self.ignore:
            return
        if msg.kind == "BOT":
            self.add_bot(src)
            return
        if src == self.pid or src in self.seen_sym:
            return
        self.seen_sym.add(src)
        if msg.value is not BOT and msg.value == self.symbols[src - 1]:
            self.add_match(src)
        else:
            self.add_mismatch(src)

    def matching_value(self, src: int, kind: str):
        if self.ready and not self.ignore and kind == "SYM":
            return self.symbols[src - 1]
        return None

    def forge_bits(self, kind: str):
        return self.a if kind == "SYM" else None

    def spam(self) -> list:
        return [Msg("SYM", BOT, 1), Msg("BOT", BOT, 1)]
