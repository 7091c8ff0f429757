"""Statistically secure crusader agreement built on hash checks, REC and SRA."""

from __future__ import annotations

from .. import auh
from .base import BOT, Machine, Msg
from .rec import Rec
from .sra import HashExchange, Sra


class CoreSets:
    """The A/B/C bookkeeping shared by CA1 and CA2.

    A holds parties that sent a matching check value, B non-matching ones,
    C parties that multicast bot.  At |B| = t+1 the party multicasts bot and
    outputs bot; at |C| = t+1 it outputs bot; at |A u C| = n-t it inputs its
    value to REC.
    """

    def init_sets(self, rec_value) -> None:
        self.A = {self.pid}
        self.B: set = set()
        self.C: set = set()
        self.rec_value = rec_value
        self.rec_input_sent = False
        self.sent_bot = False

    def _union_hits(self) -> None:
        if len(self.A | self.C) == self.n - self.t and not self.rec_input_sent:
            self.rec_input_sent = True
            self.input_child("rec", self.rec_value)

    def add_match(self, j: int) -> None:
        if j in self.A:
            return
        self.A.add(j)
        self._union_hits()

    def add_mismatch(self, j: int) -> None:
        if j in self.B:
            return
        self.B.add(j)
        if len(self.B) == self.t + 1:
            self.sent_bot = True
            self.multicast("BOT", BOT, 1)
            self.output_once(BOT)

    def add_bot(self, j: int) -> None:
        if j in self.C:
            return
        self.C.add(j)
        if len(self.C) == self.t + 1:
            self.output_once(BOT)
        self._union_hits()


class Ca1(CoreSets, Machine):
    name = "CA1"
    kinds = frozenset({"KEY", "HASH", "BOT"})

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.rec = self.child("rec", Rec)
        self.sra = self.child("sra", Sra)
        self._early: list = []

    def on_input(self, value) -> None:
        self.value = value
        self.init_sets(value)
        self.hx = HashExchange(self, value)
        self.multicast("KEY", self.hx.key, self.hx.kappa)
        self.become_ready()
        for label, v in self._early:
            self.on_child_output(label, v)
        self._early = []

    def on_message(self, src: int, msg: Msg) -> None:
        if msg.kind == "BOT":
            self.add_bot(src)
            return
        if src == self.pid:
            return
        if msg.kind == "KEY":
            results = self.hx.on_key(src, msg.value)
        else:
            results = self.hx.on_hash(src, msg.value)
        for j, ok in results:
            if ok:
                self.add_match(j)
            else:
                self.add_mismatch(j)

    def on_child_output(self, label: str, value) -> None:
        if not self.has_input:
            self._early.append((label, value))
        elif label == "rec":
            self.input_child("sra", value)
        elif label == "sra":
            self.output_once(value)

    def forge_bits(self, kind: str):
        return auh.digest_bits(self.params.ell, self.params.kappa) if kind == "HASH" else None

    def matching_value(self, src: int, kind: str):
        if self.has_input and kind == "HASH":
            return self.hx.expected(src)
        return None

    def spam(self) -> list:
        return [Msg("BOT", BOT, 1)]
