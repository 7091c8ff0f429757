"""The extension protocol: one CA, one REC and one binary BA instance."""

from __future__ import annotations

from typing import Callable

from .base import BOT, Machine, Msg
from .rec import Rec


class Ext(Machine):
    name = "EXT"
    kinds = frozenset({"BOT"})
    wait_for_input = False

    def __init__(self, rt, path, ca: Callable, ba: Callable):
        super().__init__(rt, path)
        self.ca = self.child("ca", ca)
        self.rec = self.child("rec", Rec)
        self.ba = self.child("ba", ba)
        self.y = BOT
        self.ba_input = None
        self.bot_from: set = set()
        self.sent_bot = False
        self.await_y = False

    def _ba_in(self, bit: int) -> None:
        if self.ba_input is None:
            self.ba_input = bit
            self.input_child("ba", bit)

    def on_input(self, value) -> None:
        self.input_child("ca", value)

    def on_message(self, src: int, msg: Msg) -> None:
        if src in self.bot_from:
            return
        self.bot_from.add(src)
        if len(self.bot_from) >= self.t + 1:
            self._ba_in(0)

    def on_child_output(self, label: str, value) -> None:
        if label == "ca":
            if value is BOT:
                self.sent_bot = True
                self.multicast("BOT", BOT, 1)
                self._ba_in(0)
            else:
                self.input_child("rec", value)
        elif label == "rec":
            self.y = value
            self._ba_in(1)
            if self.await_y:
                self._finish(value)
        elif label == "ba":
            if value == 0:
                self._finish(BOT)
            elif self.y is not BOT:
                self._finish(self.y)
            else:
                self.await_y = True

    def _finish(self, value) -> None:
        self.output(value)
        self.terminate()

    def spam(self) -> list:
        return [Msg("BOT", BOT, 1)]
