"""Terminating reconstruction with online error correction.

Parties that acquire the (single) candidate value v* encode it with an
(n, n-2t) code, multicast their own MINE symbol and send every P_j its YOURS
symbol.  Others relay a MINE symbol once t+1 parties vouch for it via YOURS,
decode from n-t or more MINE symbols, accept a decoding only when n-t stored
symbols agree with its re-encoding, and terminate after 2t+1 YOURS senders.
"""

from __future__ import annotations

from collections import Counter

from ..ecc import rs_code
from .base import Machine, Msg


class Rec(Machine):
    name = "REC"
    kinds = frozenset({"MINE", "YOURS"})
    wait_for_input = False  # parties without input still help

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.code = rs_code(self.n, self.n - 2 * self.t, self.params.ell)
        self.a = self.code.symbol_bits
        self.z: list = [None] * self.n
        self.stored = 0
        self.y = None
        self.sent_mine = False
        self.sent_yours = False
        self.yours_from: dict[int, bytes] = {}
        self.yours_count: Counter = Counter()
        self.mine_from: set = set()
        self.decode_attempts = 0

    def _send_symbols(self, symbols: list) -> None:
        if not self.sent_mine:
            self.sent_mine = True
            self.multicast("MINE", symbols[self.pid - 1], self.a)
        if not self.sent_yours:
            self.sent_yours = True
            for j in range(1, self.n + 1):
                self.send(j, "YOURS", symbols[j - 1], self.a)

    def on_input(self, value) -> None:
        self._send_symbols(self.code.encode(value))

    def on_message(self, src: int, msg: Msg) -> None:
        s = msg.value
        if not self.code.is_symbol(s):
            return
        if msg.kind == "YOURS":
            if src in self.yours_from:
                return
            self.yours_from[src] = s
            self.yours_count[s] += 1
            if self.yours_count[s] == self.t + 1 and not self.sent_mine:
                self.sent_mine = True
                self.multicast("MINE", s, self.a)
        else:
            if self.y is not None or src in self.mine_from:
                return
            self.mine_from.add(src)
            self.z[src - 1] = s
            self.stored += 1
            if self.stored >= self.n - self.t:
                self._try_decode()
        self._check_done()

    def _try_decode(self) -> None:
        self.decode_attempts += 1
        y = self.code.decode(self.z)
        if y is None:
            return
        symbols = self.code.encode(y)
        agree = sum(1 for zk, sk in zip(self.z, symbols) if zk == sk)
        if agree >= self.n - self.t:
            self.y = y
            self._send_symbols(symbols)

    def _check_done(self) -> None:
        if self.y is not None and len(self.yours_from) >= 2 * self.t + 1:
            self.output(self.y)
            self.terminate()

    def spam(self) -> list:
        return []
