"""Binary BA backends with totality.

``OracleBa`` forwards its input to a trusted simulator service that decides
once every currently honest party has submitted (or a quorum is reached) and
notifies honest parties through ordinary schedulable envelopes.

``CoinBa`` is a round-based protocol with an ideal common coin: a
binary-value broadcast (EST), one AUX and one CONF exchange per round, then
the coin.  A party that sees a single value equal to the coin decides it and
multicasts DECIDE; t+1 DECIDE messages are relayed and 2t+1 make a party
output and terminate, which gives totality without a separate gadget.
"""

from __future__ import annotations

from .base import Machine, Msg

ORACLE = 0  # src id of oracle notifications


class OracleBa(Machine):
    name = "BA-oracle"
    kinds = frozenset({"DECIDED"})
    wait_for_input = False

    def on_input(self, bit) -> None:
        self.rt.services.oracle_submit(self.path, self.pid, int(bit))

    def on_message(self, src: int, msg: Msg) -> None:
        if src == ORACLE and msg.value in (0, 1):
            self.output(msg.value)
            self.terminate()


class _Round:
    __slots__ = ("est_from", "est_sent", "bin_values", "aux_from", "aux_sent", "conf_from", "conf_sent")

    def __init__(self):
        self.est_from = ({}, {})  # per value: sender -> True
        self.est_sent = [False, False]
        self.bin_values: list = []
        self.aux_from: dict = {}
        self.aux_sent = False
        self.conf_from: dict = {}
        self.conf_sent = False


class CoinBa(Machine):
    name = "BA-coin"
    kinds = frozenset({"EST", "AUX", "CONF", "DECIDE"})
    wait_for_input = False
    MAX_ROUNDS = 10_000

    def __init__(self, rt, path):
        super().__init__(rt, path)
        self.rounds: dict[int, _Round] = {}
        self.r = 0
        self.est = None
        self.decided = None
        self.decide_from = ({}, {})
        self.decide_sent = False
        self.early: list = []

    def _rs(self, r: int) -> _Round:
        st = self.rounds.get(r)
        if st is None:
            st = self.rounds[r] = _Round()
        return st

    def on_input(self, bit) -> None:
        self.est = int(bit)
        self._start_round(1)
        early, self.early = self.early, []
        for src, msg in early:
            self.on_message(src, msg)

    def _start_round(self, r: int) -> None:
        self.r = r
        st = self._rs(r)
        if not st.est_sent[self.est]:
            st.est_sent[self.est] = True
            self.multicast("EST", (r, self.est), 1)
        self._progress()

    def on_message(self, src: int, msg: Msg) -> None:
        kind, val = msg.kind, msg.value
        if kind == "DECIDE":
            if val in (0, 1):
                self._on_decide(src, val)
            return
        if not (isinstance(val, tuple) and len(val) == 2 and isinstance(val[0], int) and 1 <= val[0] <= self.MAX_ROUNDS):
            return
        if self.r == 0:
            self.early.append((src, msg))
            return
        r, b = val
        st = self._rs(r)
        if kind == "EST":
            if b not in (0, 1) or src in st.est_from[b]:
                return
            st.est_from[b][src] = True
            cnt = len(st.est_from[b])
            if cnt >= self.t + 1 and not st.est_sent[b]:
                st.est_sent[b] = True
                self.multicast("EST", (r, b), 1)
            if cnt >= 2 * self.t + 1 and b not in st.bin_values:
                st.bin_values.append(b)
        elif kind == "AUX":
            if b not in (0, 1) or src in st.aux_from:
                return
            st.aux_from[src] = b
        else:
            if b not in (1, 2, 3) or src in st.conf_from:  # bitmask of {0, 1}
                return
            st.conf_from[src] = b
        if r == self.r:
            self._progress()

    def _progress(self) -> None:
        while True:
            r = self.r
            st = self._rs(r)
            if not st.bin_values:
                return
            if not st.aux_sent:
                st.aux_sent = True
                self.multicast("AUX", (r, st.bin_values[0]), 1)
            mask = sum(1 << b for b in st.bin_values)
            if not st.conf_sent:
                good = [v for v in st.aux_from.values() if mask >> v & 1]
                if len(good) < self.n - self.t:
                    return
                st.conf_sent = True
                self.multicast("CONF", (r, mask), 2)
            good = [m for m in st.conf_from.values() if m & ~mask == 0]
            if len(good) < self.n - self.t:
                return
            vals = 0
            for m in good:
                vals |= m
            coin = self.rt.services.coin(self.path, r)
            if vals in (1, 2):
                v = vals >> 1
                if v == coin and self.decided is None:
                    self.decided = v
                    self._send_decide(v)
                self.est = v
            else:
                self.est = coin
            if r >= self.MAX_ROUNDS:
                return
            self.r = r + 1
            nst = self._rs(r + 1)
            if not nst.est_sent[self.est]:
                nst.est_sent[self.est] = True
                self.multicast("EST", (r + 1, self.est), 1)

    def _send_decide(self, v: int) -> None:
        if not self.decide_sent:
            self.decide_sent = True
            self.multicast("DECIDE", v, 1)

    def _on_decide(self, src: int, v: int) -> None:
        if src in self.decide_from[0] or src in self.decide_from[1]:
            return
        self.decide_from[v][src] = True
        cnt = len(self.decide_from[v])
        if cnt >= self.t + 1:
            self._send_decide(v)
        if cnt >= 2 * self.t + 1:
            self.output(v)
            self.terminate()

    def spam(self) -> list:
        return [Msg("EST", (1, 0), 1), Msg("AUX", (1, 0), 1)]
