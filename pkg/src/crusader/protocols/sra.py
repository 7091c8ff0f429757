"""Statistically secure reliable agreement via joint keys and almost-universal hashes."""

from __future__ import annotations

from .. import auh
from .base import Machine, Msg


class HashExchange:
    """KEY/HASH bookkeeping shared by SRA and CA1.

    Keys are drawn only after the input is known.  A HASH that arrives before
    the sender's KEY waits until the joint key exists.
    """

    def __init__(self, m: Machine, value):
        p = m.params
        self.m = m
        self.value = value
        self.kappa = p.kappa
        self.ell = p.ell
        self.bits = auh.digest_bits(p.ell, self.kappa)
        self.key = m.rt.rng.getrandbits(self.kappa)
        self.joint: dict[int, int] = {}
        self.own_digest: dict[int, int] = {}
        self.pending_hash: dict[int, int] = {}
        self.seen_hash: set = set()

    def digest_for(self, j: int) -> int:
        d = self.own_digest.get(j)
        if d is None:
            d = auh.digest(self.joint[j], self.value, self.ell, self.kappa)
            self.own_digest[j] = d
        return d

    def on_key(self, src: int, k) -> list:
        """Handle a KEY; returns [(src, matched)] for a HASH it unblocks."""
        if src in self.joint or not isinstance(k, int) or not 0 <= k < (1 << self.kappa):
            return []
        self.joint[src] = auh.joint_key(self.key, k, self.kappa)
        self.m.send(src, "HASH", self.digest_for(src), self.bits)
        if src in self.pending_hash:
            return [(src, self.pending_hash.pop(src) == self.digest_for(src))]
        return []

    def on_hash(self, src: int, z) -> list:
        if src in self.seen_hash:
            return []
        self.seen_hash.add(src)
        if src in self.joint:
            return [(src, z == self.digest_for(src))]
        self.pending_hash[src] = z
        return []

    def expected(self, src: int):
        if src in self.joint:
            return self.digest_for(src)
        return None


class Sra(Machine):
    name = "SRA"
    kinds = frozenset({"KEY", "HASH"})

    def on_input(self, value) -> None:
        self.value = value
        self.A = {self.pid}
        self.hx = HashExchange(self, value)
        self.multicast("KEY", self.hx.key, self.hx.kappa)
        self._check()
        self.become_ready()

    def on_message(self, src: int, msg: Msg) -> None:
        if src == self.pid:
            return
        if msg.kind == "KEY":
            results = self.hx.on_key(src, msg.value)
        else:
            results = self.hx.on_hash(src, msg.value)
        for j, ok in results:
            if ok:
                self.A.add(j)
                self._check()

    def _check(self) -> None:
        if len(self.A) == self.n - self.t and not self.outputs:
            self.output(self.value)

    def forge_bits(self, kind: str):
        return auh.digest_bits(self.params.ell, self.params.kappa) if kind == "HASH" else None

    def matching_value(self, src: int, kind: str):
        if not self.has_input:
            return None
        if kind == "HASH":
            return self.hx.expected(src)
        return None
