"""Input families for sweeps: who holds which ell-bit value."""

from __future__ import annotations

import random
from typing import Optional

import numpy as np

from ..ecc import RSCode, rs_code


def _rand(rng: random.Random, ell: int, avoid=()) -> int:
    while True:
        v = rng.getrandbits(ell)
        if v not in avoid:
            return v


def common(n: int, ell: int, rng: random.Random, value: Optional[int] = None) -> dict:
    v = _rand(rng, ell) if value is None else value
    return {p: v for p in range(1, n + 1)}


def split(n: int, ell: int, rng: random.Random, classes: int = 2) -> dict:
    """``classes`` distinct values dealt round-robin after a random shuffle."""
    vals: list = []
    for _ in range(classes):
        vals.append(_rand(rng, ell, vals))
    order = list(range(1, n + 1))
    rng.shuffle(order)
    return {p: vals[i % classes] for i, p in enumerate(order)}


def random_inputs(n: int, ell: int, rng: random.Random) -> dict:
    return {p: rng.getrandbits(ell) for p in range(1, n + 1)}


def threshold(n: int, ell: int, rng: random.Random, count: int) -> dict:
    """``count`` parties share one value; everybody else holds a distinct fresh value."""
    base = _rand(rng, ell)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    used = [base]
    out = {}
    for i, p in enumerate(order):
        if i < count:
            out[p] = base
        else:
            out[p] = _rand(rng, ell, used)
            used.append(out[p])
    return out


def _polymul_roots(field, roots: list[int]) -> list[int]:
    """Coefficients (ascending) of prod (x - r)."""
    poly = [1]
    for r in roots:
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] ^= c
            nxt[i] ^= field.mul(c, r)
        poly = nxt
    return poly


def agreeing_value(code: RSCode, base: int, positions: list[int]) -> int:
    """A value different from ``base`` whose codeword agrees with Enc(base) at ``positions``
    (1-based, at most k-1 of them)."""
    if len(positions) > code.k - 1:
        raise ValueError("at most k-1 agreeing positions are possible")
    coeffs = code._split(base).astype(np.int64)
    poly = _polymul_roots(code.field, [code.points[j - 1] for j in positions])
    scale = 1
    if code.m == 1:
        if code.pad_bits >= code.w:
            raise ValueError("no room for a colliding value in this code layout")
        scale = 1 << code.pad_bits
    for i, c in enumerate(poly):
        coeffs[i, 0] ^= code.field.mul(c, scale)
    out = code._join(coeffs.astype(code.dtype))
    if out is None or out >= 1 << code.msg_len:
        raise ValueError("colliding value does not fit")
    return out


def colliding(n: int, t: int, ell: int, rng: random.Random, delta: int, class_size: int,
              classes: Optional[int] = None) -> dict:
    """Several classes whose codewords under an (n, delta) code agree with the base class
    codeword exactly at the indices of their own members, so every member of a
    side class sends base holders a matching symbol.  With delta = 1 no agreement is
    possible and the classes are just distinct values."""
    code = rs_code(n, delta, ell)
    order = list(range(1, n + 1))
    rng.shuffle(order)
    base = _rand(rng, ell)
    out: dict = {}
    used = [base]
    side = order[: n - class_size]
    base_members = order[n - class_size:]
    for p in base_members:
        out[p] = base
    per = max(delta - 1, 1) if classes is None else max(1, -(-len(side) // classes))
    i = 0
    while i < len(side):
        members = side[i:i + per]
        if delta > 1:
            v = agreeing_value(code, base, sorted(members[: delta - 1]))
            if v in used:
                v = _rand(rng, ell, used)
        else:
            v = _rand(rng, ell, used)
        used.append(v)
        for p in members:
            out[p] = v
        i += per
    return out


FAMILIES = ("common", "split", "random", "threshold", "colliding")


def make_inputs(family: str, n: int, t: int, ell: int, seed, **kw) -> dict:
    rng = random.Random(f"{seed}/inputs/{family}")
    if family == "common":
        return common(n, ell, rng, kw.get("value"))
    if family == "split":
        return split(n, ell, rng, kw.get("classes", 2))
    if family == "random":
        return random_inputs(n, ell, rng)
    if family == "threshold":
        return threshold(n, ell, rng, kw.get("count", t + 1))
    if family == "colliding":
        return colliding(n, t, ell, rng, kw["delta"], kw.get("class_size", (n + 1) // 2), kw.get("classes"))
    raise KeyError(f"unknown input family {family!r}")
