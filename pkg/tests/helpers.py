"""Shared oracles and campaign drivers for the tests."""

from __future__ import annotations

import itertools
import random

from crusader.ecc import rs_code


def placements(n: int, k: int):
    """Every (errors, erasures) pair of disjoint position sets with 2c + d <= n - k."""
    for c in range((n - k) // 2 + 1):
        for errs in itertools.combinations(range(n), c):
            rest = [j for j in range(n) if j not in errs]
            for d in range(n - k - 2 * c + 1):
                for eras in itertools.combinations(rest, d):
                    yield errs, eras


def corrupt(code, word, errs, eras, rng):
    out = list(word)
    for j in errs:
        while True:
            s = bytes(rng.getrandbits(code.w) for _ in range(code.m)) if code.w <= 8 else \
                b"".join(rng.getrandbits(16).to_bytes(2, "little") for _ in range(code.m))
            if s != out[j]:
                out[j] = s
                break
    for j in eras:
        out[j] = None
    return out


def decode_campaign(n: int, k: int, ell: int, min_trials: int = 1000, seed=0) -> dict:
    """Each placement once with a random message and random wrong symbols, then
    random placements until ``min_trials`` corrupted words have been decoded."""
    code = rs_code(n, k, ell)
    rng = random.Random(f"ecc/{n}/{k}/{ell}/{seed}")
    every = list(placements(n, k))
    trials = wrong = 0

    def one(errs, eras):
        nonlocal trials, wrong
        m = rng.getrandbits(ell)
        got = code.decode(corrupt(code, code.encode(m), errs, eras, rng))
        trials += 1
        wrong += got != m

    for errs, eras in every:
        one(errs, eras)
    while trials < min_trials:
        one(*rng.choice(every))
    return {"placements": len(every), "trials": trials, "wrong": wrong}


def schoolbook_mul(a: int, b: int, w: int, modulus: int) -> int:
    """Shift-and-add multiply in GF(2^w), independent of the library."""
    acc = 0
    for _ in range(w):
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> w:
            a ^= modulus
    return acc


def oracle_hash(key: int, value: int, length: int, kap: int, modulus: int) -> int:
    """sum_j s_j key^j with s_0 the most significant kappa-bit chunk."""
    chunks = [(value >> (length - kap * (j + 1))) & ((1 << kap) - 1) for j in range(length // kap)]
    acc, power = 0, 1
    for s in chunks:
        acc ^= schoolbook_mul(s, power, kap, modulus)
        power = schoolbook_mul(power, key, kap, modulus)
    return acc


def oracle_kappa(lam: int, ell: int, n: int) -> int:
    """Smallest integer K with K >= lam + 1 + log2(ell n^2), i.e. 2^(K - lam - 1) >= ell n^2."""
    x = ell * n * n
    K = lam + 1
    while (1 << (K - lam - 1)) < x:
        K += 1
    return K


def max_collisions(kap: int, length: int) -> int:
    """Largest number of keys on which two distinct ``length``-bit messages collide."""
    import numpy as np

    from crusader.auh import hash_value

    msgs = 1 << length
    table = np.array([[hash_value(k, m, length, kap) for k in range(1 << kap)] for m in range(msgs)],
                     dtype=np.uint8)
    worst = 0
    for a in range(msgs - 1):
        eq = (table[a + 1:] == table[a]).sum(axis=1)
        worst = max(worst, int(eq.max()))
    return worst


# criterion number -> summary line, filled by test_acceptance and printed at the end of the session
ACCEPTANCE: dict = {}


def record(num: int, ok: bool, detail: str) -> str:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    return line
