"""(n, k) Reed-Solomon codes with combined error and erasure decoding.

A message is an ``msg_len``-bit unsigned int.  It is zero-extended at the
low end to ``k * m * w`` bits and cut MSB-first into ``k * m`` field
elements of GF(2^w); component ``c`` takes elements ``c*k .. c*k + k - 1``
as the coefficients (lowest degree first) of a polynomial ``p_c``.  Symbol
``j`` (0-based) is the vector ``(p_0(j+1), ..., p_{m-1}(j+1))`` serialized
as bytes.  So one symbol of the code alphabet is ``a = m * w`` bits and the
code is an m-way interleaving of RS codes that share evaluation points.

``decode`` recovers the message whenever ``2c + d <= n - k`` for ``c``
incorrect and ``d`` missing symbols.  Otherwise it returns some message or
``None``.  A symbol is incorrect as soon as one component is.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .field import gf

CODE_FIELD_WIDTHS = (4, 8, 16)

MISSING = None
Symbol = bytes
Codeword = list  # list[Symbol | None]


class CodeError(ValueError):
    pass


def code_field_width(n: int) -> int:
    """Smallest supported field width w with 2^w > n (evaluation points 1..n are nonzero)."""
    for w in CODE_FIELD_WIDTHS:
        if (1 << w) > n:
            return w
    raise CodeError(f"no supported field width for n={n}")


def symbol_bits_for(ell: int, n: int, k: int) -> int:
    """Symbol size a: smallest multiple of the field width with k * a >= ell."""
    if min(ell, n, k) < 1:
        raise CodeError("ell, n and k must be >= 1")
    w = code_field_width(n)
    return w * -(-ell // (k * w))


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    msg_len: int

    def __post_init__(self):
        if self.n < 1 or self.msg_len < 1 or not 1 <= self.k <= self.n:
            raise CodeError(f"invalid code parameters n={self.n} k={self.k} msg_len={self.msg_len}")

    @property
    def symbol_bits(self) -> int:
        return symbol_bits_for(self.msg_len, self.n, self.k)


class RSCode:
    def __init__(self, n: int, k: int, msg_len: int):
        self.params = CodeParams(n, k, msg_len)
        self.n, self.k, self.msg_len = n, k, msg_len
        self.w = code_field_width(n)
        self.field = gf(self.w)
        self.m = -(-msg_len // (k * self.w))
        self.symbol_bits = self.m * self.w
        self.total_bits = self.k * self.m * self.w
        self.pad_bits = self.total_bits - msg_len
        self.dtype = np.dtype(np.uint8) if self.w <= 8 else np.dtype("<u2")
        self.symbol_len = self.m * self.dtype.itemsize
        self.points = list(range(1, n + 1))
        f = self.field
        gen = [[f.pow(x, i) for i in range(k)] for x in self.points]
        self.generator = np.array(gen, dtype=np.int64)
        if self.w <= 8:
            self._table = f.mul_table
        else:
            exp, log = f.tables()
            self._exp = np.array(exp, dtype=np.int64)
            self._log = np.array(log, dtype=np.int64)

    def __repr__(self) -> str:
        return f"RSCode(n={self.n}, k={self.k}, msg_len={self.msg_len}, a={self.symbol_bits})"

    # -- vectorized field helpers -------------------------------------------

    def _vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.w <= 8:
            return self._table[a, b]
        a, b = np.broadcast_arrays(a.astype(np.int64), b.astype(np.int64))
        out = self._exp[self._log[a] + self._log[b]]
        out[(a == 0) | (b == 0)] = 0
        return out

    def _apply(self, mat: np.ndarray, y: np.ndarray) -> np.ndarray:
        """(r x c) scalar matrix times (c x m) element matrix."""
        prod = self._vmul(mat[:, :, None], y[None, :, :])
        return np.bitwise_xor.reduce(prod, axis=1).astype(self.dtype)

    # -- message layout -----------------------------------------------------

    def _split(self, msg: int) -> np.ndarray:
        if not 0 <= msg < (1 << self.msg_len):
            raise CodeError(f"message does not fit in {self.msg_len} bits")
        padded = msg << self.pad_bits
        if self.w == 4:
            count = self.k * self.m
            extra = 4 if count % 2 else 0
            raw = np.frombuffer((padded << extra).to_bytes((count * 4 + extra) // 8, "big"), dtype=np.uint8)
            chunks = np.stack([raw >> 4, raw & 15], axis=1).reshape(-1)[:count]
        elif self.w == 8:
            chunks = np.frombuffer(padded.to_bytes(self.k * self.m, "big"), dtype=np.uint8)
        else:
            chunks = np.frombuffer(padded.to_bytes(2 * self.k * self.m, "big"), dtype=">u2")
        return chunks.reshape(self.m, self.k).T.astype(self.dtype)

    def _join(self, coeffs: np.ndarray) -> Optional[int]:
        chunks = coeffs.T.reshape(-1)
        if self.w == 4:
            if chunks.size % 2:
                chunks = np.append(chunks, 0).astype(np.uint8)
                extra = 4
            else:
                extra = 0
            raw = ((chunks[0::2] << 4) | chunks[1::2]).astype(np.uint8)
            value = int.from_bytes(raw.tobytes(), "big") >> extra
        elif self.w == 8:
            value = int.from_bytes(chunks.astype(np.uint8).tobytes(), "big")
        else:
            value = int.from_bytes(chunks.astype(">u2").tobytes(), "big")
        if value & ((1 << self.pad_bits) - 1):
            return None
        return value >> self.pad_bits

    # -- public API ---------------------------------------------------------

    def encode(self, msg: int) -> list[Symbol]:
        symbols = self._apply(self.generator, self._split(msg))
        return [row.tobytes() for row in symbols]

    def is_symbol(self, s) -> bool:
        if not isinstance(s, bytes) or len(s) != self.symbol_len:
            return False
        if self.w == 4:
            return max(s, default=0) < 16
        return True

    def decode(self, symbols: Sequence[Optional[Symbol]]) -> Optional[int]:
        if len(symbols) != self.n:
            raise CodeError(f"expected {self.n} symbols, got {len(symbols)}")
        present = [j for j, s in enumerate(symbols) if s is not None and self.is_symbol(s)]
        if len(present) < self.k:
            return None
        y = np.frombuffer(b"".join(symbols[j] for j in present), dtype=self.dtype).reshape(len(present), self.m)
        coeffs = self._solve(present, y)
        if coeffs is None:
            return None
        return self._join(coeffs)

    # -- decoding -----------------------------------------------------------

    def _interpolate(self, positions: list[int], y: np.ndarray) -> np.ndarray:
        return self._apply(_inverse_vandermonde(self.w, tuple(self.points[p] for p in positions)), y)

    def _mismatch(self, positions: list[int], coeffs: np.ndarray, y: np.ndarray) -> np.ndarray:
        pred = self._apply(self.generator[positions], coeffs)
        return (pred != y).any(axis=0)

    def _solve(self, present: list[int], y: np.ndarray) -> Optional[np.ndarray]:
        k = self.k
        coeffs = self._interpolate(present[:k], y[:k])
        bad = np.flatnonzero(self._mismatch(present, coeffs, y))
        if bad.size == 0:
            return coeffs
        xs = [self.points[p] for p in present]
        first = int(bad[0])
        poly = self._berlekamp_welch(xs, [int(v) for v in y[:, first]])
        if poly is None:
            return None
        coeffs[:, first] = poly
        f = self.field
        errors = {i for i, x in enumerate(xs) if _horner(f, poly, x) != int(y[i, first])}
        rest = bad[1:]
        if rest.size:
            # errors of one component usually cover the others; erase them and retry cheaply
            keep = [i for i in range(len(present)) if i not in errors]
            if len(keep) >= k:
                kept_pos = [present[i] for i in keep]
                sub = y[keep][:, rest]
                trial = self._interpolate(kept_pos[:k], sub[:k])
                still = self._mismatch(kept_pos, trial, sub)
                coeffs[:, rest[~still]] = trial[:, ~still]
                rest = rest[still]
            for c in rest:
                poly = self._berlekamp_welch(xs, [int(v) for v in y[:, c]])
                if poly is None:
                    return None
                coeffs[:, c] = poly
        return coeffs

    def _berlekamp_welch(self, xs: list[int], ys: list[int]) -> Optional[list[int]]:
        """Scalar Berlekamp-Welch: polynomial of degree < k within (N-k)//2 errors of (xs, ys)."""
        f = self.field
        k, big_n = self.k, len(xs)
        e = (big_n - k) // 2
        rows = []
        for x, yv in zip(xs, ys):
            powers = [1]
            for _ in range(e + k):
                powers.append(f.mul(powers[-1], x))
            row = powers[: e + k] + [f.mul(yv, p) for p in powers[:e]]
            row.append(f.mul(yv, powers[e]))
            rows.append(row)
        sol = _solve_linear(f, rows, 2 * e + k)
        if sol is None:
            return None
        q = sol[: e + k]
        err = sol[e + k:] + [1]
        quot, rem = _poly_divmod(f, q, err)
        if any(rem):
            return None
        quot = quot + [0] * (k - len(quot))
        if any(quot[k:]):
            return None
        return quot[:k]


def _horner(f, coeffs, x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = f.mul(acc, x) ^ int(c)
    return acc


def _solve_linear(f, rows: list[list[int]], nvars: int) -> Optional[list[int]]:
    """Gaussian elimination on an augmented matrix; free variables are set to zero."""
    rows = [r[:] for r in rows]
    pivots = []
    r = 0
    for col in range(nvars):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = f.inv(rows[r][col])
        rows[r] = [f.mul(inv, v) for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                c = rows[i][col]
                rows[i] = [a ^ f.mul(c, b) for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if rows[i][nvars]:
            return None
    sol = [0] * nvars
    for i, col in enumerate(pivots):
        sol[col] = rows[i][nvars]
    return sol


def _poly_divmod(f, num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    num = num[:]
    while den and den[-1] == 0:
        den = den[:-1]
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [0], num
    inv_lead = f.inv(den[-1])
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = f.mul(num[i], inv_lead)
        quot[i - dd] = c
        if c:
            for j, d in enumerate(den):
                num[i - dd + j] ^= f.mul(c, d)
    return quot, num[:dd]


@lru_cache(maxsize=4096)
def _inverse_vandermonde(width: int, xs: tuple[int, ...]) -> np.ndarray:
    """Matrix mapping values at xs to coefficients of the interpolating polynomial."""
    f = gf(width)
    k = len(xs)
    rows = []
    for i, x in enumerate(xs):
        row = [1]
        for _ in range(k - 1):
            row.append(f.mul(row[-1], x))
        rows.append(row + [1 if j == i else 0 for j in range(k)])
    # Gauss-Jordan on [V | I]
    for col in range(k):
        piv = next(i for i in range(col, k) if rows[i][col])
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = f.inv(rows[col][col])
        rows[col] = [f.mul(inv, v) for v in rows[col]]
        for i in range(k):
            if i != col and rows[i][col]:
                c = rows[i][col]
                rows[i] = [a ^ f.mul(c, b) for a, b in zip(rows[i], rows[col])]
    return np.array([r[k:] for r in rows], dtype=np.int64)


@lru_cache(maxsize=256)
def rs_code(n: int, k: int, msg_len: int) -> RSCode:
    return RSCode(n, k, msg_len)


def encode(msg: int, params: CodeParams) -> list[Symbol]:
    return rs_code(params.n, params.k, params.msg_len).encode(msg)


def decode(codeword: Sequence[Optional[Symbol]], params: CodeParams) -> Optional[int]:
    return rs_code(params.n, params.k, params.msg_len).decode(codeword)
