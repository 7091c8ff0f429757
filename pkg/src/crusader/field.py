"""Arithmetic in binary extension fields GF(2^w), 1 <= w <= 64.

Elements are plain ints in ``[0, 2**w)``, read as polynomials over GF(2).
The modulus for each width is the numerically smallest irreducible
polynomial of that degree, e.g. x^4+x+1 (0x13), x^8+x^4+x^3+x+1 (0x11B),
x^16+x^5+x^3+x+1 (0x1002B), x^32+x^7+x^3+x^2+1 and x^64+x^4+x^3+x+1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_WIDTH = 64
TABLE_WIDTH = 16  # log/antilog tables are built up to this width


class FieldError(ValueError):
    """Contract violation: width mismatch, unsupported width or bad value."""


def clmul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product of two non-negative ints."""
    if a < b:
        a, b = b, a
    r = 0
    while b:
        low = b & -b
        r ^= a << (low.bit_length() - 1)
        b ^= low
    return r


def poly_mod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def poly_mulmod(a: int, b: int, f: int) -> int:
    return poly_mod(clmul(a, b), f)


def is_irreducible(f: int) -> bool:
    """Ben-Or test: f of degree d is irreducible iff gcd(f, x^(2^i) - x) == 1 for i <= d/2."""
    d = f.bit_length() - 1
    if d < 1:
        return False
    if d == 1:
        return True
    if not f & 1:
        return False
    xp = 0b10
    for _ in range(d // 2):
        xp = poly_mulmod(xp, xp, f)
        if poly_gcd(f, xp ^ 0b10) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def irreducible_poly(width: int) -> int:
    """Numerically smallest irreducible polynomial of degree ``width`` (including the x^w term)."""
    if not 1 <= width <= MAX_WIDTH:
        raise FieldError(f"unsupported field width {width}")
    if width == 1:
        return 0b10
    top = 1 << width
    for tail in range(1, top, 2):
        if is_irreducible(top | tail):
            return top | tail
    raise FieldError(f"no irreducible polynomial of degree {width}")  # pragma: no cover


class GF:
    """The field GF(2^width). Use :func:`gf` to get the shared instance."""

    def __init__(self, width: int):
        self.width = width
        self.order = 1 << width
        self.mask = self.order - 1
        self.modulus = irreducible_poly(width)
        self.tail = self.modulus ^ self.order
        self._exp: list[int] | None = None
        self._log: list[int] | None = None

    def __repr__(self) -> str:
        return f"GF(2^{self.width}, modulus={self.modulus:#x})"

    def reduce(self, p: int) -> int:
        w, mask, tail = self.width, self.mask, self.tail
        while p >> w:
            p = (p & mask) ^ clmul(p >> w, tail)
        return p

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul_generic(self, a: int, b: int) -> int:
        return self.reduce(clmul(a, b))

    def mul(self, a: int, b: int) -> int:
        if self.width <= TABLE_WIDTH:
            if a == 0 or b == 0:
                return 0
            exp, log = self.tables()
            return exp[log[a] + log[b]]
        return self.reduce(clmul(a, b))

    def pow(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self.mul_generic(r, a)
            a = self.mul_generic(a, a)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse in GF(2^%d)" % self.width)
        if self.width <= TABLE_WIDTH:
            exp, log = self.tables()
            return exp[(self.order - 1 - log[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def tables(self) -> tuple[list[int], list[int]]:
        """Antilog (doubled length, no modular index needed) and log tables."""
        if self._exp is None:
            if self.width > TABLE_WIDTH:
                raise FieldError("tables only for width <= %d" % TABLE_WIDTH)
            q1 = self.order - 1
            g = self._generator()
            exp = [0] * (2 * q1 + 1)
            log = [0] * self.order
            x = 1
            for i in range(q1):
                exp[i] = x
                log[x] = i
                x = self.mul_generic(x, g)
            for i in range(q1, 2 * q1 + 1):
                exp[i] = exp[i - q1]
            self._exp, self._log = exp, log
        return self._exp, self._log  # type: ignore[return-value]

    def _generator(self) -> int:
        q1 = self.order - 1
        if q1 == 1:
            return 1
        factors = _prime_factors(q1)
        for g in range(2, self.order):
            if all(self.pow(g, q1 // p) != 1 for p in factors):
                return g
        raise FieldError("no generator found")  # pragma: no cover

    @property
    def mul_table(self) -> np.ndarray:
        """Full (order x order) multiplication table, widths <= 8 only."""
        return _mul_table(self.width)

    def scalar_multiplier(self, c: int):
        """Fast multiplication by the constant ``c`` (4-bit windowed carry-less multiply)."""
        window = [clmul(c, v) for v in range(16)]
        reduce = self.reduce

        def mul_c(x: int) -> int:
            r = 0
            shift = 0
            while x:
                r ^= window[x & 15] << shift
                x >>= 4
                shift += 4
            return reduce(r)

        return mul_c


def _prime_factors(m: int) -> list[int]:
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


@lru_cache(maxsize=None)
def gf(width: int) -> GF:
    if not 1 <= width <= MAX_WIDTH:
        raise FieldError(f"unsupported field width {width}")
    return GF(width)


@lru_cache(maxsize=None)
def _mul_table(width: int) -> np.ndarray:
    if width > 8:
        raise FieldError("full multiplication tables only for width <= 8")
    f = gf(width)
    q = f.order
    table = np.zeros((q, q), dtype=np.uint8)
    for a in range(1, q):
        for b in range(a, q):
            table[a, b] = table[b, a] = f.mul(a, b)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class FieldElem:
    """A value of GF(2^width)."""

    value: int
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise FieldError(f"unsupported field width {self.width}")
        if not 0 <= self.value < (1 << self.width):
            raise FieldError(f"value {self.value:#x} does not fit in {self.width} bits")

    def _check(self, other: "FieldElem") -> None:
        if not isinstance(other, FieldElem):
            raise FieldError(f"expected FieldElem, got {type(other).__name__}")
        if other.width != self.width:
            raise FieldError(f"width mismatch: {self.width} vs {other.width}")

    def __add__(self, other: "FieldElem") -> "FieldElem":
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "FieldElem") -> "FieldElem":
        return mul(self, other)

    def __truediv__(self, other: "FieldElem") -> "FieldElem":
        return mul(self, inv(other))

    def __bool__(self) -> bool:
        return self.value != 0


def add(a: FieldElem, b: FieldElem) -> FieldElem:
    a._check(b)
    return FieldElem(a.value ^ b.value, a.width)


def mul(a: FieldElem, b: FieldElem) -> FieldElem:
    a._check(b)
    return FieldElem(gf(a.width).mul(a.value, b.value), a.width)


def inv(a: FieldElem) -> FieldElem:
    return FieldElem(gf(a.width).inv(a.value), a.width)
