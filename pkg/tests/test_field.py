import random

import pytest

from crusader.field import FieldElem, FieldError, GF, add, gf, inv, irreducible_poly, is_irreducible, mul
from helpers import schoolbook_mul


def table_oracle(w, modulus):
    """Full multiplication table built from powers of x (log/antilog without the library)."""
    size = 1 << w
    tab = [[0] * size for _ in range(size)]
    for a in range(size):
        for b in range(size):
            tab[a][b] = schoolbook_mul(a, b, w, modulus)
    return tab


def E(v, w=4):
    return FieldElem(v, w)


def test_add_examples():
    assert add(E(0x3), E(0x3)).value == 0
    assert add(E(0x3), E(0x0)).value == 0x3
    assert add(E(0xA5, 8), E(0x5A, 8)).value == 0xFF


def test_width_mismatch():
    with pytest.raises(FieldError):
        add(E(1, 4), E(1, 8))
    with pytest.raises(FieldError):
        mul(E(1, 4), E(1, 8))


def test_value_out_of_range():
    with pytest.raises(FieldError):
        FieldElem(16, 4)


def test_mul_example_and_oracle_w4():
    assert irreducible_poly(4) == 0b10011
    # x * (x^3 + 1) = x^4 + x = (x + 1) + x = 1 modulo x^4 + x + 1
    assert schoolbook_mul(0x2, 0x9, 4, 0b10011) == 0x1
    assert mul(E(0x2), E(0x9)).value == 0x1
    tab = table_oracle(4, 0b10011)
    f = gf(4)
    for a in range(16):
        for b in range(16):
            assert f.mul(a, b) == tab[a][b]
            assert f.mul_generic(a, b) == tab[a][b]


def test_identity_and_zero():
    for w in (4, 8, 16, 32, 64):
        f = gf(w)
        rng = random.Random(w)
        for _ in range(200):
            x = rng.getrandbits(w)
            assert f.mul(1, x) == x
            assert f.mul(0, x) == 0


def test_inverse():
    assert inv(E(1)).value == 1
    for a in range(1, 16):
        assert mul(E(a), inv(E(a))).value == 1
    with pytest.raises(ZeroDivisionError):
        inv(E(0))


@pytest.mark.parametrize("w", [1, 2, 3, 4, 5, 6, 7, 8])
def test_axioms_exhaustive(w):
    import numpy as np

    f = gf(w)
    size = 1 << w
    t = np.array([[f.mul(a, b) for b in range(size)] for a in range(size)], dtype=np.int64)
    assert (t == t.T).all()
    idx = np.arange(size)
    # associativity: (a*b)*c == a*(b*c) for all triples
    left = t[t[:, :, None], idx[None, None, :]]
    right = t[idx[:, None, None], t[None, :, :]]
    assert (left == right).all()
    # distributivity: a*(b^c) == a*b ^ a*c
    bc = idx[:, None] ^ idx[None, :]
    assert (t[:, bc] == (t[:, :, None] ^ t[:, None, :])).all()
    # every nonzero element has exactly one inverse
    ones = (t[1:, 1:] == 1).sum(axis=1)
    assert (ones == 1).all()
    for a in range(1, size):
        assert f.mul(a, f.inv(a)) == 1


@pytest.mark.parametrize("w", [16, 32, 64])
def test_axioms_random(w):
    f = gf(w)
    rng = random.Random(f"axioms/{w}")
    for _ in range(100_000 if w == 16 else 20_000):
        a, b, c = rng.getrandbits(w), rng.getrandbits(w), rng.getrandbits(w)
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, b ^ c) == f.mul(a, b) ^ f.mul(a, c)
        assert f.mul(a, b) == f.mul(b, a)


@pytest.mark.parametrize("w", [4, 8, 16, 32, 64])
def test_moduli_are_irreducible(w):
    assert is_irreducible(irreducible_poly(w))


def test_tables_match_generic_path():
    for w in (8, 16):
        f = gf(w)
        rng = random.Random(w)
        for _ in range(5000):
            a, b = rng.getrandbits(w), rng.getrandbits(w)
            assert f.mul(a, b) == f.mul_generic(a, b) == schoolbook_mul(a, b, w, irreducible_poly(w))


def test_unsupported_width():
    with pytest.raises(FieldError):
        GF(65)
    with pytest.raises(FieldError):
        GF(0)
