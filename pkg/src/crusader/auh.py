"""Almost-universal keyed hashing over GF(2^kappa).

A padded message of L*kappa bits is read MSB-first as coefficients
s_0..s_{L-1} and hashed as ``h(k, m) = sum_j s_j * k^j``.  Two distinct
messages collide on at most L-1 keys, so the family is
(L * 2^-kappa)-almost universal.
"""

from __future__ import annotations

from .field import MAX_WIDTH, FieldError, gf


class HashError(ValueError):
    pass


def kappa(lam: int, ell: int, n: int) -> int:
    """ceil(lam + log2(ell * n^2) + 1), computed with integers only."""
    if min(lam, ell, n) < 1:
        raise HashError("lambda, ell and n must be >= 1")
    x = ell * n * n
    k = lam + 1 + (x - 1).bit_length()  # (x-1).bit_length() == ceil(log2 x)
    if k > MAX_WIDTH:
        raise HashError(f"kappa={k} exceeds the largest supported field width {MAX_WIDTH}")
    return k


def padded_len(length: int, kap: int) -> int:
    return kap * -(-length // kap)


def pad(value: int, length: int, kap: int) -> tuple[int, int]:
    """Zero-extend a ``length``-bit string to a multiple of ``kap`` bits; returns (value, new_length)."""
    if length < 1:
        raise HashError("cannot pad an empty bitstring")
    new_len = padded_len(length, kap)
    return value << (new_len - length), new_len


def hash_value(key: int, value: int, length: int, kap: int) -> int:
    if length % kap:
        raise HashError(f"message length {length} is not a multiple of kappa={kap}")
    if not 0 <= key < (1 << kap):
        raise HashError("key out of range")
    try:
        field = gf(kap)
    except FieldError as exc:
        raise HashError(str(exc)) from exc
    mul_k = field.scalar_multiplier(key)
    mask = (1 << kap) - 1
    acc = 0
    # Horner from the highest-degree coefficient s_{L-1}, which is the last (lowest) chunk.
    for j in range(length // kap):
        acc = mul_k(acc) ^ ((value >> (j * kap)) & mask)
    return acc


def joint_key(k_i: int, k_j: int, kap: int) -> int:
    return (k_i + k_j) % (1 << kap)


def digest(key: int, value: int, ell: int, kap: int) -> int:
    """What SRA/CA1 parties exchange: the hash of the padded value, or the raw value when ell < kappa."""
    if ell < kap:
        return value
    v, length = pad(value, ell, kap)
    return hash_value(key, v, length, kap)


def digest_bits(ell: int, kap: int) -> int:
    return ell if ell < kap else kap
