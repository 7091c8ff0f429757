"""Protocol parameters (n, t, eps, lambda, ell) and the quantities derived from them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .auh import kappa as _kappa

DEFAULT_LAMBDA = 32

# Protocols that need t < n/3 and those that need t <= n/(3+eps) with eps > 0.
THIRD_PROTOCOLS = ("REC", "SRA", "CA1")
EPS_PROTOCOLS = ("KCA", "PRA", "CA2")


class ParamError(ValueError):
    pass


def as_fraction(x: Union[None, int, str, Fraction, float]) -> Optional[Fraction]:
    if x is None:
        return None
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    t: int
    ell: int
    lam: int = DEFAULT_LAMBDA
    eps: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if self.n < 1 or self.t < 0 or self.ell < 1 or self.lam < 1:
            raise ParamError(f"need n >= 1, t >= 0, ell >= 1, lambda >= 1 (got {self})")
        if self.eps is not None and self.eps <= 0:
            raise ParamError("eps must be positive")

    # -- thresholds ---------------------------------------------------------

    @property
    def third_ok(self) -> bool:
        return 3 * self.t < self.n

    @property
    def eps_ok(self) -> bool:
        return self.eps is not None and self.t * (3 + self.eps) <= self.n

    def require(self, protocol: str, backend: Optional[str] = None) -> None:
        """Reject parameters that violate the threshold of ``protocol``."""
        protocol = protocol.upper()
        if protocol == "EXT":
            protocol = (backend or "CA1").upper()
        if protocol in THIRD_PROTOCOLS:
            if not self.third_ok:
                raise ParamError(f"{protocol} needs t < n/3 (n={self.n}, t={self.t})")
        elif protocol in EPS_PROTOCOLS:
            if self.eps is None:
                raise ParamError(f"{protocol} needs eps > 0")
            if not self.eps_ok:
                raise ParamError(f"{protocol} needs t <= n/(3+eps) (n={self.n}, t={self.t}, eps={self.eps})")
        elif protocol != "BA":
            raise ParamError(f"unknown protocol {protocol!r}")

    # -- derived ------------------------------------------------------------

    @property
    def sigma(self) -> Fraction:
        if self.eps is None:
            raise ParamError("sigma needs eps")
        return min(Fraction(1), self.eps)

    @property
    def kappa(self) -> int:
        return _kappa(self.lam, self.ell, self.n)

    @property
    def rec_k(self) -> int:
        return self.n - 2 * self.t

    @property
    def pra_k(self) -> int:
        return self.n - 3 * self.t

    @property
    def kca_delta(self) -> int:
        return max(1, math.ceil(self.sigma * (self.n - 3 * self.t) / 5))

    @property
    def ca2_delta(self) -> int:
        return max(1, math.ceil(self.sigma * (self.n - 3 * self.t) / 16))

    @property
    def k_weak(self) -> int:
        """Number of distinct non-bot outputs KCA may produce."""
        return math.ceil(8 / self.sigma)

    @property
    def collision_bound(self) -> int:
        return (self.n - 3 * self.t - 1) // 2

    @property
    def ca2_core(self) -> int:
        return -(-(self.n - self.t) // 2)
