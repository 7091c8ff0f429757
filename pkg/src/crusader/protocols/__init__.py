"""Protocol state machines and the factory used to build a party's protocol tree."""

from __future__ import annotations

from typing import Callable

from .ba import CoinBa, OracleBa
from .base import BOT, Machine, Msg, ProtocolError, Runtime, Services
from .ca1 import Ca1
from .ca2 import Ca2
from .ext import Ext
from .kca import Kca
from .pra import Pra
from .rec import Rec
from .sra import Sra
from .wrap import IntrusionWrap, intrusion_wrap

PROTOCOLS = ("REC", "SRA", "PRA", "KCA", "CA1", "CA2", "EXT", "BA")
BA_BACKENDS = {"oracle": OracleBa, "coin": CoinBa}
CA_BACKENDS = {"CA1": Ca1, "CA2": Ca2}
_SIMPLE = {"REC": Rec, "SRA": Sra, "PRA": Pra, "KCA": Kca, "CA1": Ca1, "CA2": Ca2}


def root_factory(protocol: str, ca_backend: str = "CA1", ba_backend: str = "oracle") -> Callable[[Runtime], Machine]:
    """Factory installing the root instance of ``protocol`` at path ``(protocol.lower(),)``."""
    protocol = protocol.upper()
    if protocol in _SIMPLE:
        cls = _SIMPLE[protocol]
        return lambda rt: cls(rt, (protocol.lower(),))
    if protocol == "BA":
        ba = BA_BACKENDS[ba_backend]
        return lambda rt: ba(rt, ("ba",))
    if protocol == "EXT":
        ca = intrusion_wrap(CA_BACKENDS[ca_backend.upper()])
        ba = BA_BACKENDS[ba_backend]
        return lambda rt: Ext(rt, ("ext",), ca, ba)
    raise ProtocolError(f"unknown protocol {protocol!r}")


__all__ = [
    "BOT", "Machine", "Msg", "ProtocolError", "Runtime", "Services",
    "Rec", "Sra", "Pra", "Kca", "Ca1", "Ca2", "Ext", "OracleBa", "CoinBa",
    "IntrusionWrap", "intrusion_wrap", "root_factory", "PROTOCOLS", "BA_BACKENDS",
]
