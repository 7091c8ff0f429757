"""Intrusion tolerance for any crusader agreement instance."""

from __future__ import annotations

from typing import Callable

from .base import BOT, Machine


class IntrusionWrap(Machine):
    """Outputs the inner output only if it equals this party's own input, else bot."""

    name = "ITW"
    wait_for_input = False

    def __init__(self, rt, path, inner: Callable):
        super().__init__(rt, path)
        self.inner = self.child("core", inner)
        self.name = f"ITW({self.inner.name})"

    def on_input(self, value) -> None:
        self.value = value
        self.input_child("core", value)

    def on_child_output(self, label: str, value) -> None:
        if self.outputs:
            return
        self.output(value if value is not BOT and value == self.value else BOT)


def intrusion_wrap(inner: Callable) -> Callable:
    """Machine factory for the wrapped version of ``inner``."""

    def factory(rt, path):
        return IntrusionWrap(rt, path, inner)

    return factory
