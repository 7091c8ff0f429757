"""Simulator, protocols and auditors for communication-efficient asynchronous crusader agreement."""

__version__ = "0.1.0"
