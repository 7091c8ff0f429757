"""Adversarial discrete-event simulation of asynchronous message passing."""

from .adversary import Behavior, Strategy, make_strategy, strategy_catalog
from .network import BudgetError, Envelope, SchedulingError, Simulation
from .trace import Trace

__all__ = ["Behavior", "Strategy", "make_strategy", "strategy_catalog", "BudgetError",
           "Envelope", "SchedulingError", "Simulation", "Trace"]
