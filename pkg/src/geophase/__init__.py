"""Discrete-time geometric phases in price-impact trading models."""

__version__ = "0.1.0"

from geophase.core import (
    Impact,
    LinearImpact,
    MarketParams,
    PreconditionError,
    SignedPowerImpact,
    SystemState,
    TradeOrder,
    execution_price,
    impact_eval,
)
from geophase.discrete import (
    CycleSpec,
    Direction,
    Trajectory,
    closed_form_phase,
    make_cycle_input,
    phase,
    shape_area,
    simulate,
    step,
)

__all__ = [
    "__version__",
    "Impact",
    "LinearImpact",
    "SignedPowerImpact",
    "MarketParams",
    "PreconditionError",
    "SystemState",
    "TradeOrder",
    "execution_price",
    "impact_eval",
    "CycleSpec",
    "Direction",
    "Trajectory",
    "closed_form_phase",
    "make_cycle_input",
    "phase",
    "shape_area",
    "simulate",
    "step",
]
