"""Simulation and order-preservation diagnostics for coupled stochastic
functional differential equations with jumps.

Subpackages and modules:

* :mod:`ordersfde.segment`: cadlag segments, histories, the componentwise order.
* :mod:`ordersfde.noise`: seeded Brownian increments and marked Poisson arrivals.
* :mod:`ordersfde.coeff`: coefficient sets, the expression DSL, builtins, validators.
* :mod:`ordersfde.solver`: Euler scheme for one equation or the coupled pair.
* :mod:`ordersfde.order`: condition checkers, generator probe, Monte Carlo metric.
* :mod:`ordersfde.existence`: Bihari bounds, mollification, truncation, cascades.
"""

from __future__ import annotations

from .coeff import builtin, coefficients_from_config, load_coefficients
from .noise import MarkMeasure, generate, inject_events
from .segment import History, Segment, leq, meet, join, sup_norm
from .solver import SolverConfig, solve_coupled, solve_ensemble, solve_path

__version__ = "0.1.0"

__all__ = [
    "History",
    "MarkMeasure",
    "Segment",
    "SolverConfig",
    "builtin",
    "coefficients_from_config",
    "generate",
    "inject_events",
    "join",
    "leq",
    "load_coefficients",
    "meet",
    "solve_coupled",
    "solve_ensemble",
    "solve_path",
    "sup_norm",
]
