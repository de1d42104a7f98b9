from .checks import ConditionReport, Witness, check_cond_diffusion, check_cond_drift, check_cond_jump, check_conditions
from .generator import (
    ProbeReport,
    TestFunction,
    bump_test_function,
    constant_test_function,
    coordinate_test_function,
    generator_L,
    necessity_probe_drift,
)
from .mc import OrderMetric, verify_order_mc
from .psi import psi, psi_prime, psi_second

__all__ = [
    "ConditionReport",
    "OrderMetric",
    "ProbeReport",
    "TestFunction",
    "Witness",
    "bump_test_function",
    "check_cond_diffusion",
    "check_cond_drift",
    "check_cond_jump",
    "check_conditions",
    "constant_test_function",
    "coordinate_test_function",
    "generator_L",
    "necessity_probe_drift",
    "psi",
    "psi_prime",
    "psi_second",
    "verify_order_mc",
]
