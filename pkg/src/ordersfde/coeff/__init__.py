from .builtins import CATALOGUE, EXPECTED_VERDICTS, builtin
from .config import coefficients_from_config, load_coefficients
from .control import BUILTIN_CONTROLS, ControlFunction, control, custom_control, validate_control
from .core import CoefficientHalf, CoefficientSet, as_half
from .dsl import CoefficientExpr, parse_expr
from .validators import A1Report, A2Report, check_A1, check_A2

__all__ = [
    "A1Report",
    "A2Report",
    "BUILTIN_CONTROLS",
    "CATALOGUE",
    "CoefficientExpr",
    "CoefficientHalf",
    "CoefficientSet",
    "ControlFunction",
    "EXPECTED_VERDICTS",
    "as_half",
    "builtin",
    "check_A1",
    "check_A2",
    "coefficients_from_config",
    "control",
    "custom_control",
    "load_coefficients",
    "parse_expr",
    "validate_control",
]
