"""Catalogue of coefficient sets with known behaviour.

=====================  ==============================================  =====  =====  ====
name                   coefficients                                    drift  diff   jump
=====================  ==============================================  =====  =====  ====
zero                   everything 0                                    pass   pass   pass
linear_drift           b = b' = -lam x(0), sigma = sigma' = s diag x(0) pass   pass   pass
shifted_drift_pair     b = -x, b' = -x + c, sigma = sigma' = x          pass   pass   pass
delayed_drift          b = b' = a x^1(-r0)                             pass   pass   pass
geometric_diffusion    b = b' = mu x, sigma = sigma' = s x              pass   pass   pass
delayed_diffusion      sigma = sigma' = x^1(-r0)                       pass   fail   pass
constant_jump          gamma = gamma' = c, rate nu                     pass   pass   pass
negating_jump          gamma = -x^1(0), gamma' = 0, rate nu             pass   pass   fail
abs_drift              b = b' = |x^1(0)|                               pass   pass   pass
log_lipschitz_drift    b = b' = x sqrt(log(e + 1/x^2))                 pass   pass   pass
=====================  ==============================================  =====  =====  ====

The verdict columns are the expected outcomes of the three order
conditions; see :data:`EXPECTED_VERDICTS`.
"""

from __future__ import annotations

import inspect
from typing import Callable

import numpy as np

from ..errors import BadParams, UnknownName
from ..noise import MarkMeasure
from .core import CoefficientSet


def zero(d: int = 1, m: int = 1, r0: float = 0.0) -> CoefficientSet:
    return CoefficientSet.from_functions(d, m, r0, name="zero")


def linear_drift(lam: float = 1.0, s: float = 0.5, d: int = 1, r0: float = 0.0) -> CoefficientSet:
    eye = np.eye(d)

    def b(t, x):
        return -lam * x(0.0)

    def sigma(t, x):
        return s * x(0.0)[..., :, None] * eye

    return CoefficientSet.from_functions(d, d, r0, b, sigma, name="linear_drift", lam=lam, s=s)


def shifted_drift_pair(c: float = 1.0) -> CoefficientSet:
    def b(t, x):
        return -x(0.0)

    def b_bar(t, x):
        return -x(0.0) + c

    def sigma(t, x):
        return x(0.0)[..., None]

    return CoefficientSet.from_functions(1, 1, 0.0, b, sigma, drift_bar=b_bar, name="shifted_drift_pair", c=c)


def delayed_drift(r0: float = 1.0, a: float = 1.0) -> CoefficientSet:
    def b(t, x):
        return a * x(-r0)

    return CoefficientSet.from_functions(1, 1, r0, b, name="delayed_drift", a=a)


def geometric_diffusion(mu: float = 0.0, s: float = 1.0, r0: float = 0.0) -> CoefficientSet:
    def b(t, x):
        return mu * x(0.0)

    def sigma(t, x):
        return s * x(0.0)[..., None]

    return CoefficientSet.from_functions(1, 1, r0, b, sigma, name="geometric_diffusion", mu=mu, s=s)


def delayed_diffusion(r0: float = 1.0) -> CoefficientSet:
    if r0 <= 0:
        raise BadParams("delayed_diffusion needs r0 > 0")

    def sigma(t, x):
        return x(-r0)[..., None]

    return CoefficientSet.from_functions(1, 1, r0, diffusion=sigma, name="delayed_diffusion")


def constant_jump(c: float = 1.0, rate: float = 1.0) -> CoefficientSet:
    def gamma(t, x, z):
        return np.full(x.batch_shape + (1,), c)

    return CoefficientSet.from_functions(
        1, 1, 0.0, jump=gamma, measure=MarkMeasure.single(rate), name="constant_jump", c=c, rate=rate
    )


def negating_jump(rate: float = 1.0) -> CoefficientSet:
    def gamma(t, x, z):
        return -x(0.0)

    def gamma_bar(t, x, z):
        return np.zeros(x.batch_shape + (1,))

    return CoefficientSet.from_functions(
        1, 1, 0.0, jump=gamma, jump_bar=gamma_bar, measure=MarkMeasure.single(rate), name="negating_jump", rate=rate
    )


def abs_drift(r0: float = 0.0) -> CoefficientSet:
    def b(t, x):
        return np.abs(x(0.0))

    return CoefficientSet.from_functions(1, 1, r0, b, name="abs_drift")


def log_lipschitz_drift(r0: float = 0.0) -> CoefficientSet:
    def b(t, x):
        v = x(0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = v * np.sqrt(np.log(np.e + 1.0 / (v * v)))
        return np.where(v == 0.0, 0.0, out)

    return CoefficientSet.from_functions(1, 1, r0, b, name="log_lipschitz_drift")


CATALOGUE: dict[str, Callable[..., CoefficientSet]] = {
    "zero": zero,
    "linear_drift": linear_drift,
    "shifted_drift_pair": shifted_drift_pair,
    "delayed_drift": delayed_drift,
    "geometric_diffusion": geometric_diffusion,
    "delayed_diffusion": delayed_diffusion,
    "constant_jump": constant_jump,
    "negating_jump": negating_jump,
    "abs_drift": abs_drift,
    "log_lipschitz_drift": log_lipschitz_drift,
}

# expected outcome of the drift / diffusion / jump order conditions
EXPECTED_VERDICTS: dict[str, dict[str, bool]] = {
    name: {"drift": True, "diffusion": True, "jump": True} for name in CATALOGUE
}
EXPECTED_VERDICTS["delayed_diffusion"]["diffusion"] = False
EXPECTED_VERDICTS["negating_jump"]["jump"] = False


def builtin(name: str, **params) -> CoefficientSet:
    """Instantiate a catalogue entry; unknown keyword parameters are rejected."""
    try:
        factory = CATALOGUE[name]
    except KeyError:
        raise UnknownName(f"unknown builtin {name!r}; known: {sorted(CATALOGUE)}") from None
    allowed = inspect.signature(factory).parameters
    unknown = set(params) - set(allowed)
    if unknown:
        raise BadParams(f"{name} does not take {sorted(unknown)}; parameters: {list(allowed)}")
    try:
        cs = factory(**params)
    except (TypeError, ValueError) as exc:
        raise BadParams(str(exc)) from exc
    merged = {k: p.default for k, p in allowed.items()}
    merged.update(params)
    return CoefficientSet(cs.unbarred, cs.barred, name, merged)
