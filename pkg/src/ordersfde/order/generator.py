"""The generator ``L`` of one equation and the drift-necessity probe.

For a test function ``h`` on ``R^d``::

    (Lh)(t, xi) = sum_i b^i h_i(xi(0)) + 1/2 sum_ij (sigma sigma^T)^ij h_ij(xi(0))
                  + sum_k nu_k (h(xi(0) + gamma(t, xi, z_k)) - h(xi(0)))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from ..coeff.core import CoefficientSet, as_half
from ..errors import NonFiniteCoefficient, OrderPreconditionError
from ..segment import Segment, leq


@dataclass(frozen=True)
class TestFunction:
    """``h`` with gradient and Hessian, each taking a point of shape ``(d,)``."""

    __test__ = False  # keep pytest from collecting this class

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    name: str = "h"


def constant_test_function(c: float, d: int) -> TestFunction:
    return TestFunction(lambda x: float(c), lambda x: np.zeros(d), lambda x: np.zeros((d, d)), f"const({c})")


def coordinate_test_function(i: int, d: int) -> TestFunction:
    """``h(x) = x^i`` (0-based ``i``)."""
    e = np.zeros(d)
    e[i] = 1.0
    return TestFunction(lambda x: float(x[i]), lambda x: e.copy(), lambda x: np.zeros((d, d)), f"x[{i}]")


def _smoothstep(u):
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def bump(eps: float, y: float) -> float:
    """Smooth plateau: 1 on ``[-eps, eps]``, 0 outside ``[-2eps, 2eps]``."""
    u = min(max((abs(y) - eps) / eps, 0.0), 1.0)
    return 1.0 - _smoothstep(u)


def bump_primitive(eps: float, y: float) -> float:
    """``int_0^y bump(eps, s) ds`` in closed form."""
    a = abs(y)
    if a <= eps:
        return y
    u = min((a - eps) / eps, 1.0)
    inner = u - (u**6 - 3.0 * u**5 + 2.5 * u**4)
    return math.copysign(eps + eps * inner, y)


def bump_slope(eps: float, y: float) -> float:
    a = abs(y)
    if a <= eps or a >= 2 * eps:
        return 0.0
    u = (a - eps) / eps
    return -math.copysign(30.0 * u * u * (u - 1.0) ** 2 / eps, y)


def bump_test_function(i: int, center: float, eps: float, d: int) -> TestFunction:
    """``h(x) = int_0^{x^i - center} bump(eps, s) ds``: monotone, smooth, flat far out."""

    def value(x):
        return bump_primitive(eps, float(x[i]) - center)

    def grad(x):
        g = np.zeros(d)
        g[i] = bump(eps, float(x[i]) - center)
        return g

    def hess(x):
        m = np.zeros((d, d))
        m[i, i] = bump_slope(eps, float(x[i]) - center)
        return m

    return TestFunction(value, grad, hess, f"bump(i={i}, eps={eps})")


def generator_L(cs, h: TestFunction, t: float, xi: Segment) -> float:
    half = as_half(cs)
    x0 = xi.value0
    b = half.b(t, xi)
    s = half.sigma(t, xi)
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(s))):
        raise NonFiniteCoefficient(f"non-finite drift or diffusion at t={t}")
    terms = [float(b @ h.grad(x0)), 0.5 * float(np.sum((s @ s.T) * h.hess(x0)))]
    h0 = h.value(x0)
    for k, nu in enumerate(half.measure.weights):
        g = half.gamma(t, xi, k)
        if not np.all(np.isfinite(g)):
            raise NonFiniteCoefficient(f"non-finite jump coefficient at t={t}, mark {k}")
        terms.append(nu * (h.value(x0 + g) - h0))
    return math.fsum(terms)


@dataclass
class ProbeReport:
    Lh: float
    Lbar_h: float
    jump_slack: float
    eps: float
    component: int
    t: float

    @property
    def gap(self) -> float:
        return self.Lh - self.Lbar_h

    @property
    def verdict(self) -> str:
        if self.gap > self.jump_slack:
            return "violation"
        if self.gap <= 0:
            return "consistent"
        return "inconclusive"

    def to_dict(self) -> dict[str, Any]:
        return {
            "Lh": self.Lh,
            "Lbar_h": self.Lbar_h,
            "gap": self.gap,
            "jump_slack": self.jump_slack,
            "verdict": self.verdict,
            "eps": self.eps,
            "component": self.component,
            "t": self.t,
            "notes": [
                "jump integrability holds automatically: the mark measure is finite",
                "continuity of the coefficients is assumed, not checked",
            ],
        }


def necessity_probe_drift(
    cs: CoefficientSet, t0: float, xi: Segment, xibar: Segment, eps: float = 1e-3, i: Optional[int] = None
) -> ProbeReport:
    """Compare ``L h_eps`` and ``Lbar h_eps`` for a bump primitive in component ``i``.

    ``i`` defaults to the first component where ``xi(0)`` and ``xibar(0)``
    agree. A gap above the jump slack ``sum_k nu_k min(4 eps, |gamma| + |gammabar|)``
    is reported as a violation of the drift condition.
    """
    ok, where = leq(xi, xibar)
    if not ok:
        raise OrderPreconditionError(f"xi <= xibar fails in component {where[0]} at theta={where[1]}")
    equal = np.flatnonzero(xi.value0 == xibar.value0)
    if i is None:
        if not len(equal):
            raise OrderPreconditionError("xi(0) and xibar(0) differ in every component")
        i = int(equal[0])
    elif i not in equal:
        raise OrderPreconditionError(f"xi^{i}(0) != xibar^{i}(0)")
    h = bump_test_function(i, float(xi.value0[i]), eps, cs.d)
    Lh = generator_L(cs.unbarred, h, t0, xi)
    Lbar = generator_L(cs.barred, h, t0, xibar)
    slack = []
    for k, nu in enumerate(cs.measure.weights):
        g = np.linalg.norm(cs.unbarred.gamma(t0, xi, k))
        gb = np.linalg.norm(cs.barred.gamma(t0, xibar, k))
        slack.append(nu * min(4.0 * eps, float(g + gb)))
    return ProbeReport(Lh, Lbar, math.fsum(slack), eps, i, t0)
