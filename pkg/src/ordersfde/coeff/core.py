"""Coefficient oracles for the coupled pair of equations.

A coefficient receives a time ``t`` (a Python float) and a *probe* ``x``.
The probe is anything with ``x(theta) -> ndarray[..., d]`` and
``x.batch_shape``: a single :class:`~ordersfde.segment.Segment`, a
:class:`~ordersfde.segment.SegmentBatch`, or the solver's ensemble view.
Oracles must broadcast over the leading batch axes and return

* drift ``b(t, x)``: ``batch_shape + (d,)``
* diffusion ``sigma(t, x)``: ``batch_shape + (d, m)``
* jump ``gamma(t, x, z)``: ``batch_shape + (d,)`` with ``z`` the mark value.

Oracles must be pure; the solver and the checkers call them from several
places with no ordering guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np

from ..noise import MarkMeasure

Drift = Callable[[float, Any], np.ndarray]
Diffusion = Callable[[float, Any], np.ndarray]
Jump = Callable[[float, Any, float], np.ndarray]


def zero_drift(d: int) -> Drift:
    def b(t, x):
        return np.zeros(x.batch_shape + (d,))

    return b


def zero_diffusion(d: int, m: int) -> Diffusion:
    def sigma(t, x):
        return np.zeros(x.batch_shape + (d, m))

    return sigma


@dataclass(frozen=True)
class CoefficientHalf:
    """One equation's coefficients ``(b, sigma, gamma)``.

    ``jump`` may be ``None`` for a continuous equation.
    """

    d: int
    m: int
    r0: float
    drift: Drift
    diffusion: Diffusion
    jump: Optional[Jump] = None
    measure: MarkMeasure = field(default_factory=MarkMeasure.empty)
    name: str = ""

    @property
    def has_jumps(self) -> bool:
        return self.jump is not None and self.measure.size > 0

    def b(self, t: float, x) -> np.ndarray:
        return np.asarray(self.drift(t, x), dtype=float)

    def sigma(self, t: float, x) -> np.ndarray:
        return np.asarray(self.diffusion(t, x), dtype=float)

    def gamma(self, t: float, x, k: int) -> np.ndarray:
        """Jump of mark index ``k``; zero when the half has no jump term."""
        if self.jump is None:
            return np.zeros(x.batch_shape + (self.d,))
        return np.asarray(self.jump(t, x, self.measure.marks[k]), dtype=float)

    def with_measure(self, measure: MarkMeasure) -> "CoefficientHalf":
        return replace(self, measure=measure)


@dataclass(frozen=True)
class CoefficientSet:
    """Both equations: ``(b, sigma, gamma)`` and the barred ``(b', sigma', gamma')``.

    The two halves share ``d``, ``m``, ``r0`` and the mark measure.
    """

    unbarred: CoefficientHalf
    barred: CoefficientHalf
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        u, v = self.unbarred, self.barred
        if (u.d, u.m, u.r0) != (v.d, v.m, v.r0):
            raise ValueError("both halves must share d, m and r0")
        if u.measure != v.measure:
            raise ValueError("both halves must share the mark measure")

    @classmethod
    def from_functions(
        cls,
        d: int,
        m: int,
        r0: float,
        drift: Drift | None = None,
        diffusion: Diffusion | None = None,
        jump: Jump | None = None,
        drift_bar: Drift | None = None,
        diffusion_bar: Diffusion | None = None,
        jump_bar: Jump | None = None,
        measure: MarkMeasure | None = None,
        name: str = "",
        **params,
    ) -> "CoefficientSet":
        """Build a set; missing entries are zero, barred ones default to unbarred."""
        measure = measure or MarkMeasure.empty()
        drift = drift or zero_drift(d)
        diffusion = diffusion or zero_diffusion(d, m)
        u = CoefficientHalf(d, m, float(r0), drift, diffusion, jump, measure, name)
        v = CoefficientHalf(
            d,
            m,
            float(r0),
            drift_bar or drift,
            diffusion_bar or diffusion,
            jump_bar if jump_bar is not None else jump,
            measure,
            name + "_bar" if name else "",
        )
        return cls(u, v, name, dict(params))

    @property
    def d(self) -> int:
        return self.unbarred.d

    @property
    def m(self) -> int:
        return self.unbarred.m

    @property
    def r0(self) -> float:
        return self.unbarred.r0

    @property
    def measure(self) -> MarkMeasure:
        return self.unbarred.measure

    def half(self, barred: bool = False) -> CoefficientHalf:
        return self.barred if barred else self.unbarred


def as_half(cs) -> CoefficientHalf:
    """Accept either a half or a full set (whose unbarred half is used)."""
    if isinstance(cs, CoefficientSet):
        return cs.unbarred
    if isinstance(cs, CoefficientHalf):
        return cs
    raise TypeError(f"expected CoefficientSet or CoefficientHalf, got {type(cs).__name__}")
