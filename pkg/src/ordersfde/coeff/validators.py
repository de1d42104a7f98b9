"""Sampled validators for the growth/modulus assumptions (A1) and (A2).

Both are evidence, never proof: a pass only says no sampled input broke the
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..errors import NonFiniteCoefficient
from ..sampling import Sampler, independent_pairs
from ..segment import Segment
from .control import ControlFunction
from .core import CoefficientHalf, CoefficientSet


@dataclass
class A1Report:
    max_ratio: float
    worst_pair: Optional[tuple[float, Segment, Segment]]
    n_samples: int
    n_degenerate: int
    budget: Optional[float]
    sampler: str
    control: str
    ratios: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    @property
    def passed(self) -> Optional[bool]:
        if self.budget is None:
            return None
        return bool(self.max_ratio <= self.budget)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "assumption": "A1",
            "max_ratio": self.max_ratio,
            "budget": self.budget,
            "passed": self.passed,
            "n_samples": self.n_samples,
            "n_degenerate": self.n_degenerate,
            "sampler": self.sampler,
            "control": self.control,
            "evidence": "sampled",
        }
        if self.worst_pair is not None:
            t, a, b = self.worst_pair
            out["worst_pair"] = {"t": t, "xi": a.to_dict(), "eta": b.to_dict()}
        return out


@dataclass
class A2Report:
    sup_value: float
    jump_integral: float
    T: float
    n_grid: int

    @property
    def C(self) -> float:
        return self.sup_value + self.jump_integral

    def to_dict(self) -> dict[str, Any]:
        return {
            "assumption": "A2",
            "sup_value": self.sup_value,
            "jump_integral": self.jump_integral,
            "C": self.C,
            "T": self.T,
            "n_grid": self.n_grid,
        }


def _sq(v: np.ndarray, axes: int) -> np.ndarray:
    return np.sum(v * v, axis=tuple(range(-axes, 0)))


def _half_terms(h: CoefficientHalf, t: float, x, y) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Squared drift, squared diffusion and the two jump sums for one half."""
    drift = _sq(h.b(t, x) - h.b(t, y), 1)
    diff = _sq(h.sigma(t, x) - h.sigma(t, y), 2)
    jsq = np.zeros_like(drift)
    jabs = np.zeros_like(drift)
    for k, nu in enumerate(h.measure.weights):
        g = h.gamma(t, x, k) - h.gamma(t, y, k)
        n2 = _sq(g, 1)
        jsq = jsq + nu * n2
        jabs = jabs + nu * np.sqrt(n2)
    return drift + diff, jsq, jabs


def a1_lhs(cs: CoefficientSet, t: float, x, y) -> np.ndarray:
    """All six terms of the (A1) left side for a batch of pairs."""
    p, jsq, jabs = _half_terms(cs.unbarred, t, x, y)
    pb, jsqb, jabsb = _half_terms(cs.barred, t, x, y)
    return p + pb + jsq + jsqb + jabs * jabs + jabsb * jabsb


def check_A1(
    cs: CoefficientSet,
    u: ControlFunction,
    sampler: Sampler | None = None,
    n_samples: int = 1000,
    K: float | None = None,
    seed: int = 0,
    batch: int = 512,
) -> A1Report:
    """Max over sampled pairs of the (A1) left side over ``s u(s)``, ``s = ||xi - eta||^2``.

    Pairs with ``xi = eta`` are skipped and counted as degenerate.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sampler = sampler or independent_pairs(cs.d, cs.r0)
    rng = np.random.default_rng(seed)
    ratios = []
    worst = (-math.inf, None)
    degenerate = 0
    done = 0
    while done < n_samples:
        size = min(batch, n_samples - done)
        pb = sampler(rng, size)
        lhs = a1_lhs(cs, pb.t, pb.xi, pb.eta)
        diff = np.abs(pb.xi.values - pb.eta.values).max(axis=-2).sum(axis=-1)
        s = diff * diff
        keep = s > 0
        degenerate += int(np.count_nonzero(~keep))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(keep, lhs / u.su(np.where(keep, s, 1.0)), np.nan)
        ratios.append(r[keep])
        if np.any(keep):
            k = int(np.nanargmax(r))
            if r[k] > worst[0]:
                worst = (float(r[k]), (pb.t, pb.xi[k], pb.eta[k]))
        done += size
    allr = np.concatenate(ratios) if ratios else np.empty(0)
    max_ratio = float(allr.max()) if allr.size else 0.0
    return A1Report(
        max_ratio=max_ratio,
        worst_pair=worst[1],
        n_samples=n_samples,
        n_degenerate=degenerate,
        budget=K,
        sampler=getattr(sampler, "description", "custom"),
        control=u.tag,
        ratios=allr,
    )


def check_A2(cs: CoefficientSet, T: float, grid=None) -> A2Report:
    """Sup of the squared coefficients at the zero segment and the jump integral.

    The jump part ``sum_k nu_k (|gamma|^2 + |gamma'|^2)`` is integrated over
    the grid by the trapezoid rule.
    """
    grid = np.linspace(0.0, T, 101) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or grid.min() < 0 or grid.max() > T:
        raise ValueError("grid must be a nonempty subset of [0, T]")
    zero = Segment.constant(np.zeros(cs.d), cs.r0)
    cont = np.empty(len(grid))
    jump = np.empty(len(grid))
    for n, t in enumerate(grid):
        t = float(t)
        c = 0.0
        j = 0.0
        for h in (cs.unbarred, cs.barred):
            c += float(_sq(h.b(t, zero), 1)) + float(_sq(h.sigma(t, zero), 2))
            for k, nu in enumerate(h.measure.weights):
                j += nu * float(_sq(h.gamma(t, zero, k), 1))
        if not (math.isfinite(c) and math.isfinite(j)):
            raise NonFiniteCoefficient(f"non-finite coefficient at the zero segment, t={t}")
        cont[n] = c
        jump[n] = j
    integral = float(np.trapezoid(jump, grid)) if len(grid) > 1 else 0.0
    return A2Report(float(cont.max()), integral, float(T), len(grid))
