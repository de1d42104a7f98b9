"""Constructive existence machinery: Bihari bounds, mollification, truncation,
the approximation cascade and a discrete pathwise-uniqueness cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .coeff.control import ControlFunction
from .coeff.core import CoefficientHalf, as_half
from .errors import RangeExceeded
from .noise import TICKS_PER_STEP, NoiseRealization, _rng, generate, path_seed
from .segment import History, Segment
from .solver import PathResult, SolverConfig, solve_path

# substream for mollifier samples; 0-3 are taken by the noise generator
_MOLLIFIER_STREAM = 7

# log-scale range in which G is inverted; exp(700) is near the float limit
_V_MAX = 700.0


class BihariKernel:
    """``G(s) = int_1^s dr / (r u(r))`` and its inverse.

    ``G`` is computed in the variable ``v = log r`` by adaptive quadrature
    (closed form ``log s`` for ``u = 1``); the inverse uses bisection in ``v``.
    """

    def __init__(self, u: ControlFunction):
        self.u = u
        self._closed = u.tag == "one"

    def _g(self, v: float) -> float:
        if self._closed:
            return v
        val, _ = integrate.quad(
            lambda w: 1.0 / float(self.u(math.exp(w))), 0.0, v, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        return val

    def G(self, s: float) -> float:
        if not s > 0:
            raise ValueError("G is defined for s > 0")
        return self._g(math.log(s))

    def G_inv(self, y: float) -> float:
        if self._closed:
            if abs(y) > _V_MAX:
                raise RangeExceeded(f"G^-1({y}) outside the representable range")
            return math.exp(y)
        lo, hi = -1.0, 1.0
        while self._g(hi) < y:
            hi *= 2.0
            if hi > _V_MAX:
                if self._g(_V_MAX) < y:
                    raise RangeExceeded(f"G^-1({y}) beyond s = exp({_V_MAX})")
                hi = _V_MAX
                break
        while self._g(lo) > y:
            lo *= 2.0
            if lo < -_V_MAX:
                if self._g(-_V_MAX) > y:
                    raise RangeExceeded(f"G^-1({y}) below s = exp(-{_V_MAX})")
                lo = -_V_MAX
                break
        v = optimize.bisect(lambda w: self._g(w) - y, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        return math.exp(v)


def bihari_bound(k: BihariKernel, a: float, C: float, t: float) -> float:
    """``G^{-1}(G(a) + C t)``; 0 for ``a = 0`` since ``G(0+) = -inf`` for controls in the class."""
    if a < 0 or C < 0 or t < 0:
        raise ValueError("a, C and t must be nonnegative")
    if a == 0:
        return 0.0
    if C == 0 or t == 0:
        return float(a)
    return k.G_inv(k.G(a) + C * t)


# -- mollification ------------------------------------------------------------


@dataclass(frozen=True)
class MollifierLaw:
    """Frozen samples of the Brownian segment ``eta(theta) = W(r0 + 1 + theta)``.

    ``eta`` has shape ``(samples, len(theta), d)``; between grid points the
    samples are interpolated linearly.
    """

    r0: float
    d: int
    samples: int
    seed: Any
    theta: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)

    @classmethod
    def create(cls, r0: float, d: int = 1, samples: int = 10_000, seed=0, n_grid: int = 65) -> "MollifierLaw":
        theta = np.array([0.0]) if r0 == 0 else np.linspace(-r0, 0.0, n_grid)
        g = _rng(seed, _MOLLIFIER_STREAM)
        first = g.standard_normal((samples, 1, d))  # W(1) at theta = -r0
        steps = g.standard_normal((samples, len(theta) - 1, d)) * np.sqrt(np.diff(theta))[None, :, None]
        eta = np.cumsum(np.concatenate([first, steps], axis=1), axis=1)
        return cls(float(r0), d, samples, seed, theta, eta)

    def variance_at(self, theta: float) -> float:
        return self.r0 + 1.0 + theta

    def __call__(self, theta: float) -> np.ndarray:
        if len(self.theta) == 1:
            return self.eta[:, 0]
        k = int(np.searchsorted(self.theta, theta, side="right")) - 1
        k = min(max(k, 0), len(self.theta) - 1)
        if k == len(self.theta) - 1 or theta == self.theta[k]:
            return self.eta[:, k]
        w = (theta - self.theta[k]) / (self.theta[k + 1] - self.theta[k])
        return self.eta[:, k] + w * (self.eta[:, k + 1] - self.eta[:, k])


class _ShiftedProbe:
    """``x + eta / n`` for every frozen sample; adds a sample axis to the batch."""

    __slots__ = ("x", "law", "n", "batch_shape")

    def __init__(self, x, law: MollifierLaw, n: float):
        self.x = x
        self.law = law
        self.n = n
        self.batch_shape = tuple(x.batch_shape) + (law.samples,)

    def __call__(self, theta):
        return np.asarray(self.x(theta))[..., None, :] + self.law(theta) / self.n


def _sample_mean(v: np.ndarray, axis: int) -> np.ndarray:
    # mean about the first sample: exact when all samples agree
    ref = np.take(v, [0], axis=axis)
    return np.squeeze(ref, axis) + np.mean(v - ref, axis=axis)


def mollify(cs, law: MollifierLaw, n: int) -> CoefficientHalf:
    """Average each coefficient over ``x + eta / n`` with the frozen samples of ``law``."""
    half = as_half(cs)
    if n < 1:
        raise ValueError("n must be >= 1")
    if law.d != half.d or abs(law.r0 - half.r0) > 1e-12:
        raise ValueError("mollifier law does not match the coefficient dimensions")

    def drift(t, x):
        return _sample_mean(half.b(t, _ShiftedProbe(x, law, n)), len(x.batch_shape))

    def diffusion(t, x):
        return _sample_mean(half.sigma(t, _ShiftedProbe(x, law, n)), len(x.batch_shape))

    jump = None
    if half.jump is not None:

        def jump(t, x, z):
            return _sample_mean(np.asarray(half.jump(t, _ShiftedProbe(x, law, n), z), dtype=float), len(x.batch_shape))

    return replace(half, drift=drift, diffusion=diffusion, jump=jump, name=f"{half.name}_moll{n}")


@dataclass(frozen=True)
class MCEstimate:
    mean: np.ndarray
    half_width: np.ndarray  # 3 standard errors

    def contains(self, value) -> bool:
        return bool(np.all(np.abs(np.asarray(value) - self.mean) <= self.half_width))


def mollified_drift_estimate(cs, law: MollifierLaw, n: int, t: float, xi: Segment) -> MCEstimate:
    """Mollified drift at one segment with a 3-sigma Monte Carlo interval."""
    half = as_half(cs)
    vals = half.b(t, _ShiftedProbe(xi, law, n))  # (samples, d)
    mean = _sample_mean(vals, 0)
    se = np.std(vals, axis=0, ddof=1) / math.sqrt(law.samples)
    return MCEstimate(mean, 3.0 * se)


# -- truncation ---------------------------------------------------------------


class _ClippedProbe:
    __slots__ = ("x", "n", "batch_shape")

    def __init__(self, x, n: float):
        self.x = x
        self.n = n
        self.batch_shape = x.batch_shape

    def __call__(self, theta):
        return np.clip(self.x(theta), -self.n, self.n)


def truncate_coeff(cs, n: float) -> CoefficientHalf:
    """``b_n(t, xi) = b(min(t, n), alpha_n(xi))`` with ``alpha_n`` clipping into ``[-n, n]``."""
    half = as_half(cs)

    def drift(t, x):
        return half.b(min(t, n), _ClippedProbe(x, n))

    def diffusion(t, x):
        return half.sigma(min(t, n), _ClippedProbe(x, n))

    jump = None
    if half.jump is not None:

        def jump(t, x, z):
            return half.jump(min(t, n), _ClippedProbe(x, n), z)

    return replace(half, drift=drift, diffusion=diffusion, jump=jump, name=f"{half.name}_trunc{n}")


# -- approximation cascade ------------------------------------------------------


def sup_distance(a: History, b: History) -> float:
    """``sup_t |a(t) - b(t)|`` over the common nodes of two histories on one grid."""
    n = min(len(a.times), len(b.times))
    if not np.allclose(a.times[:n], b.times[:n], rtol=0, atol=1e-12 * max(1.0, abs(a.times[-1]))):
        raise ValueError("histories are not on a common grid")
    dv = np.linalg.norm(a.values[:n] - b.values[:n], axis=1)
    dp = np.linalg.norm(a.pre[:n] - b.pre[:n], axis=1)
    return float(max(dv.max(), dp.max()))


@dataclass
class CascadeResult:
    levels: list
    reference_level: int
    paths: dict
    gaps: dict  # n -> sup distance to the next level

    def gap_table(self) -> list[dict]:
        nxt = self.levels[1:] + [self.reference_level]
        return [{"n": n, "next": m, "D": self.gaps[n]} for n, m in zip(self.levels, nxt)]

    @property
    def top(self) -> PathResult:
        return self.paths[self.levels[-1]]

    def to_dict(self) -> dict[str, Any]:
        return {"levels": self.levels, "reference_level": self.reference_level, "gaps": self.gap_table()}


def approximation_cascade(
    cs,
    xi: Segment,
    cfg: SolverConfig,
    law: MollifierLaw,
    levels: Sequence[int] = (1, 2, 4, 8, 16),
    noise: Optional[NoiseRealization] = None,
    seed=0,
    truncate: bool = False,
) -> CascadeResult:
    """Solve the mollified equations on one realization and tabulate ``D(n)``.

    ``D(n)`` is the sup distance between level ``n`` and the next level; the
    last listed level is compared with an extra reference level of twice its
    index so every listed level gets a gap.
    """
    levels = [int(n) for n in levels]
    if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be increasing")
    half = as_half(cs)
    if noise is None:
        noise = generate(seed, half.m, half.measure, cfg.t0, cfg.T, cfg.h)
    ref = 2 * levels[-1]
    paths = {}
    for n in levels + [ref]:
        base = truncate_coeff(half, n) if truncate else half
        paths[n] = solve_path(mollify(base, law, n), xi, noise, cfg)
    nxt = levels[1:] + [ref]
    gaps = {n: sup_distance(paths[n].history, paths[m].history) for n, m in zip(levels, nxt)}
    return CascadeResult(levels, ref, paths, gaps)


# -- uniqueness ---------------------------------------------------------------


def reference_solve(cs, xi: Segment, noise: NoiseRealization, cfg: SolverConfig) -> History:
    """A deliberately plain re-implementation of the Euler scheme.

    It rebuilds the history and cuts a fresh :class:`Segment` for every
    coefficient call, and sums each increment diffusion-first without
    compensation.
    """
    half = as_half(cs)
    if noise.base_step != cfg.h:
        noise = noise.coarsen(int(round(cfg.h / noise.base_step)))
    n = cfg.n_steps
    tick = cfg.h / TICKS_PER_STEP
    times = list(cfg.t0 + xi.times)
    values = [v.copy() for v in xi.values]
    pre = [v.copy() for v in xi.pre]

    def hist():
        return History(times, np.array(values), np.array(pre), r0=half.r0, t0=cfg.t0)

    def coeffs(t):
        seg = hist().segment_at(t)
        return half.b(t, seg), half.sigma(t, seg)

    def step(x, b, s, dt, dB):
        return x + (s @ dB + b * dt)

    events = list(zip(noise.event_ticks.tolist(), noise.event_marks.tolist(), noise.bridge_normals))
    e = 0
    for k in range(n):
        start, end = k * TICKS_PER_STEP, (k + 1) * TICKS_PER_STEP
        x = values[-1].copy()
        b, s = coeffs(cfg.t0 + k * cfg.h)
        dB = noise.increments[k].copy()
        last = start
        closed = False
        while e < len(events) and events[e][0] <= end:
            tk, mk, z = events[e]
            e += 1
            frac = (tk - last) / (end - last)
            dB1 = frac * dB + math.sqrt(frac * (1.0 - frac) * (end - last) * tick) * z
            dB = dB - dB1
            x = step(x, b, s, (tk - last) * tick, dB1)
            te = cfg.t0 + tk * tick
            times.append(te)
            values.append(x.copy())
            pre.append(x.copy())
            g = half.gamma(te, hist().left_segment_at(te) if te > cfg.t0 else hist().segment_at(te), mk)
            post = x + g
            values[-1] = post
            x = post
            last = tk
            if tk == end:
                closed = True
                break
            b, s = coeffs(te)
        if not closed:
            x = step(x, b, s, (end - last) * tick, dB)
            times.append(cfg.t0 + (k + 1) * cfg.h)
            values.append(x.copy())
            pre.append(x.copy())
    return hist()


@dataclass
class UniquenessReport:
    distances: list
    seeds: list
    tol: float = 1e-12

    @property
    def max_distance(self) -> float:
        return max(self.distances) if self.distances else 0.0

    @property
    def passed(self) -> bool:
        return self.max_distance <= self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_distance": self.max_distance,
            "tol": self.tol,
            "passed": self.passed,
            "distances": self.distances,
            "seeds": [list(s) if isinstance(s, tuple) else s for s in self.seeds],
        }


def uniqueness_check(
    cs, xi: Segment, cfg: SolverConfig, seeds: Sequence, inject=None, tol: float = 1e-12
) -> UniquenessReport:
    """Sup distance between the engine and :func:`reference_solve` per seed."""
    from .noise import inject_events

    half = as_half(cs)
    dists = []
    used = []
    for sd in seeds:
        seed = path_seed(*sd) if isinstance(sd, tuple) else sd
        noise = generate(seed, half.m, half.measure, cfg.t0, cfg.T, cfg.h)
        if inject is not None:
            noise = inject_events(noise, inject)
        a = solve_path(half, xi, noise, cfg).history
        b = reference_solve(half, xi, noise, cfg)
        dists.append(sup_distance(a, b))
        used.append(seed)
    return UniquenessReport(dists, used, tol)
