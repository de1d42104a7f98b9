"""Random segment pairs used by the sampled condition checks.

A sampler is any callable ``sampler(rng, size) -> PairBatch``. All segments
in one batch share a node skeleton and one time ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .segment import SegmentBatch


@dataclass
class PairBatch:
    t: float
    xi: SegmentBatch
    eta: SegmentBatch
    component: Optional[np.ndarray] = None  # pinned component per sample

    def __len__(self) -> int:
        return len(self.xi)


Sampler = Callable[[np.random.Generator, int], PairBatch]


def skeleton(r0: float, n_nodes: int) -> np.ndarray:
    return np.array([0.0]) if r0 == 0 else np.linspace(-r0, 0.0, max(n_nodes, 2))


def random_batch(rng, size: int, d: int, r0: float, n_nodes: int = 9, scale: float = 1.0) -> SegmentBatch:
    times = skeleton(r0, n_nodes)
    return SegmentBatch(times, scale * rng.standard_normal((size, len(times), d)), r0)


def independent_pairs(d: int, r0: float, n_nodes: int = 9, scale: float = 1.0, t_max: float = 10.0) -> Sampler:
    """Independent Gaussian node values for both members of the pair."""

    def sampler(rng, size):
        t = float(rng.uniform(0.0, t_max))
        xi = random_batch(rng, size, d, r0, n_nodes, scale)
        eta = random_batch(rng, size, d, r0, n_nodes, scale)
        return PairBatch(t, xi, eta)

    sampler.description = f"independent N(0,{scale}^2) nodes, {n_nodes} nodes, t~U(0,{t_max})"
    return sampler


def ordered_pairs(
    d: int,
    r0: float,
    n_nodes: int = 9,
    scale: float = 1.0,
    t_max: float = 10.0,
    pin_endpoint: bool = True,
) -> Sampler:
    """Pairs ``xi <= xibar`` built as ``xibar = xi + delta`` with ``delta >= 0``.

    ``delta`` is a clipped Gaussian (``max(N, 0)``) per node. With
    ``pin_endpoint`` one random component per sample gets ``delta^i(0) = 0`` so
    the pair agrees there.
    """

    def sampler(rng, size):
        t = float(rng.uniform(0.0, t_max))
        xi = random_batch(rng, size, d, r0, n_nodes, scale)
        delta = np.maximum(scale * rng.standard_normal(xi.values.shape), 0.0)
        comp = None
        if pin_endpoint:
            comp = rng.integers(0, d, size=size)
            delta[np.arange(size), -1, comp] = 0.0
        return PairBatch(t, xi, SegmentBatch(xi.times, xi.values + delta, r0), comp)

    sampler.description = f"ordered, clipped-Gaussian gap, pinned={pin_endpoint}, {n_nodes} nodes"
    return sampler


def endpoint_pairs(d: int, r0: float, n_nodes: int = 9, scale: float = 1.0, t_max: float = 10.0) -> Sampler:
    """Unordered pairs that agree in one random component at theta = 0."""

    def sampler(rng, size):
        t = float(rng.uniform(0.0, t_max))
        xi = random_batch(rng, size, d, r0, n_nodes, scale)
        other = random_batch(rng, size, d, r0, n_nodes, scale).values.copy()
        comp = rng.integers(0, d, size=size)
        rows = np.arange(size)
        other[rows, -1, comp] = xi.values[rows, -1, comp]
        return PairBatch(t, xi, SegmentBatch(xi.times, other, r0), comp)

    sampler.description = f"unordered, equal at theta=0 in one component, {n_nodes} nodes"
    return sampler


def fixed_pairs(pairs, t: float = 0.0) -> Sampler:
    """Cycle through a fixed list of ``(xi_values, eta_values)`` node arrays.

    Handy for analytic probes such as pairs ``(delta, 0)`` with ``r0 = 0``.
    """
    xs = np.asarray([np.atleast_2d(np.asarray(a, dtype=float)) for a, _ in pairs])
    ys = np.asarray([np.atleast_2d(np.asarray(b, dtype=float)) for _, b in pairs])
    state = {"k": 0}

    def sampler(rng, size):
        idx = (state["k"] + np.arange(size)) % len(xs)
        state["k"] += size
        times = np.array([0.0])
        return PairBatch(t, SegmentBatch(times, xs[idx], 0.0), SegmentBatch(times, ys[idx], 0.0))

    sampler.description = f"fixed list of {len(xs)} pairs"
    return sampler
