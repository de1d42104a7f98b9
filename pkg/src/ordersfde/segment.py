"""Cadlag path segments on [-r0, 0] and solution histories.

A path is stored as a list of nodes with piecewise-linear interpolation
between them. Discontinuities only happen at nodes; such a node carries the
left limit (``pre``) in addition to its value. Evaluating at a node returns
the value (right continuity), evaluating just before it approaches ``pre``.

All objects here are immutable after construction.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

import numpy as np

from .errors import OutOfRange, SkeletonMismatch

# Relative tolerance used to match node times (times built from a tick grid
# carry rounding at the 1e-16 level).
TIME_TOL = 1e-9


def _as_values(values, d: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if d in (None, 1) else arr[None, :]
    if arr.ndim != 2:
        raise ValueError("node values must be a 2-d array (nodes x d)")
    return arr


class Segment:
    """A cadlag R^d-valued path on [-r0, 0].

    Parameters
    ----------
    times : increasing node times, first ``-r0`` and last ``0``.
    values : array ``(n_nodes, d)`` of values at the nodes.
    pre : optional array of left limits at the nodes; equal to ``values``
        where the path is continuous.
    """

    __slots__ = ("times", "values", "pre", "r0", "d", "_jump_mask")

    def __init__(self, times, values, pre=None, r0: float | None = None):
        times = np.asarray(times, dtype=float).reshape(-1)
        values = _as_values(values)
        if len(times) != len(values):
            raise ValueError("times and values have different lengths")
        if len(times) == 0:
            raise ValueError("a segment needs at least one node")
        if np.any(np.diff(times) <= 0):
            raise ValueError("node times must be strictly increasing")
        if r0 is None:
            r0 = -float(times[0])
        if r0 < 0:
            raise ValueError("r0 must be nonnegative")
        if abs(times[0] + r0) > TIME_TOL * max(1.0, r0) or abs(times[-1]) > TIME_TOL * max(1.0, r0):
            raise ValueError(f"nodes must span [-{r0}, 0], got [{times[0]}, {times[-1]}]")
        times = times.copy()
        times[0], times[-1] = -r0, 0.0
        if len(times) == 1 and r0 != 0:
            raise ValueError("a single node only describes a segment with r0 = 0")
        pre = values.copy() if pre is None else _as_values(pre, values.shape[1])
        if pre.shape != values.shape:
            raise ValueError("pre must have the same shape as values")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(pre))):
            raise ValueError("segment values must be finite")
        # the left limit at -r0 is outside the segment
        pre[0] = values[0]
        for a in (times, values, pre):
            a.setflags(write=False)
        self.times = times
        self.values = values
        self.pre = pre
        self.r0 = float(r0)
        self.d = values.shape[1]
        self._jump_mask = np.any(pre != values, axis=1)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, value, r0: float = 0.0, d: int | None = None) -> "Segment":
        v = np.atleast_1d(np.asarray(value, dtype=float))
        if d is not None and v.size == 1:
            v = np.full(d, float(v[0]))
        times = [0.0] if r0 == 0 else [-r0, 0.0]
        return cls(times, np.tile(v, (len(times), 1)), r0=r0)

    @classmethod
    def linear(cls, start, end, r0: float) -> "Segment":
        """Straight line from ``start`` at -r0 to ``end`` at 0."""
        a = np.atleast_1d(np.asarray(start, dtype=float))
        b = np.atleast_1d(np.asarray(end, dtype=float))
        if r0 == 0:
            return cls([0.0], b[None, :], r0=0.0)
        return cls([-r0, 0.0], np.vstack([a, b]), r0=r0)

    @classmethod
    def from_function(cls, f, r0: float, n_nodes: int, d: int = 1) -> "Segment":
        times = np.array([0.0]) if r0 == 0 else np.linspace(-r0, 0.0, n_nodes)
        vals = np.array([np.broadcast_to(np.asarray(f(th), dtype=float), (d,)) for th in times])
        return cls(times, vals, r0=r0)

    # -- JSON literal ---------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        jumps = [[float(self.times[k]), self.pre[k].tolist()] for k in np.flatnonzero(self._jump_mask)]
        return {
            "r0": self.r0,
            "d": self.d,
            "nodes": [[float(t), v.tolist()] for t, v in zip(self.times, self.values)],
            "jumps": jumps,
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "Segment":
        r0 = float(obj["r0"])
        d = int(obj["d"])
        nodes = obj["nodes"]
        times = [float(t) for t, _ in nodes]
        values = np.array([np.broadcast_to(np.asarray(v, dtype=float), (d,)) for _, v in nodes])
        pre = values.copy()
        for theta, v in obj.get("jumps", []):
            k = int(np.argmin(np.abs(np.asarray(times) - float(theta))))
            if abs(times[k] - float(theta)) > TIME_TOL * max(1.0, r0):
                raise ValueError(f"jump at theta={theta} is not a node")
            pre[k] = np.broadcast_to(np.asarray(v, dtype=float), (d,))
        return cls(times, values, pre=pre, r0=r0)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Segment":
        return cls.from_dict(json.loads(text))

    # -- evaluation -----------------------------------------------------------
    @property
    def batch_shape(self) -> tuple[int, ...]:
        return ()

    @property
    def jump_times(self) -> np.ndarray:
        return self.times[self._jump_mask]

    def _locate(self, theta: float) -> int:
        if theta < -self.r0 - TIME_TOL * max(1.0, self.r0) or theta > TIME_TOL * max(1.0, self.r0):
            raise OutOfRange(f"theta={theta} outside [-{self.r0}, 0]")
        return int(np.searchsorted(self.times, theta, side="right")) - 1

    def __call__(self, theta: float) -> np.ndarray:
        """Right-continuous value at ``theta``."""
        k = self._locate(theta)
        if k < 0:
            return self.values[0].copy()
        if k == len(self.times) - 1 or theta == self.times[k]:
            return self.values[k].copy()
        t0, t1 = self.times[k], self.times[k + 1]
        w = (theta - t0) / (t1 - t0)
        return self.values[k] + w * (self.pre[k + 1] - self.values[k])

    def left(self, theta: float) -> np.ndarray:
        """Left limit at ``theta`` (equal to the value away from jumps)."""
        k = self._locate(theta)
        if k >= 0 and theta == self.times[k]:
            return self.pre[k].copy()
        return self(theta)

    @property
    def value0(self) -> np.ndarray:
        return self.values[-1].copy()

    # -- algebra --------------------------------------------------------------
    def _new(self, values, pre) -> "Segment":
        return Segment(self.times, values, pre, r0=self.r0)

    def __neg__(self) -> "Segment":
        return self._new(-self.values, -self.pre)

    def __add__(self, other: "Segment") -> "Segment":
        a, b = align(self, other)
        return a._new(a.values + b.values, a.pre + b.pre)

    def __sub__(self, other: "Segment") -> "Segment":
        return self + (-other)

    def scale(self, c: float) -> "Segment":
        return self._new(c * self.values, c * self.pre)

    def shift(self, vector) -> "Segment":
        v = np.asarray(vector, dtype=float)
        return self._new(self.values + v, self.pre + v)

    def refine(self, times: Iterable[float]) -> "Segment":
        """Same path on a node set containing ``times``."""
        new = np.union1d(self.times, np.asarray(list(times), dtype=float))
        new = _dedupe_times(new, self.r0)
        vals = np.array([self(t) for t in new])
        pre = np.array([self.left(t) for t in new])
        return Segment(new, vals, pre, r0=self.r0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Segment):
            return NotImplemented
        return (
            self.r0 == other.r0
            and self.times.shape == other.times.shape
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.pre, other.pre)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Segment(d={self.d}, r0={self.r0}, nodes={len(self.times)}, jumps={int(self._jump_mask.sum())})"


def _dedupe_times(times: np.ndarray, r0: float) -> np.ndarray:
    tol = TIME_TOL * max(1.0, r0)
    keep = np.concatenate([[True], np.diff(times) > tol])
    out = times[keep]
    out[0], out[-1] = -r0, 0.0
    return out


def align(a: Segment, b: Segment) -> tuple[Segment, Segment]:
    """Refine both segments to the union of their node sets."""
    if a.d != b.d:
        raise SkeletonMismatch(f"dimension mismatch: {a.d} vs {b.d}")
    if abs(a.r0 - b.r0) > TIME_TOL * max(1.0, a.r0):
        raise SkeletonMismatch(f"delay mismatch: {a.r0} vs {b.r0}")
    if a.times.shape == b.times.shape and np.array_equal(a.times, b.times):
        return a, b
    union = _dedupe_times(np.union1d(a.times, b.times), a.r0)
    return a.refine(union), b.refine(union)


def sup_norm(s: Segment) -> float:
    """Sum over components of the sup of |s^i| (extrema sit at nodes or left limits)."""
    both = np.concatenate([np.abs(s.values), np.abs(s.pre)], axis=0)
    return float(both.max(axis=0).sum())


def leq(a: Segment, b: Segment) -> tuple[bool, tuple[int, float] | None]:
    """Componentwise order ``a <= b``.

    Returns ``(True, None)`` or ``(False, (i, theta))`` where ``i`` is the
    0-based component and ``theta`` the first node (in time order) at which
    ``a^i > b^i`` either for the value or for the left limit.
    """
    a, b = align(a, b)
    bad = (a.values > b.values) | (a.pre > b.pre)
    if not bad.any():
        return True, None
    k, i = np.argwhere(bad)[0]
    return False, (int(i), float(a.times[k]))


def meet(a: Segment, b: Segment) -> Segment:
    """Nodewise componentwise minimum.

    With piecewise-linear interpolation the exact pointwise minimum can have
    kinks between nodes; the node sets are first refined with the crossing
    points so the result is the true ``min`` path.
    """
    a, b = align(a, b)
    a, b = _insert_crossings(a, b)
    return Segment(a.times, np.minimum(a.values, b.values), np.minimum(a.pre, b.pre), r0=a.r0)


def join(a: Segment, b: Segment) -> Segment:
    return -meet(-a, -b)


def _insert_crossings(a: Segment, b: Segment) -> tuple[Segment, Segment]:
    diff_r = a.values - b.values
    diff_l = a.pre - b.pre
    extra = []
    for k in range(len(a.times) - 1):
        lo, hi = diff_r[k], diff_l[k + 1]
        cross = (lo * hi) < 0
        for i in np.flatnonzero(cross):
            w = lo[i] / (lo[i] - hi[i])
            extra.append(a.times[k] + w * (a.times[k + 1] - a.times[k]))
    if not extra:
        return a, b
    return a.refine(extra), b.refine(extra)


def truncate(s: Segment, n: float) -> Segment:
    """Clip every node value and left limit into [-n, n]."""
    return Segment(s.times, np.clip(s.values, -n, n), np.clip(s.pre, -n, n), r0=s.r0)


class SegmentBatch:
    """A stack of continuous segments sharing one node skeleton.

    Used wherever many segments are pushed through a coefficient at once.
    ``values`` has shape ``batch_shape + (n_nodes, d)``.
    """

    __slots__ = ("times", "values", "r0", "d")

    def __init__(self, times, values, r0: float):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.r0 = float(r0)
        self.d = self.values.shape[-1]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.values.shape[:-2]

    def __len__(self) -> int:
        return self.values.shape[0]

    def __call__(self, theta: float) -> np.ndarray:
        n = len(self.times)
        if n == 1:
            return self.values[..., 0, :]
        k = int(np.searchsorted(self.times, theta, side="right")) - 1
        k = min(max(k, 0), n - 1)
        if k == n - 1 or theta == self.times[k]:
            return self.values[..., k, :]
        w = (theta - self.times[k]) / (self.times[k + 1] - self.times[k])
        return self.values[..., k, :] + w * (self.values[..., k + 1, :] - self.values[..., k, :])

    def __getitem__(self, idx) -> Segment:
        return Segment(self.times, self.values[idx], r0=self.r0)

    def sup_norm(self) -> np.ndarray:
        return np.abs(self.values).max(axis=-2).sum(axis=-1)


class History:
    """A cadlag path on [t0 - r0, T_end] from which segments are cut.

    ``times`` are node times, ``values`` the (right-continuous) node values and
    ``pre`` the left limits.
    """

    __slots__ = ("times", "values", "pre", "r0", "t0", "d", "_jump_mask")

    def __init__(self, times, values, pre=None, r0: float = 0.0, t0: float | None = None):
        times = np.asarray(times, dtype=float).reshape(-1)
        values = _as_values(values)
        pre = values.copy() if pre is None else _as_values(pre, values.shape[1])
        if np.any(np.diff(times) <= 0):
            raise ValueError("history node times must be strictly increasing")
        if t0 is None:
            t0 = float(times[0]) + r0
        pre[0] = values[0]
        for a in (times, values, pre):
            a.setflags(write=False)
        self.times, self.values, self.pre = times, values, pre
        self.r0, self.t0, self.d = float(r0), float(t0), values.shape[1]
        self._jump_mask = np.any(pre != values, axis=1)

    @classmethod
    def from_segment(cls, xi: Segment, t0: float = 0.0) -> "History":
        return cls(t0 + xi.times, xi.values, xi.pre, r0=xi.r0, t0=t0)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def jump_times(self) -> np.ndarray:
        return self.times[self._jump_mask]

    def _tol(self) -> float:
        return TIME_TOL * max(1.0, abs(self.t_end), self.r0)

    def value_at(self, t: float) -> np.ndarray:
        tol = self._tol()
        if t < self.times[0] - tol or t > self.t_end + tol:
            raise OutOfRange(f"t={t} outside [{self.times[0]}, {self.t_end}]")
        k = int(np.searchsorted(self.times, t + tol, side="right")) - 1
        if abs(t - self.times[k]) <= tol or k == len(self.times) - 1:
            return self.values[k].copy()
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        return self.values[k] + w * (self.pre[k + 1] - self.values[k])

    def left_value_at(self, t: float) -> np.ndarray:
        tol = self._tol()
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) <= tol:
            return self.pre[k].copy()
        return self.value_at(t)

    def segment_at(self, t: float) -> Segment:
        """The segment ``X_t(theta) = X(t + theta)``."""
        return self._window(t, left=False)

    def left_segment_at(self, t: float) -> Segment:
        """``X_{t-}``: as ``X_t`` but with the left limit at theta = 0."""
        if t <= self.t0:
            raise OutOfRange("left segments are only defined for t > t0")
        return self._window(t, left=True)

    def _window(self, t: float, left: bool) -> Segment:
        tol = self._tol()
        lo = t - self.r0
        if lo < self.times[0] - tol or t > self.t_end + tol:
            raise OutOfRange(f"history does not cover [{lo}, {t}]")
        inside = (self.times > lo + tol) & (self.times < t - tol)
        idx = np.flatnonzero(inside)
        times = [-self.r0] + list(self.times[idx] - t)
        values = [self.value_at(lo)] + list(self.values[idx])
        pre = [values[0]] + list(self.pre[idx])
        if self.r0 > 0:
            times.append(0.0)
            end = self.value_at(t)
            end_pre = self.left_value_at(t)
            if left:
                end = end_pre
            values.append(end)
            pre.append(end_pre)
        elif left:
            values = [self.left_value_at(t)]
            pre = list(values)
        else:
            values = [self.value_at(t)]
            pre = list(values)
        return Segment(times, np.array(values), np.array(pre), r0=self.r0)

    def sup_sq(self) -> float:
        """sup over the whole history of |X(t)|^2 (Euclidean)."""
        both = np.concatenate([self.values, self.pre], axis=0)
        return float(np.max(np.sum(both * both, axis=1)))

    def restrict(self, t_end: float) -> "History":
        tol = self._tol()
        keep = self.times <= t_end + tol
        return History(self.times[keep], self.values[keep], self.pre[keep], r0=self.r0, t0=self.t0)

    def __repr__(self) -> str:
        return f"History(d={self.d}, r0={self.r0}, t=[{self.times[0]}, {self.t_end}], nodes={len(self.times)})"


def same_path(a: Segment, b: Segment, atol: float = 0.0) -> bool:
    """Whether two segments describe the same path (node sets may differ)."""
    a, b = align(a, b)
    return bool(np.allclose(a.values, b.values, rtol=0.0, atol=atol) and np.allclose(a.pre, b.pre, rtol=0.0, atol=atol))
