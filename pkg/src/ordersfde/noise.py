"""Seeded Brownian increments and marked Poisson arrivals.

Time is discretised on an integer tick grid: one base step is
``TICKS_PER_STEP`` ticks, so jump arrivals can be inserted into a solver grid
without float comparisons. Every realization is a pure function of its seed.

Per-path streams are derived from a master seed with ``numpy``'s
``SeedSequence`` (entropy ``(master, path_index)``) feeding the counter-based
Philox generator, so path ``k`` of an ensemble is the same no matter how the
ensemble is chunked or ordered.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InvalidHorizon, UnknownMark, UnsortedEvents, ZeroStep

TICKS_PER_STEP = 1 << 16

_GAUSS, _JUMPS, _BRIDGE, _INJECT = 0, 1, 2, 3


@dataclass(frozen=True)
class MarkMeasure:
    """Finite mark space ``E = {z_1..z_K}`` with intensities ``nu_k`` (1/time)."""

    marks: tuple = ()
    weights: tuple = ()
    names: tuple = ()

    def __post_init__(self):
        marks = tuple(float(z) for z in self.marks)
        weights = tuple(float(w) for w in self.weights)
        if len(marks) != len(weights):
            raise ValueError("marks and weights must have equal length")
        if any(not (math.isfinite(w) and w > 0) for w in weights):
            raise ValueError("mark weights must be finite and positive")
        names = tuple(self.names) or tuple(f"z{k + 1}" for k in range(len(marks)))
        if len(names) != len(marks):
            raise ValueError("names must match marks")
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "names", names)

    @classmethod
    def empty(cls) -> "MarkMeasure":
        return cls()

    @classmethod
    def single(cls, rate: float, mark: float = 1.0) -> "MarkMeasure":
        return cls((mark,), (rate,))

    @property
    def size(self) -> int:
        return len(self.marks)

    @property
    def total(self) -> float:
        return math.fsum(self.weights)

    def index(self, name_or_index) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            k = int(name_or_index)
            if not 0 <= k < self.size:
                raise UnknownMark(f"mark index {k} out of range")
            return k
        try:
            return self.names.index(name_or_index)
        except ValueError:
            raise UnknownMark(f"unknown mark {name_or_index!r}") from None

    def to_dict(self) -> dict[str, Any]:
        return {"marks": [{"name": n, "value": z, "rate": w} for n, z, w in zip(self.names, self.marks, self.weights)]}

    @classmethod
    def from_dict(cls, obj) -> "MarkMeasure":
        items = obj["marks"] if isinstance(obj, dict) else obj
        return cls(
            tuple(it.get("value", k + 1.0) for k, it in enumerate(items)),
            tuple(it["rate"] for it in items),
            tuple(it.get("name", f"z{k + 1}") for k, it in enumerate(items)),
        )


def _rng(seed, stream: int) -> np.random.Generator:
    entropy = list(seed) if isinstance(seed, (tuple, list)) else seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy, spawn_key=(stream,))))


def path_seed(master_seed: int, index: int) -> tuple[int, int]:
    """Seed of path ``index`` within the ensemble of ``master_seed``."""
    return (int(master_seed), int(index))


def step_count(t0: float, T: float, base_step: float) -> int:
    if not base_step > 0:
        raise ZeroStep("base_step must be positive")
    if not T > t0:
        raise InvalidHorizon(f"need T > t0, got t0={t0}, T={T}")
    ratio = (T - t0) / base_step
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise InvalidHorizon(f"base_step {base_step} does not divide T - t0 = {T - t0}")
    return n


@dataclass(frozen=True)
class NoiseRealization:
    """Brownian increments per base step plus marked arrivals.

    ``event_ticks`` count ticks from ``t0`` (strictly increasing, in
    ``(0, n_steps * TICKS_PER_STEP]``). ``bridge_normals`` hold one standard
    normal m-vector per event, used to split a base-step increment at the
    arrival time by Brownian-bridge sampling.
    """

    m: int
    t0: float
    T: float
    base_step: float
    increments: np.ndarray
    event_ticks: np.ndarray
    event_marks: np.ndarray
    bridge_normals: np.ndarray
    n_marks: int = 0
    seed: Any = None
    provenance: dict = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.increments.shape[0]

    @property
    def tick(self) -> float:
        return self.base_step / TICKS_PER_STEP

    @property
    def event_times(self) -> np.ndarray:
        return self.t0 + self.event_ticks * self.tick

    @property
    def n_events(self) -> int:
        return len(self.event_ticks)

    def events(self) -> list[tuple[float, int]]:
        return [(float(t), int(k)) for t, k in zip(self.event_times, self.event_marks)]

    def truncate(self, T: float) -> "NoiseRealization":
        """Keep only the part of the realization on [t0, T]."""
        n = step_count(self.t0, T, self.base_step)
        if n > self.n_steps:
            raise InvalidHorizon("cannot extend a realization by truncation")
        keep = self.event_ticks <= n * TICKS_PER_STEP
        return replace(
            self,
            T=T,
            increments=self.increments[:n],
            event_ticks=self.event_ticks[keep],
            event_marks=self.event_marks[keep],
            bridge_normals=self.bridge_normals[keep],
        )

    def coarsen(self, factor: int) -> "NoiseRealization":
        """Same Brownian path seen on a grid ``factor`` times coarser.

        Event ticks are rescaled (rounded up onto the coarser tick grid).
        """
        if self.n_steps % factor:
            raise InvalidHorizon("factor must divide the number of steps")
        inc = self.increments.reshape(self.n_steps // factor, factor, self.m).sum(axis=1)
        ticks = -(-self.event_ticks // factor)
        keep = np.concatenate([[True], np.diff(ticks) > 0]) if len(ticks) else np.zeros(0, bool)
        return replace(
            self,
            base_step=self.base_step * factor,
            increments=inc,
            event_ticks=ticks[keep],
            event_marks=self.event_marks[keep],
            bridge_normals=self.bridge_normals[keep],
        )

    # -- serialisation --------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "t0": self.t0,
            "T": self.T,
            "base_step": self.base_step,
            "ticks_per_step": TICKS_PER_STEP,
            "n_marks": self.n_marks,
            "seed": list(self.seed) if isinstance(self.seed, (tuple, list)) else self.seed,
            "provenance": self.provenance,
            "increments": self.increments.tolist(),
            "event_ticks": self.event_ticks.tolist(),
            "event_marks": self.event_marks.tolist(),
            "bridge_normals": self.bridge_normals.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "NoiseRealization":
        if obj.get("ticks_per_step", TICKS_PER_STEP) != TICKS_PER_STEP:
            raise ValueError("dump uses a different tick resolution")
        m = int(obj["m"])
        seed = obj.get("seed")
        return cls(
            m=m,
            t0=float(obj["t0"]),
            T=float(obj["T"]),
            base_step=float(obj["base_step"]),
            increments=np.asarray(obj["increments"], dtype=float).reshape(-1, m),
            event_ticks=np.asarray(obj["event_ticks"], dtype=np.int64),
            event_marks=np.asarray(obj["event_marks"], dtype=np.int64),
            bridge_normals=np.asarray(obj["bridge_normals"], dtype=float).reshape(-1, m),
            n_marks=int(obj.get("n_marks", 0)),
            seed=tuple(seed) if isinstance(seed, list) else seed,
            provenance=dict(obj.get("provenance", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "NoiseRealization":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, NoiseRealization):
            return NotImplemented
        return (
            (self.m, self.t0, self.T, self.base_step, self.n_marks)
            == (other.m, other.t0, other.T, other.base_step, other.n_marks)
            and np.array_equal(self.increments, other.increments)
            and np.array_equal(self.event_ticks, other.event_ticks)
            and np.array_equal(self.event_marks, other.event_marks)
            and np.array_equal(self.bridge_normals, other.bridge_normals)
        )

    __hash__ = None  # type: ignore[assignment]


def generate(
    seed,
    m: int,
    measure: MarkMeasure,
    t0: float,
    T: float,
    base_step: float,
) -> NoiseRealization:
    """Draw one realization of (B, N) on [t0, T].

    Increments are N(0, base_step) per coordinate; arrivals form a Poisson
    process of rate ``measure.total`` with marks drawn proportionally to the
    weights, from a stream independent of the Gaussian one.
    """
    n = step_count(t0, T, base_step)
    if m < 0:
        raise ValueError("m must be nonnegative")
    increments = _rng(seed, _GAUSS).normal(0.0, math.sqrt(base_step), size=(n, m))
    n_ticks = n * TICKS_PER_STEP
    ticks = np.zeros(0, dtype=np.int64)
    marks = np.zeros(0, dtype=np.int64)
    if measure.size:
        g = _rng(seed, _JUMPS)
        count = g.poisson(measure.total * (T - t0))
        u = g.uniform(0.0, n_ticks, size=count)
        ticks = np.unique(np.minimum(np.floor(u).astype(np.int64) + 1, n_ticks))
        p = np.asarray(measure.weights) / measure.total
        marks = g.choice(measure.size, size=len(ticks), p=p).astype(np.int64)
    bridge = _rng(seed, _BRIDGE).normal(size=(len(ticks), m))
    return NoiseRealization(
        m=m,
        t0=float(t0),
        T=float(T),
        base_step=float(base_step),
        increments=increments,
        event_ticks=ticks,
        event_marks=marks,
        bridge_normals=bridge,
        n_marks=measure.size,
        seed=tuple(seed) if isinstance(seed, (tuple, list)) else seed,
        provenance={"generator": "Philox/SeedSequence", "rate": measure.total},
    )


def generate_paths(master_seed: int, indices: Iterable[int], **kwargs) -> list[NoiseRealization]:
    return [generate(path_seed(master_seed, k), **kwargs) for k in indices]


def inject_events(noise: NoiseRealization, events: Sequence[tuple[float, int]]) -> NoiseRealization:
    """Replace the Poisson stream by a prescribed list of ``(time, mark_index)``.

    Times are snapped to the tick grid. The Gaussian stream is untouched;
    bridge normals for the injected events come from a dedicated substream.
    """
    ticks, marks = [], []
    for t, k in events:
        tick = int(round((float(t) - noise.t0) / noise.tick))
        if tick <= 0 or tick > noise.n_steps * TICKS_PER_STEP:
            raise UnsortedEvents(f"event time {t} outside (t0, T]")
        if ticks and tick <= ticks[-1]:
            raise UnsortedEvents("event times must be strictly increasing")
        if not isinstance(k, (int, np.integer)) or not 0 <= int(k) < noise.n_marks:
            raise UnknownMark(f"mark {k!r} is not a valid mark index")
        ticks.append(tick)
        marks.append(int(k))
    seed = noise.seed if noise.seed is not None else 0
    bridge = _rng(seed, _INJECT).normal(size=(len(ticks), noise.m))
    return replace(
        noise,
        event_ticks=np.asarray(ticks, dtype=np.int64),
        event_marks=np.asarray(marks, dtype=np.int64),
        bridge_normals=bridge,
        provenance={**noise.provenance, "injected": True},
    )
