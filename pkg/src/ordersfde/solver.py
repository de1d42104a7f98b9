"""Euler scheme for the coupled delay equations with jumps.

Every solve goes through one engine that advances an ensemble of paths on a
common base grid ``t0 + k h``. Jump arrivals are inserted into the grid:
inside a base step the Brownian increment is split at the arrival by a
Brownian bridge, the pre-jump value is recorded, and the jump is applied
using the left-limit segment. Drift and diffusion are evaluated at the left
node of every (sub)step.

The state is accumulated with Kahan compensation, so for instance ten steps
of a constant drift ``1`` with ``h = 0.1`` land exactly on ``1.0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .coeff.core import CoefficientHalf, CoefficientSet, as_half
from .errors import ConfigMismatch, InvalidHorizon, NonFiniteState, ThetaOutOfRange, ZeroStep
from .noise import TICKS_PER_STEP, NoiseRealization, generate, inject_events, path_seed
from .segment import History, Segment

H = TICKS_PER_STEP

RUNNING, STOPPED, FAILED = 0, 1, 2
STATUS_NAMES = {RUNNING: "completed", STOPPED: "stopped", FAILED: "failed"}


@dataclass(frozen=True)
class SolverConfig:
    """Base step ``h``, horizon ``[t0, T]`` and optional stopping radius ``R``.

    ``theta_snap`` is the distance (in ticks) below which a probe offset is
    treated as landing exactly on the tick grid.
    """

    h: float
    T: float
    t0: float = 0.0
    R: Optional[float] = None
    theta_snap: float = 1e-6

    def __post_init__(self):
        if not self.h > 0:
            raise ZeroStep("step must be positive")
        if not self.T > self.t0:
            raise InvalidHorizon(f"need T > t0, got t0={self.t0}, T={self.T}")
        if self.R is not None and not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def n_steps(self) -> int:
        ratio = (self.T - self.t0) / self.h
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
            raise InvalidHorizon(f"step {self.h} does not divide T - t0 = {self.T - self.t0}")
        return n

    def delay_steps(self, r0: float) -> int:
        ratio = r0 / self.h
        r = int(round(ratio))
        if abs(ratio - r) > 1e-9 * max(1.0, ratio):
            raise ConfigMismatch(f"r0 = {r0} is not a multiple of h = {self.h}")
        return r

    def to_dict(self) -> dict[str, Any]:
        return {"h": self.h, "t0": self.t0, "T": self.T, "R": self.R}


@dataclass
class PathResult:
    history: History
    history_bar: Optional[History] = None
    stop_time: Optional[float] = None
    n_steps: int = 0
    n_jumps: int = 0
    status: str = "completed"

    @property
    def coupled(self) -> bool:
        return self.history_bar is not None

    def sup_sq(self) -> float:
        return self.history.sup_sq()


@dataclass
class EnsembleResult:
    """Per-path summaries of an ensemble solve.

    ``d_max[p, i]`` is the running max of ``X^i - Xbar^i`` over all nodes
    (pre- and post-jump values included) from ``t0`` on; only set for
    coupled solves.
    """

    indices: np.ndarray
    sup_sq: np.ndarray
    status: np.ndarray
    stop_times: np.ndarray
    n_jumps: np.ndarray
    sup_sq_bar: Optional[np.ndarray] = None
    d_max: Optional[np.ndarray] = None
    histories: Optional[list] = None
    config: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return len(self.indices)

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(self.status == FAILED))

    @property
    def ok(self) -> np.ndarray:
        return self.status != FAILED

    @staticmethod
    def concat(parts: Sequence["EnsembleResult"]) -> "EnsembleResult":
        def cat(name):
            vals = [getattr(p, name) for p in parts]
            return None if vals[0] is None else np.concatenate(vals)

        hist = None if parts[0].histories is None else [h for p in parts for h in p.histories]
        return EnsembleResult(
            cat("indices"),
            cat("sup_sq"),
            cat("status"),
            cat("stop_times"),
            cat("n_jumps"),
            cat("sup_sq_bar"),
            cat("d_max"),
            hist,
            parts[0].config,
        )


def _kahan(x, c, v):
    y = v - c
    t = x + y
    return t, (t - x) - y


class _Probe:
    """Segment view handed to the coefficients during a solve."""

    __slots__ = ("side", "cur", "tick", "path", "batch_shape")

    def __init__(self, side: "_Side", cur: np.ndarray, tick: int, path: Optional[int]):
        self.side = side
        self.cur = cur
        self.tick = tick
        self.path = path
        self.batch_shape = cur.shape[:-1]

    def __call__(self, theta) -> np.ndarray:
        theta = float(theta)
        if theta == 0.0:
            return self.cur
        return self.side.lookup(self.tick, theta, self.path)


class _Side:
    """State of one equation (barred or not) across the ensemble."""

    def __init__(
        self, half: CoefficientHalf, xi: Segment, P: int, cfg: SolverConfig, n: int, r_steps: int, record: bool
    ):
        if xi.d != half.d or abs(xi.r0 - half.r0) > 1e-12:
            raise ConfigMismatch(
                f"initial segment has d={xi.d}, r0={xi.r0}; coefficients need d={half.d}, r0={half.r0}"
            )
        self.half = half
        self.xi = xi
        self.d = half.d
        self.r0 = half.r0
        self.h = cfg.h
        self.tick = cfg.h / H
        self.snap = cfg.theta_snap
        self.P = P
        self.slots = n + 1 if record else r_steps + 2
        self.V = np.empty((self.slots, P, self.d))
        self.x = np.tile(xi.value0, (P, 1))
        self.c = np.zeros((P, self.d))
        self.V[0] = self.x
        self.k_done = 0
        self.extras: list[dict[int, list]] = [dict() for _ in range(P)]
        self.extra_steps: dict[int, set] = {}
        both = np.concatenate([xi.values, xi.pre])
        self.sup_sq = np.full(P, float(np.max(np.sum(both * both, axis=1))))
        self.b = self.s = None

    # -- history lookup -------------------------------------------------------
    def lookup(self, cur: int, theta: float, path: Optional[int]) -> np.ndarray:
        if theta > 0 or theta < -self.r0 * (1 + 1e-12) - 1e-15:
            raise ThetaOutOfRange(f"probe at theta={theta} outside [-{self.r0}, 0]")
        q = theta * (H / self.h)
        qi = round(q)
        sig = cur + (int(qi) if abs(q - qi) <= self.snap else q)
        shape = (self.P, self.d) if path is None else (self.d,)
        if sig <= 0:
            return np.broadcast_to(self.xi(max(sig * self.tick, -self.r0)), shape).copy()
        j = int(sig // H)
        rem = sig - j * H
        S = self.slots
        if path is not None:
            if rem > 0 and j in self.extras[path]:
                return self._bracket(path, j, sig)
            a = self.V[j % S, path]
            if rem == 0:
                return a.copy()
            return a + (rem / H) * (self.V[(j + 1) % S, path] - a)
        a = self.V[j % S]
        if rem == 0:
            return a.copy()
        out = a + (rem / H) * (self.V[(j + 1) % S] - a)
        for p in self.extra_steps.get(j, ()):
            out[p] = self._bracket(p, j, sig)
        return out

    def _bracket(self, p: int, j: int, sig) -> np.ndarray:
        S = self.slots
        left_t, left_v = j * H, self.V[j % S, p]
        for tick, pre, post in self.extras[p][j]:
            if tick <= sig:
                left_t, left_v = tick, post
                continue
            return left_v + ((sig - left_t) / (tick - left_t)) * (pre - left_v)
        if j + 1 > self.k_done:
            raise RuntimeError("history lookup ahead of the solution")
        right_v = self.V[(j + 1) % S, p]
        return left_v + ((sig - left_t) / ((j + 1) * H - left_t)) * (right_v - left_v)

    def add_extra(self, p: int, step: int, tick: int, pre: np.ndarray, post: np.ndarray) -> list:
        entry = [tick, pre, post]
        self.extras[p].setdefault(step, []).append(entry)
        self.extra_steps.setdefault(step, set()).add(p)
        return entry

    # -- coefficient evaluation -------------------------------------------------
    def eval_base(self, t: float, tick: int) -> None:
        probe = _Probe(self, self.x, tick, None)
        self.b = self.half.b(t, probe)
        self.s = self.half.sigma(t, probe)
        if self.b.shape != (self.P, self.d) or self.s.shape != (self.P, self.d, self.half.m):
            raise ValueError(
                f"coefficient shapes {self.b.shape}, {self.s.shape}; "
                f"expected {(self.P, self.d)}, {(self.P, self.d, self.half.m)}"
            )

    def increment(self, b, s, dt: float, dB) -> np.ndarray:
        v = b * dt
        for j in range(s.shape[-1]):
            v = v + s[..., j] * dB[..., j, None]
        return v

    def history(self, p: int, t0: float, n_end: int, stop_tick: Optional[int]) -> History:
        times = list(t0 + self.xi.times)
        values = list(self.xi.values)
        pre = list(self.xi.pre)
        S = self.slots
        for k in range(n_end):
            node_pre = None
            for tick, e_pre, e_post in self.extras[p].get(k, ()):
                if stop_tick is not None and tick > stop_tick:
                    break
                if tick == (k + 1) * H:
                    node_pre = e_pre
                else:
                    times.append(t0 + tick * self.tick)
                    values.append(e_post)
                    pre.append(e_pre)
            if stop_tick is not None and stop_tick < (k + 1) * H:
                break
            v = self.V[(k + 1) % S, p]
            times.append(t0 + (k + 1) * self.h)
            values.append(v)
            pre.append(v if node_pre is None else node_pre)
        return History(times, np.array(values), np.array(pre), r0=self.r0, t0=t0)


def _check_noise(noise: NoiseRealization, cfg: SolverConfig, half: CoefficientHalf) -> NoiseRealization:
    if abs(noise.t0 - cfg.t0) > 1e-12:
        raise ConfigMismatch(f"noise starts at {noise.t0}, solver at {cfg.t0}")
    if noise.m != half.m:
        raise ConfigMismatch(f"noise has m={noise.m}, coefficients m={half.m}")
    if noise.n_events and noise.n_marks != half.measure.size:
        raise ConfigMismatch(f"noise has {noise.n_marks} marks, coefficients {half.measure.size}")
    if noise.T < cfg.T - 1e-12 * max(1.0, abs(cfg.T)):
        raise ConfigMismatch(f"noise horizon {noise.T} shorter than T={cfg.T}")
    if noise.base_step != cfg.h:
        ratio = cfg.h / noise.base_step
        factor = int(round(ratio))
        if factor < 1 or abs(ratio - factor) > 1e-9 * ratio:
            raise ConfigMismatch(f"step {cfg.h} is not a multiple of the noise step {noise.base_step}")
        noise = noise.coarsen(factor)
    if noise.T > cfg.T + 1e-12 * max(1.0, abs(cfg.T)):
        noise = noise.truncate(cfg.T)
    return noise


def _run(
    halves: Sequence[CoefficientHalf],
    xis: Sequence[Segment],
    noises: Sequence[NoiseRealization],
    cfg: SolverConfig,
    record: bool,
    track_sup: bool = True,
    raise_nonfinite: bool = False,
):
    half0 = halves[0]
    noises = [_check_noise(nz, cfg, half0) for nz in noises]
    P = len(noises)
    n = cfg.n_steps
    r_steps = cfg.delay_steps(half0.r0)
    sides = [_Side(hf, xi, P, cfg, n, r_steps, record) for hf, xi in zip(halves, xis)]
    coupled = len(sides) == 2
    d = half0.d
    inc = np.stack([nz.increments for nz in noises], axis=1)  # (n, P, m)
    tick = cfg.h / H

    events: dict[int, list] = {}
    for p, nz in enumerate(noises):
        per: dict[int, list] = {}
        for tk, mk, z in zip(nz.event_ticks.tolist(), nz.event_marks.tolist(), nz.bridge_normals):
            per.setdefault((tk - 1) // H, []).append((tk, mk, z))
        for k, evs in per.items():
            events.setdefault(k, []).append((p, evs))
    n_jumps = np.array([nz.n_events for nz in noises], dtype=np.int64)

    status = np.zeros(P, dtype=np.int8)
    stop_tick = np.full(P, -1, dtype=np.int64)
    end_step = np.full(P, n, dtype=np.int64)
    d_max = None
    if coupled:
        d_max = xis[0].value0 - xis[1].value0 + np.zeros((P, d))
    R2 = None if cfg.R is None else cfg.R * cfg.R

    if R2 is not None:
        hit = np.sum(sides[0].x ** 2, axis=1) >= R2
        if coupled:
            hit |= np.sum(sides[1].x ** 2, axis=1) >= R2
        status[hit] = STOPPED
        stop_tick[hit] = 0
        end_step[hit] = 0

    all_active = not np.any(status)
    for k in range(n):
        if not all_active and not np.any(status == RUNNING):
            break
        t = cfg.t0 + k * cfg.h
        for sd in sides:
            sd.k_done = k
            with np.errstate(all="ignore"):
                sd.eval_base(t, k * H)
        dBk = inc[k]
        new = []
        for sd in sides:
            with np.errstate(all="ignore"):
                new.append(list(_kahan(sd.x, sd.c, sd.increment(sd.b, sd.s, cfg.h, dBk))))
        mask_extra_stop = None
        for p, evs in events.get(k, ()):
            if status[p] != RUNNING:
                continue
            state = [[sd.x[p], sd.c[p], sd.b[p], sd.s[p]] for sd in sides]
            dB_rem = dBk[p]
            last = k * H
            end = (k + 1) * H
            stopped_here = False
            for tk, mk, z in evs:
                if tk > end:
                    break
                rem_ticks = end - last
                frac = (tk - last) / rem_ticks
                dB1 = frac * dB_rem + math.sqrt(frac * (1.0 - frac) * rem_ticks * tick) * z
                dB_rem = dB_rem - dB1
                te = cfg.t0 + tk * tick
                hit = False
                pres, posts = [], []
                for sd, st in zip(sides, state):
                    x, c, b, s = st
                    with np.errstate(all="ignore"):
                        x, c = _kahan(x, c, sd.increment(b, s, (tk - last) * tick, dB1))
                    entry = sd.add_extra(p, k, tk, x, x)
                    with np.errstate(all="ignore"):
                        g = sd.half.gamma(te, _Probe(sd, x, tk, p), mk)
                        xp, c = _kahan(x, c, g)
                    entry[2] = xp
                    st[0], st[1] = xp, c
                    pres.append(x)
                    posts.append(xp)
                    if R2 is not None and float(np.sum(xp * xp)) >= R2:
                        hit = True
                for sd, x, xp in zip(sides, pres, posts):
                    if track_sup:
                        sd.sup_sq[p] = max(sd.sup_sq[p], float(np.sum(x * x)), float(np.sum(xp * xp)))
                if coupled:
                    d_max[p] = np.maximum(d_max[p], np.maximum(pres[0] - pres[1], posts[0] - posts[1]))
                last = tk
                if hit:
                    status[p] = STOPPED
                    stop_tick[p] = tk
                    end_step[p] = k + 1
                    stopped_here = tk < end
                    break
                if tk < end:
                    for sd, st in zip(sides, state):
                        with np.errstate(all="ignore"):
                            probe = _Probe(sd, st[0], tk, p)
                            st[2] = sd.half.b(te, probe)
                            st[3] = sd.half.sigma(te, probe)
            if not stopped_here and last < end:
                for sd, st in zip(sides, state):
                    with np.errstate(all="ignore"):
                        st[0], st[1] = _kahan(st[0], st[1], sd.increment(st[2], st[3], (end - last) * tick, dB_rem))
            for nw, st in zip(new, state):
                nw[0][p] = st[0]
                nw[1][p] = st[1]
            if status[p] == STOPPED:
                if mask_extra_stop is None:
                    mask_extra_stop = np.zeros(P, dtype=bool)
                mask_extra_stop[p] = True

        # paths stopped by a jump in this step keep their post-jump value
        running_before = status == RUNNING
        if mask_extra_stop is not None:
            running_before = running_before | mask_extra_stop
        if not all_active:
            for sd, nw in zip(sides, new):
                frozen = ~running_before
                nw[0][frozen] = sd.x[frozen]
                nw[1][frozen] = sd.c[frozen]

        finite = np.ones(P, dtype=bool)
        for nw in new:
            if not np.isfinite(nw[0]).all():
                finite &= np.isfinite(nw[0]).all(axis=1)
        if not finite.all():
            bad = ~finite & running_before
            if raise_nonfinite and bad.any():
                raise NonFiniteState(f"non-finite state at t={cfg.t0 + (k + 1) * cfg.h}", cfg.t0 + (k + 1) * cfg.h)
            status[bad] = FAILED
            end_step[bad] = k
            all_active = False
            for nw, sd in zip(new, sides):
                nw[0][bad] = sd.x[bad]

        node_mask = (status == RUNNING) & finite
        if mask_extra_stop is not None:
            node_mask &= ~mask_extra_stop
        if R2 is not None:
            hit = np.zeros(P, dtype=bool)
            for nw in new:
                hit |= np.sum(nw[0] * nw[0], axis=1) >= R2
            hit &= node_mask
            if hit.any():
                status[hit] = STOPPED
                stop_tick[hit] = (k + 1) * H
                end_step[hit] = k + 1
        if mask_extra_stop is not None or not node_mask.all():
            all_active = False

        for sd, nw in zip(sides, new):
            sd.x, sd.c = nw
            sd.V[(k + 1) % sd.slots] = sd.x
            if track_sup:
                with np.errstate(over="ignore"):  # diverged paths are already marked failed
                    sq = np.sum(sd.x * sd.x, axis=1)
                if node_mask.all():
                    np.maximum(sd.sup_sq, sq, out=sd.sup_sq)
                else:
                    sd.sup_sq = np.where(node_mask, np.maximum(sd.sup_sq, sq), sd.sup_sq)
        if coupled:
            diff = sides[0].x - sides[1].x
            if node_mask.all():
                np.maximum(d_max, diff, out=d_max)
            else:
                d_max = np.where(node_mask[:, None], np.maximum(d_max, diff), d_max)
        for sd in sides:
            sd.k_done = k + 1

    stop_times = np.where(stop_tick >= 0, cfg.t0 + stop_tick * tick, np.nan)
    histories = None
    if record:
        histories = []
        for p in range(P):
            st = int(stop_tick[p]) if stop_tick[p] >= 0 else None
            histories.append(tuple(sd.history(p, cfg.t0, int(end_step[p]), st) for sd in sides))
    return sides, status, stop_times, n_jumps, d_max, histories


def _path_result(hist: tuple, status: int, stop_time: float, n: int, n_jumps: int) -> PathResult:
    return PathResult(
        history=hist[0],
        history_bar=hist[1] if len(hist) > 1 else None,
        stop_time=None if math.isnan(stop_time) else float(stop_time),
        n_steps=n,
        n_jumps=int(n_jumps),
        status=STATUS_NAMES[int(status)],
    )


def solve_path(cs, xi: Segment, noise: NoiseRealization, cfg: SolverConfig) -> PathResult:
    """Solve one equation (the unbarred half of a set, or a given half)."""
    half = as_half(cs)
    sides, status, stops, nj, _, hist = _run([half], [xi], [noise], cfg, record=True, raise_nonfinite=True)
    return _path_result(hist[0], status[0], stops[0], cfg.n_steps, nj[0])


def solve_coupled(
    cs: CoefficientSet, xi: Segment, xibar: Segment, noise: NoiseRealization, cfg: SolverConfig
) -> PathResult:
    """Both equations on the same realization; stops when either side leaves the ball."""
    _, status, stops, nj, _, hist = _run(
        [cs.unbarred, cs.barred], [xi, xibar], [noise], cfg, record=True, raise_nonfinite=True
    )
    return _path_result(hist[0], status[0], stops[0], cfg.n_steps, nj[0])


def ensemble_noise(cs, cfg: SolverConfig, master_seed: int, indices, inject=None) -> list[NoiseRealization]:
    half = as_half(cs)
    out = []
    for k in indices:
        nz = generate(path_seed(master_seed, k), half.m, half.measure, cfg.t0, cfg.T, cfg.h)
        if inject is not None:
            nz = inject_events(nz, inject)
        out.append(nz)
    return out


def solve_ensemble(
    cs,
    xi: Segment,
    cfg: SolverConfig,
    n_paths: int | None = None,
    master_seed: int = 0,
    xibar: Segment | None = None,
    path_indices=None,
    inject=None,
    record: bool = False,
    track_sup: bool = True,
    chunk: int = 1000,
) -> EnsembleResult:
    """Solve many independent paths; path ``k`` uses seed ``(master_seed, k)``.

    With ``xibar`` both equations of ``cs`` are solved on each realization.
    Non-finite paths are marked ``FAILED`` rather than raised. Results depend
    only on the path indices, not on chunking or order.
    """
    if path_indices is None:
        if n_paths is None:
            raise ValueError("give n_paths or path_indices")
        path_indices = range(n_paths)
    indices = np.asarray(list(path_indices), dtype=np.int64)
    if xibar is None:
        halves, xis = [as_half(cs)], [xi]
    else:
        halves, xis = [cs.unbarred, cs.barred], [xi, xibar]
    parts = []
    for lo in range(0, len(indices), chunk):
        idx = indices[lo : lo + chunk]
        noises = ensemble_noise(halves[0], cfg, master_seed, idx, inject)
        sides, status, stops, nj, d_max, hist = _run(halves, xis, noises, cfg, record, track_sup)
        parts.append(
            EnsembleResult(
                indices=idx,
                sup_sq=sides[0].sup_sq.copy(),
                status=status,
                stop_times=stops,
                n_jumps=nj,
                sup_sq_bar=sides[1].sup_sq.copy() if len(sides) > 1 else None,
                d_max=d_max,
                histories=(
                    None
                    if hist is None
                    else [_path_result(hh, s, st, cfg.n_steps, j) for hh, s, st, j in zip(hist, status, stops, nj)]
                ),
                config={"solver": cfg.to_dict(), "master_seed": master_seed},
            )
        )
    return EnsembleResult.concat(parts)


def moment_diagnostic(results) -> float:
    """Empirical ``E sup_t |X(t)|^2`` over an ensemble (failed paths excluded)."""
    if isinstance(results, EnsembleResult):
        vals = results.sup_sq[results.ok]
    else:
        vals = np.array([r.sup_sq() for r in results])
    if len(vals) == 0:
        raise ValueError("need at least one path")
    return math.fsum(vals.tolist()) / len(vals)
