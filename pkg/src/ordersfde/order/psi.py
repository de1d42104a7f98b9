"""The smoothing family ``psi_n`` approximating ``s -> s^+``.

``psi_n''`` is a hat of height ``2n`` on ``[0, 1/n]``; integrating twice from
zero gives ``psi_n' -> 1[s>0]`` and ``psi_n -> s^+`` as ``n`` grows.
"""

from __future__ import annotations

import numpy as np


def _split(n: int, s):
    if n < 1:
        raise ValueError("n must be >= 1")
    s = np.asarray(s, dtype=float)
    half, full = 0.5 / n, 1.0 / n
    rise = (s > 0) & (s <= half)
    fall = (s > half) & (s <= full)
    tail = s > full
    return s, rise, fall, tail


def _out(s, value):
    return float(value) if np.ndim(s) == 0 else value


def psi_second(n: int, s):
    s, rise, fall, _ = _split(n, s)
    n2 = float(n) * n
    out = np.where(rise, 4.0 * n2 * s, 0.0)
    out = np.where(fall, 4.0 * n2 * (1.0 / n - s), out)
    return _out(s, out)


def psi_prime(n: int, s):
    s, rise, fall, tail = _split(n, s)
    n2 = float(n) * n
    out = np.where(rise, 2.0 * n2 * s * s, 0.0)
    out = np.where(fall, 1.0 - 2.0 * n2 * (s - 1.0 / n) ** 2, out)
    out = np.where(tail, 1.0, out)
    return _out(s, out)


def psi(n: int, s):
    s, rise, fall, tail = _split(n, s)
    n2 = float(n) * n
    out = np.where(rise, (2.0 / 3.0) * n2 * s**3, 0.0)
    out = np.where(fall, s - 0.5 / n - (2.0 / 3.0) * n2 * (s - 1.0 / n) ** 3, out)
    out = np.where(tail, s - 0.5 / n, out)
    return _out(s, out)
