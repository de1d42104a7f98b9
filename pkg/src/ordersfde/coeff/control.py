"""Control functions ``u`` quantifying non-Lipschitz moduli.

Membership requires ``u >= 1``, ``s * u(s)`` increasing and concave, and
``int_0^1 ds / (s u(s)) = inf``. The first two are checked on sampled grids;
the divergence is not checkable, so only whitelisted builtins carry
``divergence_verified=True``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import UnknownName


@dataclass(frozen=True)
class ControlFunction:
    u: Callable[[np.ndarray], np.ndarray]
    tag: str = "custom"
    divergence_verified: bool = False

    def __call__(self, s):
        return self.u(np.asarray(s, dtype=float))

    def su(self, s):
        s = np.asarray(s, dtype=float)
        return s * self(s)


def _one(s):
    return np.ones_like(s, dtype=float)


def _log(s):
    with np.errstate(divide="ignore"):
        return np.log(np.e + 1.0 / s)


BUILTIN_CONTROLS = {
    "one": ControlFunction(_one, "one", True),
    "log": ControlFunction(_log, "log", True),
}


def control(tag: str) -> ControlFunction:
    try:
        return BUILTIN_CONTROLS[tag]
    except KeyError:
        raise UnknownName(f"unknown control function {tag!r}; known: {sorted(BUILTIN_CONTROLS)}") from None


def custom_control(u: Callable, tag: str = "custom") -> ControlFunction:
    """Wrap a user function. Its divergence at 0 is flagged as unverified."""
    return ControlFunction(u, tag, divergence_verified=False)


@dataclass(frozen=True)
class ControlValidation:
    lower_bound_ok: bool
    increasing_ok: bool
    concave_ok: bool
    divergence_verified: bool
    grid_size: int

    @property
    def ok(self) -> bool:
        return self.lower_bound_ok and self.increasing_ok and self.concave_ok


def validate_control(u: ControlFunction, grid=None) -> ControlValidation:
    """Check ``u >= 1`` and monotonicity / midpoint concavity of ``s u(s)``.

    Concavity is tested on consecutive grid pairs: ``f((a+b)/2) >= (f(a)+f(b))/2``.
    """
    s = np.logspace(-9, 3, 1201) if grid is None else np.sort(np.asarray(grid, dtype=float))
    f = u.su(s)
    mid = 0.5 * (s[:-1] + s[1:])
    fmid = u.su(mid)
    return ControlValidation(
        lower_bound_ok=bool(np.all(u(s) >= 1.0)),
        increasing_ok=bool(np.all(np.diff(f) >= 0)),
        concave_ok=bool(np.all(fmid >= 0.5 * (f[:-1] + f[1:]))),
        divergence_verified=u.divergence_verified,
        grid_size=len(s),
    )
