"""Reference values computed independently of the library code they check.

Nothing here imports the implementations under test; each function uses a
different route (quadrature, closed-form moments) to the same quantity.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def _psi_second_raw(n: int, r: float) -> float:
    # the piecewise-linear hat, written out independently of order.psi
    if 0.0 <= r <= 0.5 / n:
        return 4.0 * n * n * r
    if 0.5 / n < r <= 1.0 / n:
        return -4.0 * n * n * (r - 1.0 / n)
    return 0.0


def psi_tail_moments(n: int) -> tuple[float, float]:
    """``(int psi'', int r psi'')`` over ``[0, 1/n]`` by adaptive quadrature."""
    pts = [0.5 / n]
    a, _ = integrate.quad(lambda r: _psi_second_raw(n, r), 0.0, 1.0 / n, points=pts, epsabs=1e-13, epsrel=1e-12)
    b, _ = integrate.quad(lambda r: r * _psi_second_raw(n, r), 0.0, 1.0 / n, points=pts, epsabs=1e-13, epsrel=1e-12)
    return a, b


def psi_by_quadrature(n: int, s: float) -> float:
    """``psi_n(s) = int_0^s (s - r) psi_n''(r) dr`` evaluated numerically."""
    if s <= 0:
        return 0.0
    upper = min(s, 1.0 / n)
    pts = [p for p in (0.5 / n,) if p < upper]
    val, _ = integrate.quad(
        lambda r: (s - r) * _psi_second_raw(n, r), 0.0, upper, points=pts or None, epsabs=1e-13, epsrel=1e-12
    )
    return val


def poisson_second_moment(x0: float, rate: float, T: float) -> tuple[float, float]:
    """Mean and standard deviation of ``(x0 + N_T)^2`` for ``N_T ~ Poisson(rate T)``."""
    lam = rate * T
    # raw moments of a Poisson variable
    m1 = lam
    m2 = lam + lam**2
    m3 = lam + 3 * lam**2 + lam**3
    m4 = lam + 7 * lam**2 + 6 * lam**3 + lam**4
    mean = x0**2 + 2 * x0 * m1 + m2
    ey4 = x0**4 + 4 * x0**3 * m1 + 6 * x0**2 * m2 + 4 * x0 * m3 + m4
    return mean, math.sqrt(ey4 - mean**2)


def half_normal_mean(scale: float = 1.0) -> float:
    """``E|scale * Z|`` for standard normal Z."""
    return scale * math.sqrt(2.0 / math.pi)


def gronwall_bound(a, C, t):
    """Bihari bound for ``u = 1``: plain Gronwall ``a exp(C t)``."""
    return np.asarray(a) * np.exp(np.asarray(C) * np.asarray(t))


def bihari_primitive_quad(u, s: float) -> float:
    """``int_1^s dr / (r u(r))`` by quadrature directly in ``r``."""
    val, _ = integrate.quad(lambda r: 1.0 / (r * float(u(r))), 1.0, s, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val
