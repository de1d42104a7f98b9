"""Monte Carlo measurement of pathwise order preservation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..coeff.core import CoefficientSet
from ..errors import OrderPreconditionError
from ..segment import Segment, leq
from ..solver import SolverConfig, solve_ensemble
from .psi import psi

DEFAULT_PSI_LEVELS = (1, 4, 16, 64, 256, 1024)


@dataclass
class OrderMetric:
    """Order-violation statistics of a coupled ensemble.

    ``d_sup[p, i]`` is ``sup_t (X^i - Xbar^i)`` on path ``p`` (may be
    negative). Failed paths are excluded and counted in ``n_failed``.
    """

    d_sup: np.ndarray
    indices: np.ndarray
    n_failed: int = 0
    psi_levels: tuple = DEFAULT_PSI_LEVELS
    config: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return len(self.d_sup)

    @property
    def per_path(self) -> np.ndarray:
        """``max_i (sup_t X^i - Xbar^i)^+`` per path."""
        if self.d_sup.size == 0:
            return np.zeros(0)
        return np.maximum(self.d_sup.max(axis=1), 0.0)

    @property
    def hard_sup(self) -> float:
        pp = self.per_path
        return float(pp.max()) if pp.size else 0.0

    @property
    def violation_frequency(self) -> float:
        if self.n_paths == 0:
            return 0.0
        return int(np.count_nonzero(self.per_path > 0)) / self.n_paths

    def soft_psi(self, n: int) -> float:
        """Path mean of ``sum_i sup_t psi_n(X^i - Xbar^i)^2``.

        ``psi_n`` is nondecreasing, so the sup passes inside.
        """
        if self.n_paths == 0:
            return 0.0
        vals = np.sum(np.asarray(psi(n, self.d_sup)) ** 2, axis=1)
        return math.fsum(vals.tolist()) / self.n_paths

    @property
    def mean_sq_sup(self) -> float:
        """Limit of :meth:`soft_psi` as ``n -> inf``."""
        if self.n_paths == 0:
            return 0.0
        vals = np.sum(np.maximum(self.d_sup, 0.0) ** 2, axis=1)
        return math.fsum(vals.tolist()) / self.n_paths

    def to_dict(self) -> dict[str, Any]:
        return {
            "hard_sup": self.hard_sup,
            "violation_frequency": self.violation_frequency,
            "soft_psi": {str(n): self.soft_psi(n) for n in self.psi_levels},
            "mean_sq_sup": self.mean_sq_sup,
            "n_paths": self.n_paths,
            "n_failed": self.n_failed,
            "config": self.config,
        }


def verify_order_mc(
    cs: CoefficientSet,
    xi: Segment,
    xibar: Segment,
    cfg: SolverConfig,
    n_paths: int = 1000,
    master_seed: int = 0,
    path_indices=None,
    inject=None,
    psi_levels=DEFAULT_PSI_LEVELS,
) -> OrderMetric:
    """Solve ``n_paths`` coupled realizations and measure ``(X - Xbar)^+``."""
    ok, where = leq(xi, xibar)
    if not ok:
        raise OrderPreconditionError(f"initial segments are not ordered: component {where[0]} at theta={where[1]}")
    ens = solve_ensemble(
        cs, xi, cfg, n_paths, master_seed, xibar=xibar, path_indices=path_indices, inject=inject, track_sup=False
    )
    good = np.flatnonzero(ens.ok)
    good = good[np.argsort(ens.indices[good], kind="stable")]
    return OrderMetric(
        d_sup=ens.d_max[good],
        indices=ens.indices[good],
        n_failed=ens.n_failed,
        psi_levels=tuple(psi_levels),
        config={"solver": cfg.to_dict(), "master_seed": master_seed, "n_paths": int(len(ens.indices))},
    )
