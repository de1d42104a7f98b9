"""Sampled checks of the three order-preservation conditions.

* drift: ``b^i(t, xi) <= bbar^i(t, xibar)`` whenever ``xi <= xibar`` and
  ``xi^i(0) = xibar^i(0)``;
* diffusion: ``sigma^{ij}(t, xi) = sigmabar^{ij}(t, xibar)`` whenever
  ``xi^i(0) = xibar^i(0)``;
* jump: ``xi^i(0) + gamma^i(t, xi, z) <= xibar^i(0) + gammabar^i(t, xibar, z)``
  for every mark whenever ``xi <= xibar``.

A pass means no sampled input violated the condition. A fail carries a
witness that :meth:`ConditionReport.confirm` re-evaluates on plain segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from ..coeff.core import CoefficientSet
from ..errors import SamplerContractBroken
from ..sampling import Sampler, endpoint_pairs, ordered_pairs
from ..segment import Segment


@dataclass
class Witness:
    t: float
    xi: Segment
    xibar: Segment
    i: int
    lhs: float
    rhs: float
    j: Optional[int] = None
    mark: Optional[int] = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "t": self.t,
            "i": self.i,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "xi": self.xi.to_dict(),
            "xibar": self.xibar.to_dict(),
        }
        if self.j is not None:
            out["j"] = self.j
        if self.mark is not None:
            out["mark"] = self.mark
        return out


@dataclass
class ConditionReport:
    condition: str
    passed: bool
    n_samples: int
    witness: Optional[Witness] = None
    n_violations: int = 0
    sampler: str = ""
    seed: Any = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def evidence(self) -> str:
        return "sampled"

    def confirm(self, cs: CoefficientSet) -> bool:
        """Re-evaluate the witness on single segments; True if it still violates."""
        if self.witness is None:
            return False
        return _violates(self.condition, cs, self.witness)

    def to_dict(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "evidence": self.evidence,
            "n_samples": self.n_samples,
            "n_violations": self.n_violations,
            "sampler": self.sampler,
            "seed": self.seed,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def _violates(condition: str, cs: CoefficientSet, w: Witness) -> bool:
    u, v = cs.unbarred, cs.barred
    i = w.i
    if condition == "drift":
        return bool(u.b(w.t, w.xi)[i] > v.b(w.t, w.xibar)[i])
    if condition == "diffusion":
        return bool(u.sigma(w.t, w.xi)[i, w.j] != v.sigma(w.t, w.xibar)[i, w.j])
    if condition == "jump":
        lhs = w.xi.value0[i] + u.gamma(w.t, w.xi, w.mark)[i]
        rhs = w.xibar.value0[i] + v.gamma(w.t, w.xibar, w.mark)[i]
        return bool(lhs > rhs)
    raise ValueError(f"unknown condition {condition!r}")


def _check_contract(pb, ordered: bool, pinned: bool) -> None:
    if ordered and np.any(pb.xi.values > pb.eta.values):
        raise SamplerContractBroken("sampler produced a pair with xi > xibar")
    if pinned:
        if pb.component is None:
            raise SamplerContractBroken("sampler must report the pinned component")
        rows = np.arange(len(pb))
        if np.any(pb.xi.values[rows, -1, pb.component] != pb.eta.values[rows, -1, pb.component]):
            raise SamplerContractBroken("pinned component differs at theta = 0")


def _run(condition, cs, sampler, n_samples, seed, batch, ordered, pinned, evaluate):
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    witness = None
    violations = 0
    done = 0
    while done < n_samples:
        pb = sampler(rng, min(batch, n_samples - done))
        _check_contract(pb, ordered, pinned)
        count, first = evaluate(pb)
        violations += count
        if witness is None and first is not None:
            witness = first
        done += len(pb)
    return ConditionReport(
        condition, witness is None, n_samples, witness, violations, getattr(sampler, "description", "custom"), seed
    )


def check_cond_drift(
    cs: CoefficientSet, sampler: Sampler | None = None, n_samples: int = 10_000, seed=0, batch: int = 500
):
    sampler = sampler or ordered_pairs(cs.d, cs.r0, pin_endpoint=True)

    def evaluate(pb):
        rows = np.arange(len(pb))
        lhs = cs.unbarred.b(pb.t, pb.xi)[rows, pb.component]
        rhs = cs.barred.b(pb.t, pb.eta)[rows, pb.component]
        bad = np.flatnonzero(lhs > rhs)
        if not len(bad):
            return 0, None
        k = int(bad[0])
        return len(bad), Witness(pb.t, pb.xi[k], pb.eta[k], int(pb.component[k]), float(lhs[k]), float(rhs[k]))

    return _run("drift", cs, sampler, n_samples, seed, batch, True, True, evaluate)


def check_cond_diffusion(
    cs: CoefficientSet, sampler: Sampler | None = None, n_samples: int = 10_000, seed=0, batch: int = 500
):
    sampler = sampler or endpoint_pairs(cs.d, cs.r0)

    def evaluate(pb):
        rows = np.arange(len(pb))
        lhs = cs.unbarred.sigma(pb.t, pb.xi)[rows, pb.component]  # (N, m)
        rhs = cs.barred.sigma(pb.t, pb.eta)[rows, pb.component]
        bad = np.argwhere(lhs != rhs)
        if not len(bad):
            return 0, None
        k, j = (int(v) for v in bad[0])
        n_bad = int(np.count_nonzero(np.any(lhs != rhs, axis=1)))
        return n_bad, Witness(pb.t, pb.xi[k], pb.eta[k], int(pb.component[k]), float(lhs[k, j]), float(rhs[k, j]), j=j)

    return _run("diffusion", cs, sampler, n_samples, seed, batch, False, True, evaluate)


def check_cond_jump(
    cs: CoefficientSet, sampler: Sampler | None = None, n_samples: int = 10_000, seed=0, batch: int = 500
):
    sampler = sampler or ordered_pairs(cs.d, cs.r0, pin_endpoint=False)

    def evaluate(pb):
        x0 = pb.xi(0.0)
        y0 = pb.eta(0.0)
        count = 0
        first = None
        for k in range(cs.measure.size):
            lhs = x0 + cs.unbarred.gamma(pb.t, pb.xi, k)
            rhs = y0 + cs.barred.gamma(pb.t, pb.eta, k)
            bad = np.argwhere(lhs > rhs)
            count += int(np.count_nonzero(np.any(lhs > rhs, axis=1)))
            if first is None and len(bad):
                s, i = (int(v) for v in bad[0])
                first = Witness(pb.t, pb.xi[s], pb.eta[s], i, float(lhs[s, i]), float(rhs[s, i]), mark=k)
        return count, first

    return _run("jump", cs, sampler, n_samples, seed, batch, True, False, evaluate)


def check_conditions(cs: CoefficientSet, n_samples: int = 10_000, seed=0) -> dict[str, ConditionReport]:
    return {
        "drift": check_cond_drift(cs, n_samples=n_samples, seed=seed),
        "diffusion": check_cond_diffusion(cs, n_samples=n_samples, seed=seed),
        "jump": check_cond_jump(cs, n_samples=n_samples, seed=seed),
    }
