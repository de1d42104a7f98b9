"""The bundled acceptance experiments, one function per criterion.

Each returns a :class:`CriterionResult`; thresholds are applied here and
nowhere else. ``python -m ordersfde acceptance`` runs them all.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import oracles
from .coeff import CATALOGUE, EXPECTED_VERDICTS, builtin, coefficients_from_config, control
from .existence import (
    BihariKernel,
    MollifierLaw,
    approximation_cascade,
    bihari_bound,
    mollified_drift_estimate,
    uniqueness_check,
)
from .noise import MarkMeasure, generate, path_seed
from .order import check_conditions, necessity_probe_drift, psi, psi_prime, psi_second, verify_order_mc
from .segment import Segment
from .solver import SolverConfig


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime: float
    limit: float | None
    details: dict = field(default_factory=dict)

    @property
    def in_time(self) -> bool:
        return self.limit is None or self.runtime < self.limit

    def line(self) -> str:
        tag = "PASS" if self.passed and self.in_time else "FAIL"
        limit = "" if self.limit is None else f" (limit {self.limit:g}s)"
        return f"[{tag}] criterion {self.number}: {self.title} - {self.runtime:.2f}s{limit}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "runtime": self.runtime,
            "limit": self.limit,
            "in_time": self.in_time,
            "details": self.details,
        }


def _timed(number: int, title: str, limit: float | None, body: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    start = time.perf_counter()
    passed, details = body()
    return CriterionResult(number, title, bool(passed), time.perf_counter() - start, limit, details)


# 1 ----------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    def body():
        s = np.concatenate([[-1.0, 0.0], np.logspace(-6, 1, 281)])
        ns = np.arange(1, 1025)
        worst_quad = 0.0
        ok = {
            "psi_le_pos": True,
            "prime_in_01": True,
            "s_second_in_01": True,
            "second_support": True,
            "nondecreasing_in_n": True,
            "tail_vs_quad": True,
        }
        for n in ns:
            p, dp, ddp = psi(n, s), psi_prime(n, s), psi_second(n, s)
            ok["psi_le_pos"] &= bool(np.all((p >= 0) & (p <= np.maximum(s, 0.0))))
            ok["prime_in_01"] &= bool(np.all((dp >= 0) & (dp <= 1)) and np.all(dp[s <= 0] == 0))
            sdd = s * ddp
            ok["s_second_in_01"] &= bool(np.all((sdd >= 0) & (sdd <= 1)))
            outside = (s <= 0) | (s >= 1.0 / n)
            ok["second_support"] &= bool(np.all(ddp[outside] == 0))
            ok["nondecreasing_in_n"] &= bool(np.all(p <= psi(2 * n, s)))
            a, b = oracles.psi_tail_moments(int(n))
            tail = s >= 1.0 / n
            quad = s[tail] * a - b
            dev = float(np.max(np.abs(p[tail] - quad), initial=0.0))
            dev = max(dev, float(np.max(np.abs(p[tail] - (s[tail] - 0.5 / n)), initial=0.0)))
            worst_quad = max(worst_quad, dev)
        ok["tail_vs_quad"] = worst_quad <= 1e-10
        return all(ok.values()), {**ok, "max_tail_deviation": worst_quad, "grid_points": len(s), "n_max": int(ns[-1])}

    return _timed(1, "psi_n family properties and closed form vs quadrature", 1.0, body)


# 2 ----------------------------------------------------------------------------


def criterion_2() -> CriterionResult:
    def body():
        k = BihariKernel(control("one"))
        grid = np.linspace(0.1, 10.0, 10)
        worst = 0.0
        for a in grid:
            for C in grid:
                for t in grid:
                    got = bihari_bound(k, float(a), float(C), float(t))
                    ref = float(oracles.gronwall_bound(a, C, t))
                    worst = max(worst, abs(got - ref) / ref)
        return worst <= 1e-8, {"max_rel_error": worst, "cases": 1000}

    return _timed(2, "Bihari bound with u = 1 equals a exp(Ct)", 1.0, body)


# 3 ----------------------------------------------------------------------------


def criterion_3(n_seeds: int = 32, n_paths: int = 1000) -> CriterionResult:
    def body():
        cs = builtin("shifted_drift_pair")
        zero = Segment.constant(0.0)
        steps = [1e-2, 1e-3, 1e-4]
        medians = []
        for h in steps:
            cfg = SolverConfig(h, 1.0)
            sups = [verify_order_mc(cs, zero, zero, cfg, n_paths, seed).hard_sup for seed in range(n_seeds)]
            medians.append(float(np.median(sups)))
        monotone = all(b <= a for a, b in zip(medians, medians[1:]))
        small = medians[-1] <= 1e-1
        jump_cs = builtin("constant_jump")
        jump_sups = {}
        for h in steps:
            cfg = SolverConfig(h, 1.0)
            for label, xibar in (("equal", zero), ("ordered", Segment.constant(0.5))):
                jump_sups[f"{label}@{h:g}"] = verify_order_mc(jump_cs, zero, xibar, cfg, n_paths, 0).hard_sup
        jumps_exact = all(v == 0.0 for v in jump_sups.values())
        return monotone and small and jumps_exact, {
            "median_hard_sup": dict(zip([str(h) for h in steps], medians)),
            "nonincreasing": monotone,
            "le_0.1_at_1e-4": small,
            "constant_jump_hard_sup": jump_sups,
        }

    return _timed(3, "sufficiency: shifted_drift_pair and constant_jump keep order", 120.0, body)


# 4 ----------------------------------------------------------------------------


def criterion_4(n_paths: int = 1000) -> CriterionResult:
    def body():
        details: dict[str, Any] = {}
        cs = coefficients_from_config(
            {"d": 1, "m": 1, "r0": 0, "b": ["1"], "barred": {"b": ["0"]}, "name": "drift_violator"}
        )
        zero = Segment.constant(0.0)
        probe = necessity_probe_drift(cs, 0.0, zero, zero)
        m = verify_order_mc(cs, zero, zero, SolverConfig(1e-3, 1.0), n_paths, 0)
        details["a"] = {
            "probe": probe.verdict,
            "Lh": probe.Lh,
            "Lbar_h": probe.Lbar_h,
            "violation_frequency": m.violation_frequency,
        }
        ok_a = probe.verdict == "violation" and m.violation_frequency == 1.0

        cs = builtin("delayed_diffusion", r0=1.0)
        xi = Segment.constant(0.0, r0=1.0)
        xibar = Segment.linear(1.0, 0.0, 1.0)  # equal at theta = 0, apart by 1 at theta = -1
        m = verify_order_mc(cs, xi, xibar, SolverConfig(1e-3, 1.0), n_paths, 0)
        details["b"] = {"violation_frequency": m.violation_frequency, "hard_sup": m.hard_sup}
        ok_b = m.violation_frequency >= 0.25

        cs = builtin("negating_jump")
        xi, xibar = Segment.constant(-2.0), Segment.constant(-1.0)
        m = verify_order_mc(cs, xi, xibar, SolverConfig(1e-2, 2.0), 16, 0, inject=[(1.0, 0)])
        # after the jump X = 0 while Xbar stays at -1
        details["c"] = {"hard_sup": m.hard_sup, "violation_frequency": m.violation_frequency}
        ok_c = m.hard_sup == 1.0 and m.violation_frequency == 1.0
        details.update({"ok_a": ok_a, "ok_b": ok_b, "ok_c": ok_c})
        return ok_a and ok_b and ok_c, details

    return _timed(4, "necessity: drift, diffusion and jump violators break order", 60.0, body)


# 5 ----------------------------------------------------------------------------


def criterion_5(n_samples: int = 10_000) -> CriterionResult:
    def body():
        table = {}
        ok = True
        for name in CATALOGUE:
            cs = builtin(name)
            reports = check_conditions(cs, n_samples=n_samples, seed=0)
            row = {}
            for cond, rep in reports.items():
                expected = EXPECTED_VERDICTS[name][cond]
                confirmed = rep.passed or rep.confirm(cs)
                row[cond] = {
                    "verdict": rep.verdict,
                    "expected": "pass" if expected else "fail",
                    "witness_confirmed": confirmed,
                }
                ok &= rep.passed == expected and confirmed
            table[name] = row
        return ok, table

    return _timed(5, "condition checkers reproduce the catalogue verdicts", 30.0, body)


# 6 ----------------------------------------------------------------------------


def criterion_6(n_seeds: int = 16, samples: int = 10_000) -> CriterionResult:
    def body():
        cs = builtin("abs_drift")
        zero = Segment.constant(0.0)
        cfg = SolverConfig(1e-2, 1.0)
        levels = [1, 2, 4, 8, 16]
        gaps = []
        for seed in range(n_seeds):
            law = MollifierLaw.create(0.0, 1, samples, seed=seed)
            res = approximation_cascade(cs, zero, cfg, law, levels, seed=seed)
            gaps.append([res.gaps[n] for n in levels])
        med = np.median(np.array(gaps), axis=0)
        monotone = bool(np.all(np.diff(med) < 0))
        ratio = float(med[-1] / med[0])
        law = MollifierLaw.create(0.0, 1, samples, seed=0)
        ci = {}
        for n in levels:
            est = mollified_drift_estimate(cs, law, n, 0.0, zero)
            target = oracles.half_normal_mean() / n
            ci[str(n)] = {
                "estimate": float(est.mean[0]),
                "half_width": float(est.half_width[0]),
                "target": target,
                "inside": est.contains(target),
            }
        ci_ok = all(v["inside"] for v in ci.values())
        return monotone and ratio <= 0.2 and ci_ok, {
            "median_D": dict(zip(map(str, levels), med.tolist())),
            "monotone": monotone,
            "D16_over_D1": ratio,
            "mollified_at_zero": ci,
        }

    return _timed(6, "existence cascade gaps shrink; mollified |x| matches sqrt(2/pi)/n", 120.0, body)


# 7 ----------------------------------------------------------------------------


def criterion_7(n_seeds: int = 32) -> CriterionResult:
    def body():
        from .cli import main

        rep = uniqueness_check(
            builtin("linear_drift"), Segment.constant(1.0), SolverConfig(1e-2, 1.0), [(0, k) for k in range(n_seeds)]
        )
        argv = [
            "verify-order", "--coeff", "builtin:linear_drift", "--init", "const:0.5", "--initbar", "const:1",
            "--paths", "32", "--step", "0.01", "--horizon", "1", "--seed", "7",
        ]  # fmt: skip
        with tempfile.TemporaryDirectory() as tmp:
            a, b, c = (Path(tmp) / x for x in "abc")
            codes = [main(argv + ["--out", str(a)]), main(argv + ["--out", str(b)])]
            replay = json.loads((a / "order.json").read_text())["replay"]
            codes.append(main(replay + ["--out", str(c)]))
            same = all(
                (a / f).read_bytes() == (b / f).read_bytes() == (c / f).read_bytes()
                for f in ("order.json", "hard_sup_per_path.csv")
            )
        ok = rep.passed and same and codes == [0, 0, 0]
        return ok, {"max_distance": rep.max_distance, "replay_identical": same, "exit_codes": codes}

    return _timed(7, "uniqueness cross-check and byte-identical replay", None, body)


# 8 ----------------------------------------------------------------------------


def criterion_8() -> CriterionResult:
    def body():
        h = 0.01
        nz = generate(8, 1, MarkMeasure.empty(), 0.0, 1000.0, h)
        inc = nz.increments[:, 0]
        var_rel = abs(float(np.var(inc)) / h - 1.0)
        mean_z = abs(float(np.mean(inc))) / math.sqrt(h / len(inc))

        rate, T, n_real = 2.0, 50.0, 10_000
        meas = MarkMeasure.single(rate)
        counts = np.array([generate(path_seed(8, k), 1, meas, 0.0, T, 1.0).n_events for k in range(n_real)])
        mean_count = float(counts.mean())
        band = 3 * math.sqrt(rate * T / n_real)

        marks = MarkMeasure((1.0, 2.0), (1.0, 3.0))
        big = generate(9, 1, marks, 0.0, 25_000.0, 0.01)
        n_arr = big.n_events
        freq = np.bincount(big.event_marks, minlength=2) / n_arr
        p = np.array(marks.weights) / marks.total
        zs = np.abs(freq - p) / np.sqrt(p * (1 - p) / n_arr)
        ok = (
            var_rel <= 0.01
            and mean_z <= 3
            and abs(mean_count - rate * T) <= band
            and n_arr >= 100_000
            and np.all(zs <= 3)
        )
        return bool(ok), {
            "increment_variance_rel_error": var_rel,
            "increment_mean_z": mean_z,
            "mean_arrivals": mean_count,
            "arrival_band": [rate * T - band, rate * T + band],
            "n_arrivals_marks": int(n_arr),
            "mark_frequency_z": zs.tolist(),
        }

    return _timed(8, "noise statistics: variance, Poisson mean, mark frequencies", 10.0, body)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_all(only=None) -> list[CriterionResult]:
    return [CRITERIA[k]() for k in sorted(CRITERIA) if only is None or k in only]
