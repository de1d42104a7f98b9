"""Command line front end: ``ordersfde <subcommand> ...``.

Exit codes: 0 success, 1 a check failed under ``--expect-pass`` (or an
acceptance criterion failed), 2 usage or input error.

Every JSON summary embeds the resolved configuration and a ``replay`` argv;
running that argv again reproduces the summary byte for byte. The default
output directory is ``$ORDERSFDE_OUT`` (falling back to ``./ordersfde-out``).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .coeff import check_A2, coefficients_from_config, control
from .coeff.config import validate
from .errors import SFDEError
from .existence import BihariKernel, MollifierLaw, approximation_cascade, bihari_bound
from .order import check_conditions, necessity_probe_drift, psi, psi_prime, psi_second, verify_order_mc
from .segment import Segment
from .solver import STATUS_NAMES, SolverConfig, moment_diagnostic, solve_ensemble

ENV_OUT = "ORDERSFDE_OUT"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- input parsing -----------------------------------------------------------


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_coeff_config(ref: str, params: Sequence[str] = ()) -> dict:
    """``builtin:name`` (with ``--param k=v`` overrides) or a JSON file."""
    if ref.startswith("builtin:"):
        cfg: dict[str, Any] = {"builtin": ref.split(":", 1)[1]}
        if params:
            cfg["params"] = {}
            for item in params:
                if "=" not in item:
                    raise UsageError(f"--param expects key=value, got {item!r}")
                k, v = item.split("=", 1)
                cfg["params"][k] = _parse_value(v)
        return cfg
    if params:
        raise UsageError("--param only applies to builtin coefficients")
    try:
        return json.loads(Path(ref).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read coefficient config {ref!r}: {exc}") from None


def load_segment_spec(spec: str, d: int, r0: float) -> dict:
    """Segment literal from a file or ``const:v[,v..]`` / ``linear:a,b``."""
    if spec.startswith("const:"):
        vals = [float(v) for v in spec[6:].split(",")]
        seg = Segment.constant(vals if len(vals) > 1 else vals[0], r0, d)
        return seg.to_dict()
    if spec.startswith("linear:"):
        a, b = (float(v) for v in spec[7:].split(","))
        return Segment.linear(np.full(d, a), np.full(d, b), r0).to_dict()
    try:
        obj = json.loads(Path(spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read segment {spec!r}: {exc}") from None
    validate(obj, "segment")
    return obj


def load_events(path: Optional[str], measure) -> Optional[list]:
    if path is None:
        return None
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read events {path!r}: {exc}") from None
    validate(obj, "events")
    return [[float(t), measure.index(k)] for t, k in obj]


def out_dir(args) -> Path:
    p = Path(args.out or os.environ.get(ENV_OUT) or "ordersfde-out")
    p.mkdir(parents=True, exist_ok=True)
    return p


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _replay(argv: Sequence[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def _summary(args, argv, config: dict, result: dict) -> dict:
    return {"command": args.command, "config": config, "replay": _replay(argv), "result": result}


def _solver(args) -> SolverConfig:
    return SolverConfig(h=args.step, T=args.horizon, t0=args.t0, R=getattr(args, "R", None))


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(args, argv) -> int:
    ccfg = load_coeff_config(args.coeff, args.param)
    cs = coefficients_from_config(ccfg)
    xi_d = load_segment_spec(args.init, cs.d, cs.r0)
    xibar_d = load_segment_spec(args.initbar, cs.d, cs.r0) if args.initbar else None
    events = load_events(args.inject, cs.measure)
    cfg = _solver(args)
    ens = solve_ensemble(
        cs,
        Segment.from_dict(xi_d),
        cfg,
        args.paths,
        args.seed,
        xibar=Segment.from_dict(xibar_d) if xibar_d else None,
        inject=events,
        record=True,
    )
    out = out_dir(args)
    paths_dir = out / "paths"
    paths_dir.mkdir(exist_ok=True)
    for k, pr in zip(ens.indices, ens.histories):
        with open(paths_dir / f"path_{int(k):05d}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            hdr = ["t"] + [f"X{i + 1}" for i in range(cs.d)]
            if pr.history_bar is not None:
                hdr += [f"Xbar{i + 1}" for i in range(cs.d)]
            w.writerow(hdr + ["jump"])
            hs = [pr.history] + ([pr.history_bar] if pr.history_bar is not None else [])
            for n, t in enumerate(pr.history.times):
                row = [repr(float(t))]
                jump = False
                for h in hs:
                    row += [repr(float(v)) for v in h.values[n]]
                    jump = jump or bool(np.any(h.values[n] != h.pre[n]))
                w.writerow(row + [int(jump)])
    result = {
        "moment_E_sup_sq": moment_diagnostic(ens),
        "n_paths": ens.n_paths,
        "n_jumps": ens.n_jumps,
        "status": [STATUS_NAMES[int(s)] for s in ens.status],
        "stop_times": ens.stop_times,
    }
    config = {
        "coefficients": ccfg,
        "init": xi_d,
        "initbar": xibar_d,
        "solver": cfg.to_dict(),
        "seed": args.seed,
        "paths": args.paths,
        "inject": events,
    }
    write_json(out / "summary.json", _summary(args, argv, config, result))
    print(json.dumps(_clean(result)["moment_E_sup_sq"]))
    return EXIT_OK


def cmd_check_conditions(args, argv) -> int:
    ccfg = load_coeff_config(args.coeff, args.param)
    cs = coefficients_from_config(ccfg)
    reports = check_conditions(cs, n_samples=args.samples, seed=args.seed)
    result = {k: r.to_dict() for k, r in reports.items()}
    result["confirmed_witnesses"] = {k: r.confirm(cs) for k, r in reports.items() if not r.passed}
    if args.a2_horizon:
        result["A2"] = check_A2(cs, args.a2_horizon).to_dict()
    out = out_dir(args)
    config = {"coefficients": ccfg, "samples": args.samples, "seed": args.seed, "a2_horizon": args.a2_horizon}
    write_json(out / "conditions.json", _summary(args, argv, config, result))
    for k, r in reports.items():
        print(f"{k}: {r.verdict} ({r.evidence}, {r.n_samples} samples)")
    if args.expect_pass and not all(r.passed for r in reports.values()):
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify_order(args, argv) -> int:
    ccfg = load_coeff_config(args.coeff, args.param)
    cs = coefficients_from_config(ccfg)
    xi_d = load_segment_spec(args.init, cs.d, cs.r0)
    xibar_d = load_segment_spec(args.initbar, cs.d, cs.r0)
    events = load_events(args.inject, cs.measure)
    cfg = _solver(args)
    metric = verify_order_mc(
        cs, Segment.from_dict(xi_d), Segment.from_dict(xibar_d), cfg, args.paths, args.seed, inject=events
    )
    out = out_dir(args)
    with open(out / "hard_sup_per_path.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "hard_sup"])
        for k, v in zip(metric.indices, metric.per_path):
            w.writerow([int(k), repr(float(v))])
    config = {
        "coefficients": ccfg,
        "init": xi_d,
        "initbar": xibar_d,
        "solver": cfg.to_dict(),
        "seed": args.seed,
        "paths": args.paths,
        "inject": events,
    }
    result = metric.to_dict()
    result.pop("config")
    write_json(out / "order.json", _summary(args, argv, config, result))
    print(json.dumps({"hard_sup": metric.hard_sup, "violation_frequency": metric.violation_frequency}))
    if args.expect_pass and metric.hard_sup > 0:
        return EXIT_FAIL
    return EXIT_OK


def cmd_necessity_probe(args, argv) -> int:
    ccfg = load_coeff_config(args.coeff, args.param)
    cs = coefficients_from_config(ccfg)
    xi_d = load_segment_spec(args.init, cs.d, cs.r0)
    xibar_d = load_segment_spec(args.initbar, cs.d, cs.r0)
    rep = necessity_probe_drift(
        cs, args.t0, Segment.from_dict(xi_d), Segment.from_dict(xibar_d), args.eps, args.component
    )
    config = {
        "coefficients": ccfg,
        "init": xi_d,
        "initbar": xibar_d,
        "t0": args.t0,
        "eps": args.eps,
        "component": args.component,
    }
    write_json(out_dir(args) / "probe.json", _summary(args, argv, config, rep.to_dict()))
    print(rep.verdict)
    if args.expect_pass and rep.verdict == "violation":
        return EXIT_FAIL
    return EXIT_OK


def cmd_existence_cascade(args, argv) -> int:
    ccfg = load_coeff_config(args.coeff, args.param)
    cs = coefficients_from_config(ccfg)
    xi_d = load_segment_spec(args.init, cs.d, cs.r0)
    try:
        levels = [int(v) for v in args.levels.split(",")]
    except ValueError:
        raise UsageError(f"--levels expects integers, got {args.levels!r}") from None
    cfg = _solver(args)
    law = MollifierLaw.create(cs.r0, cs.d, args.samples, seed=args.seed)
    res = approximation_cascade(
        cs.unbarred, Segment.from_dict(xi_d), cfg, law, levels, seed=args.seed, truncate=args.truncate
    )
    out = out_dir(args)
    for n, pr in res.paths.items():
        with open(out / f"level_{n:04d}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"X{i + 1}" for i in range(cs.d)] + ["jump"])
            h = pr.history
            for t, v, p in zip(h.times, h.values, h.pre):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in v] + [int(np.any(v != p))])
    config = {
        "coefficients": ccfg,
        "init": xi_d,
        "solver": cfg.to_dict(),
        "seed": args.seed,
        "levels": levels,
        "samples": args.samples,
        "truncate": args.truncate,
    }
    write_json(out / "cascade.json", _summary(args, argv, config, res.to_dict()))
    for row in res.gap_table():
        print(f"D({row['n']}) = {row['D']!r}")
    return EXIT_OK


def cmd_bihari(args, argv) -> int:
    k = BihariKernel(control(args.u))
    val = bihari_bound(k, args.a, args.c, args.t)
    config = {"u": args.u, "a": args.a, "C": args.c, "t": args.t}
    if args.out or os.environ.get(ENV_OUT):
        write_json(out_dir(args) / "bihari.json", _summary(args, argv, config, {"bound": val}))
    print(repr(val))
    return EXIT_OK


def cmd_psi_table(args, argv) -> int:
    try:
        ns = [int(v) for v in str(args.n).split(",")]
        points = [float(v) for v in args.points.split(",")]
    except ValueError:
        raise UsageError("--n expects integers and --points numbers") from None
    rows = [["n", "s", "psi", "psi_prime", "psi_second"]]
    for n in ns:
        for s in points:
            rows.append([n, repr(s), repr(psi(n, s)), repr(psi_prime(n, s)), repr(psi_second(n, s))])
    text = "\n".join(",".join(str(c) for c in r) for r in rows) + "\n"
    sys.stdout.write(text)
    if args.out or os.environ.get(ENV_OUT):
        (out_dir(args) / "psi_table.csv").write_text(text)
    return EXIT_OK


def cmd_acceptance(args, argv) -> int:
    from . import acceptance

    only = None if not args.only else [int(v) for v in args.only.split(",")]
    results = acceptance.run_all(only)
    for r in results:
        print(r.line())
    if args.out or os.environ.get(ENV_OUT):
        write_json(out_dir(args) / "acceptance.json", {"results": [r.to_dict() for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ordersfde", description="Order preservation for delay equations with jumps.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, coeff=True):
        sp.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./ordersfde-out)")
        if coeff:
            sp.add_argument("--coeff", required=True, help="builtin:NAME or a JSON coefficient config")
            sp.add_argument("--param", action="append", default=[], help="builtin parameter key=value")

    def solver_args(sp, paths=True):
        sp.add_argument("--step", type=float, required=True, help="base step h")
        sp.add_argument("--horizon", type=float, default=1.0, help="final time T")
        sp.add_argument("--t0", type=float, default=0.0)
        sp.add_argument("--R", type=float, default=None, help="stopping radius")
        sp.add_argument("--seed", type=int, default=0)
        if paths:
            sp.add_argument("--paths", type=int, default=1)

    sp = sub.add_parser("simulate", help="solve paths and dump them as CSV")
    common(sp)
    solver_args(sp)
    sp.add_argument("--init", required=True, help="segment JSON, const:v or linear:a,b")
    sp.add_argument("--initbar", help="second initial segment: solve the coupled pair")
    sp.add_argument("--inject", help="JSON list of [time, mark] events replacing the Poisson stream")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check-conditions", help="sampled checks of the drift/diffusion/jump conditions")
    common(sp)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--a2-horizon", type=float, default=None, help="also evaluate (A2) on [0, T]")
    sp.add_argument("--expect-pass", action="store_true")
    sp.set_defaults(func=cmd_check_conditions)

    sp = sub.add_parser("verify-order", help="Monte Carlo order-violation metric")
    common(sp)
    solver_args(sp)
    sp.add_argument("--init", required=True)
    sp.add_argument("--initbar", required=True)
    sp.add_argument("--inject")
    sp.add_argument("--expect-pass", action="store_true")
    sp.set_defaults(func=cmd_verify_order)

    sp = sub.add_parser("necessity-probe", help="generator comparison with a bump test function")
    common(sp)
    sp.add_argument("--init", required=True)
    sp.add_argument("--initbar", required=True)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--component", type=int, default=None, help="0-based component")
    sp.add_argument("--expect-pass", action="store_true")
    sp.set_defaults(func=cmd_necessity_probe)

    sp = sub.add_parser("existence-cascade", help="mollified approximations and their Cauchy gaps")
    common(sp)
    solver_args(sp, paths=False)
    sp.add_argument("--init", default="const:0")
    sp.add_argument("--levels", default="1,2,4,8,16")
    sp.add_argument("--samples", type=int, default=10_000, help="mollifier samples")
    sp.add_argument("--truncate", action="store_true", help="also truncate the coefficients at level n")
    sp.set_defaults(func=cmd_existence_cascade)

    sp = sub.add_parser("bihari", help="Bihari bound G^-1(G(a) + C t)")
    common(sp, coeff=False)
    sp.add_argument("--u", default="one")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.set_defaults(func=cmd_bihari)

    sp = sub.add_parser("psi-table", help="tabulate psi_n, psi_n' and psi_n''")
    common(sp, coeff=False)
    sp.add_argument("--n", default="1")
    sp.add_argument("--points", required=True)
    sp.set_defaults(func=cmd_psi_table)

    sp = sub.add_parser("acceptance", help="run the bundled acceptance experiments")
    common(sp, coeff=False)
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.set_defaults(func=cmd_acceptance)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, argv)
    except (UsageError, SFDEError, ValueError, KeyError) as exc:
        print(f"ordersfde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
