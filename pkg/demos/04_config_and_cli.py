"""Defining coefficients in JSON and driving everything from the CLI.

Writes a config with a delayed mean-reverting drift and an up/down jump
pair, simulates a few paths and prints the first lines of one path dump.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from ordersfde.cli import main

config = {
    "d": 1,
    "m": 1,
    "r0": 1,
    "marks": [{"name": "up", "value": 0.5, "rate": 1.0}, {"name": "down", "value": -0.5, "rate": 1.0}],
    "b": ["-x[1](0) + 0.5 * x[1](-1)"],
    "sigma": [["0.2 * (1 + abs(x[1](0)))"]],
    "gamma": ["z"],
}

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    (tmp / "coeff.json").write_text(json.dumps(config))
    out = tmp / "run"
    code = main(["simulate", "--coeff", str(tmp / "coeff.json"), "--init", "linear:0,1",
                 "--paths", "3", "--step", "0.01", "--horizon", "2", "--seed", "5", "--out", str(out)])  # fmt: skip
    print("exit code", code)
    print("".join((out / "paths" / "path_00000.csv").read_text().splitlines(keepends=True)[:5]))
    replay = json.loads((out / "summary.json").read_text())["replay"]
    print("replay argv:", " ".join(replay))
    code = main(["check-conditions", "--coeff", str(tmp / "coeff.json"), "--samples", "2000", "--out", str(out)])
