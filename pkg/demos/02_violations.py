"""Three ways to break order preservation, one per condition.

* drift: b = 1 above b' = 0 at equal endpoints.
* diffusion: the volatility reads the delayed value, which may differ while
  the endpoints agree.
* jump: the unbarred jump resets the state to zero and overtakes the barred path.
"""

from __future__ import annotations

from ordersfde import Segment, SolverConfig, builtin, coefficients_from_config
from ordersfde.order import check_conditions, necessity_probe_drift, verify_order_mc

zero = Segment.constant(0.0)

drift = coefficients_from_config({"d": 1, "m": 1, "r0": 0, "b": ["1"], "barred": {"b": ["0"]}})
probe = necessity_probe_drift(drift, 0.0, zero, zero)
m = verify_order_mc(drift, zero, zero, SolverConfig(1e-3, 1.0), 1000, 0)
print(f"drift:     probe {probe.verdict} (Lh={probe.Lh}, Lbar h={probe.Lbar_h}), "
      f"violation frequency {m.violation_frequency:.3f}")  # fmt: skip

delayed = builtin("delayed_diffusion", r0=1.0)
w = check_conditions(delayed, n_samples=2000)["diffusion"].witness
print(f"diffusion: checker witness sigma={w.lhs:.3g} vs sigma'={w.rhs:.3g} at equal endpoints")
xi, xibar = Segment.constant(0.0, r0=1.0), Segment.linear(1.0, 0.0, 1.0)
m = verify_order_mc(delayed, xi, xibar, SolverConfig(1e-3, 1.0), 1000, 0)
print(f"           violation frequency {m.violation_frequency:.3f} over 1000 paths")

neg = builtin("negating_jump")
m = verify_order_mc(
    neg, Segment.constant(-2.0), Segment.constant(-1.0), SolverConfig(1e-2, 2.0), 4, 0, inject=[(1.0, 0)]
)
print(f"jump:      one injected jump at t=1 gives hard_sup {m.hard_sup} on every path")
