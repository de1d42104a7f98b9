from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordersfde import oracles
from ordersfde.coeff import builtin, coefficients_from_config
from ordersfde.errors import OrderPreconditionError, SamplerContractBroken
from ordersfde.order import (
    OrderMetric,
    check_cond_diffusion,
    check_cond_drift,
    check_cond_jump,
    constant_test_function,
    coordinate_test_function,
    generator_L,
    necessity_probe_drift,
    psi,
    psi_prime,
    psi_second,
    verify_order_mc,
)
from ordersfde.order.generator import bump, bump_primitive, bump_slope
from ordersfde.sampling import independent_pairs
from ordersfde.segment import Segment
from ordersfde.solver import SolverConfig

DRIFT_VIOLATOR = {"d": 1, "m": 1, "r0": 0, "b": ["1"], "barred": {"b": ["0"]}}

# -- psi ----------------------------------------------------------------------


def test_psi_examples():
    assert np.all(psi(3, np.array([-2.0, -1e-9, 0.0])) == 0)
    assert psi_second(1, 0.25) == 1.0
    assert psi(1, 2.0) == 1.5
    assert np.all(psi_prime(1, np.array([1.0, 3.0, 50.0])) == 1.0)


@pytest.mark.parametrize("n", [1, 2, 7, 64, 1000])
def test_psi_matches_quadrature(n):
    for s in np.linspace(-0.1, 2.0 / n, 23):
        assert psi(n, s) == pytest.approx(oracles.psi_by_quadrature(n, s), abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 2048), st.floats(-5, 5, allow_nan=False))
def test_psi_family_properties(n, s):
    p, dp, ddp = psi(n, s), psi_prime(n, s), psi_second(n, s)
    assert 0 <= p <= max(s, 0.0)
    assert 0 <= dp <= 1
    assert 0 <= s * ddp <= 1
    assert p <= psi(2 * n, s)
    if s <= 0 or s >= 1 / n:
        assert ddp == 0
    if s >= 1 / n:
        assert p == pytest.approx(s - 1 / (2 * n), abs=1e-12)


# -- condition checkers ---------------------------------------------------------


def test_drift_checker_examples():
    assert check_cond_drift(builtin("delayed_drift")).passed
    assert check_cond_drift(builtin("shifted_drift_pair")).passed
    cs = coefficients_from_config(DRIFT_VIOLATOR)
    rep = check_cond_drift(cs, n_samples=100)
    assert not rep.passed and rep.confirm(cs)
    assert rep.witness.lhs == 1.0 and rep.witness.rhs == 0.0


def test_diffusion_checker_examples():
    assert check_cond_diffusion(builtin("geometric_diffusion")).passed
    assert check_cond_diffusion(builtin("zero")).passed
    cs = builtin("delayed_diffusion")
    rep = check_cond_diffusion(cs)
    assert not rep.passed and rep.confirm(cs)
    w = rep.witness
    assert w.xi.value0[w.i] == w.xibar.value0[w.i]
    assert w.xi(-1.0)[0] != w.xibar(-1.0)[0]


def test_jump_checker_examples():
    assert check_cond_jump(builtin("zero")).passed
    assert check_cond_jump(builtin("constant_jump", c=-3.0)).passed
    cs = builtin("negating_jump")
    rep = check_cond_jump(cs)
    assert not rep.passed and rep.confirm(cs)
    # the jumped unbarred value 0 exceeds the unjumped barred value
    assert rep.witness.lhs > rep.witness.rhs


def test_pass_verdicts_are_tagged_sampled():
    rep = check_cond_drift(builtin("zero"), n_samples=50)
    assert rep.verdict == "pass" and rep.evidence == "sampled"
    assert rep.to_dict()["evidence"] == "sampled"


def test_sampler_contract_enforced():
    with pytest.raises(SamplerContractBroken):
        check_cond_drift(builtin("zero"), sampler=independent_pairs(1, 0.0), n_samples=10)


# -- generator and probe --------------------------------------------------------


def test_bump_profile():
    eps = 0.1
    assert bump(eps, 0.05) == 1.0 and bump(eps, 0.25) == 0.0
    assert bump_primitive(eps, 0.05) == 0.05
    # primitive agrees with numerical integration of the profile
    ys = np.linspace(0.0, 0.3, 3001)
    vals = np.array([bump(eps, y) for y in ys])
    assert bump_primitive(eps, 0.3) == pytest.approx(np.trapezoid(vals, ys), abs=1e-7)
    y, dy = 0.15, 1e-7
    assert bump_slope(eps, y) == pytest.approx((bump(eps, y + dy) - bump(eps, y - dy)) / (2 * dy), rel=1e-6)


def test_generator_examples():
    xi = Segment.constant(0.3)
    assert generator_L(builtin("linear_drift"), constant_test_function(2.0, 1), 0.0, xi) == 0.0
    cs = coefficients_from_config({"d": 1, "m": 1, "r0": 0, "b": ["2.5"]})
    assert generator_L(cs, coordinate_test_function(0, 1), 0.0, xi) == 2.5
    cs = builtin("constant_jump", c=0.75, rate=4.0)
    assert generator_L(cs, coordinate_test_function(0, 1), 0.0, xi) == 3.0


def test_probe_examples():
    zero = Segment.constant(0.0)
    rep = necessity_probe_drift(builtin("shifted_drift_pair"), 0.0, zero, zero)
    assert rep.verdict == "consistent" and rep.Lh == 0.0 and rep.Lbar_h == 1.0
    rep = necessity_probe_drift(coefficients_from_config(DRIFT_VIOLATOR), 0.0, zero, zero)
    assert rep.verdict == "violation" and rep.Lh == 1.0 and rep.Lbar_h == 0.0
    noisy = dict(DRIFT_VIOLATOR, marks=[{"name": "z1", "value": 1.0, "rate": 1.0}], gamma=["10"])
    rep = necessity_probe_drift(coefficients_from_config(noisy), 0.0, zero, zero, eps=1.0)
    assert rep.verdict == "inconclusive"
    with pytest.raises(OrderPreconditionError):
        necessity_probe_drift(builtin("zero"), 0.0, Segment.constant(1.0), zero)


# -- Monte Carlo metric ----------------------------------------------------------


def test_identical_equations_never_violate():
    xi = Segment.constant(0.4)
    m = verify_order_mc(builtin("geometric_diffusion"), xi, xi, SolverConfig(0.01, 1.0), 200, 0)
    assert m.hard_sup == 0.0 and m.violation_frequency == 0.0


def test_unordered_start_rejected():
    with pytest.raises(OrderPreconditionError):
        verify_order_mc(builtin("zero"), Segment.constant(1.0), Segment.constant(0.0), SolverConfig(0.1, 1.0), 2)


def test_soft_metric_increases_to_hard_metric():
    cs = builtin("delayed_diffusion")
    xi, xibar = Segment.constant(0.0, r0=1.0), Segment.linear(1.0, 0.0, 1.0)
    m = verify_order_mc(cs, xi, xibar, SolverConfig(0.01, 1.0), 300, 1)
    levels = [1, 4, 16, 64, 256, 1024, 2**20]
    soft = [m.soft_psi(n) for n in levels]
    assert all(a <= b for a, b in zip(soft, soft[1:]))
    assert soft[-1] == pytest.approx(m.mean_sq_sup, rel=1e-3)
    assert m.violation_frequency > 0


def test_metric_independent_of_path_order():
    cs = builtin("delayed_diffusion")
    xi, xibar = Segment.constant(0.0, r0=1.0), Segment.linear(1.0, 0.0, 1.0)
    cfg = SolverConfig(0.01, 1.0)
    idx = np.arange(64)
    a = verify_order_mc(cs, xi, xibar, cfg, master_seed=2, path_indices=idx)
    b = verify_order_mc(cs, xi, xibar, cfg, master_seed=2, path_indices=np.random.default_rng(0).permutation(idx))
    np.testing.assert_array_equal(a.d_sup, b.d_sup)
    assert a.to_dict()["soft_psi"] == b.to_dict()["soft_psi"]


def test_metric_from_known_gaps():
    m = OrderMetric(np.array([[-1.0], [0.5], [2.0], [0.0]]), np.arange(4))
    assert m.hard_sup == 2.0
    assert m.violation_frequency == 0.5
    assert m.mean_sq_sup == pytest.approx((0.25 + 4.0) / 4)
