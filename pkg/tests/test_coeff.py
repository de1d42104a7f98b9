from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordersfde.coeff import (
    CATALOGUE,
    CoefficientSet,
    builtin,
    check_A1,
    check_A2,
    coefficients_from_config,
    control,
    custom_control,
    parse_expr,
    validate_control,
)
from ordersfde.coeff.config import load_coefficients
from ordersfde.coeff.dsl import to_text
from ordersfde.errors import BadParams, ExprSyntaxError, ThetaOutOfRange, UnknownName, UnknownSymbol
from ordersfde.sampling import fixed_pairs, independent_pairs
from ordersfde.segment import Segment, SegmentBatch


def _eval(text, values, d=1, r0=0.0, t=0.0):
    seg = Segment.constant(values, r0=r0, d=d)
    return float(parse_expr(text, d=d, r0=r0).compile()(t, seg, 0.0))


# -- DSL ----------------------------------------------------------------------


def test_parse_examples():
    assert _eval("0", 3.0) == 0.0
    seg = Segment.linear(5.0, 2.0, r0=1.0)
    e = parse_expr("-x[1](0) + x[1](-1)", d=1, r0=1.0)
    assert float(e.compile()(0.0, seg, 0.0)) == 3.0
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("x[2](0", d=2)
    assert err.value.position == len("x[2](0")


def test_parse_errors():
    with pytest.raises(UnknownSymbol):
        parse_expr("y + 1")
    with pytest.raises(UnknownSymbol):
        parse_expr("x[3](0)", d=2)
    with pytest.raises(ThetaOutOfRange):
        parse_expr("x[1](-2)", r0=1.0)
    with pytest.raises(UnknownSymbol):
        parse_expr("z")
    with pytest.raises(ExprSyntaxError):
        parse_expr("")


def test_precedence_and_functions():
    assert _eval("2 + 3 * 4 ^ 2", 0.0) == 50.0
    assert _eval("2 ^ 3 ^ 2", 0.0) == 512.0
    assert _eval("-2 ^ 2", 0.0) == -4.0
    assert _eval("clip(x[1](0), -1, 1)", 7.0) == 1.0
    assert _eval("max(1, 2, x[1](0))", 3.0) == 3.0
    assert _eval("exp(log(5)) + abs(-1) + sqrt(4)", 0.0) == pytest.approx(8.0)
    assert _eval("t * pi", 0.0, t=2.0) == pytest.approx(2 * math.pi)


def test_min_matches_componentwise_oracle():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(200, 1, 2))
    batch = SegmentBatch(np.array([0.0]), vals, 0.0)
    got = parse_expr("min(x[1](0), x[2](0))", d=2).compile()(0.0, batch, 0.0)
    np.testing.assert_array_equal(got, np.minimum(vals[:, 0, 0], vals[:, 0, 1]))


_leaf = st.sampled_from(["1", "2.5", "t", "x[1](0)", "x[2](-0.5)", "pi"])


def _exprs():
    return st.recursive(
        _leaf,
        lambda inner: st.one_of(
            st.tuples(inner, st.sampled_from(["+", "-", "*", "/", "^"]), inner).map(
                lambda p: f"({p[0]}) {p[1]} ({p[2]})"
            ),
            inner.map(lambda a: f"-({a})"),
            st.tuples(st.sampled_from(["min", "max"]), inner, inner).map(lambda p: f"{p[0]}({p[1]}, {p[2]})"),
            inner.map(lambda a: f"abs({a})"),
        ),
        max_leaves=8,
    )


@settings(max_examples=150, deadline=None)
@given(_exprs())
def test_print_parse_fixed_point(text):
    e = parse_expr(text, d=2, r0=1.0)
    printed = to_text(e.ast)
    again = parse_expr(printed, d=2, r0=1.0)
    assert again.ast == e.ast
    assert to_text(again.ast) == printed


# -- control functions --------------------------------------------------------


def test_builtin_controls_validate():
    for tag in ("one", "log"):
        rep = validate_control(control(tag))
        assert rep.ok and rep.divergence_verified
    assert not validate_control(custom_control(lambda s: 0.5 + 0 * s)).lower_bound_ok
    assert not custom_control(lambda s: 1 + 0 * s).divergence_verified
    with pytest.raises(UnknownName):
        control("cubic")


# -- (A1) / (A2) --------------------------------------------------------------


def _only_unbarred(cfg):
    cfg = dict(cfg)
    cfg.setdefault("barred", {})
    cfg["barred"].setdefault("b", ["0"])
    return coefficients_from_config(cfg)


def test_A1_linear_ratio_is_four():
    cs = _only_unbarred({"d": 1, "m": 1, "r0": 0, "b": ["2 * x[1](0)"]})
    rep = check_A1(cs, control("one"), n_samples=500)
    assert rep.max_ratio == pytest.approx(4.0, rel=1e-12)
    assert rep.n_degenerate == 0


def test_A1_sqrt_drift_fails_budget():
    cs = _only_unbarred({"d": 1, "m": 1, "r0": 0, "b": ["sqrt(abs(x[1](0)))"]})
    delta = 1e-6
    rep = check_A1(cs, control("log"), fixed_pairs([([delta], [0.0])]), n_samples=1, K=1e3)
    expected = delta / (delta**2 * math.log(math.e + 1 / delta**2))
    assert rep.max_ratio == pytest.approx(expected, rel=1e-9)
    assert rep.passed is False


def test_A1_log_lipschitz_ratio_is_one():
    ll = builtin("log_lipschitz_drift")
    cs = CoefficientSet(ll.unbarred, builtin("zero").barred)
    xs = np.logspace(-8, 2, 41)
    rep = check_A1(cs, control("log"), fixed_pairs([([x], [0.0]) for x in xs]), n_samples=len(xs))
    np.testing.assert_allclose(rep.ratios, 1.0, rtol=1e-12)


def test_A1_ratio_stable_under_doubling():
    cs = builtin("linear_drift")
    a = check_A1(cs, control("one"), independent_pairs(1, 0.0), n_samples=2000, seed=1)
    b = check_A1(cs, control("one"), independent_pairs(1, 0.0), n_samples=4000, seed=1)
    assert math.isfinite(a.max_ratio)
    assert b.max_ratio == pytest.approx(a.max_ratio, rel=0.05)


def test_A2_examples():
    assert check_A2(builtin("zero"), 1.0).C == 0.0
    cs = _only_unbarred({"d": 1, "m": 1, "r0": 0, "b": ["t"]})
    assert check_A2(cs, 2.0).sup_value == 4.0
    cs = coefficients_from_config(
        {"d": 1, "m": 1, "r0": 0, "marks": [{"name": "z1", "value": 1.0, "rate": 3.0}], "gamma": ["1"]}
    )
    assert check_A2(cs, 1.0).jump_integral == pytest.approx(6.0, rel=1e-14)


# -- builtins and config --------------------------------------------------------


def test_builtin_catalogue_examples():
    z = builtin("zero", d=1, m=1, r0=0)
    seg = Segment.constant(2.0)
    for h in (z.unbarred, z.barred):
        assert np.all(h.b(0.0, seg) == 0) and np.all(h.sigma(0.0, seg) == 0)
    s = builtin("shifted_drift_pair", c=1)
    assert float(s.unbarred.b(0.0, seg)[0]) == -2.0
    assert float(s.barred.b(0.0, seg)[0]) == -1.0
    assert float(s.barred.sigma(0.0, seg)[0, 0]) == 2.0
    dd = builtin("delayed_diffusion", r0=1)
    path = Segment.linear(3.0, 5.0, r0=1.0)
    assert float(dd.unbarred.sigma(0.0, path)[0, 0]) == 3.0
    assert float(dd.barred.sigma(0.0, path)[0, 0]) == 3.0
    assert float(dd.unbarred.b(0.0, path)[0]) == 0.0
    assert len(CATALOGUE) == 10


def test_builtin_errors():
    with pytest.raises(UnknownName):
        builtin("nope")
    with pytest.raises(BadParams):
        builtin("zero", colour=1)
    with pytest.raises(BadParams):
        builtin("delayed_diffusion", r0=0)


def test_config_validation_and_marks(tmp_path):
    cfg = {
        "d": 1,
        "m": 1,
        "r0": 1,
        "marks": [{"name": "up", "value": 1.0, "rate": 2.0}, {"name": "down", "value": -1.0, "rate": 1.0}],
        "b": ["-x[1](0) + x[1](-1)"],
        "sigma": [["0.5 * x[1](0)"]],
        "gamma": {"up": ["z"]},
    }
    cs = coefficients_from_config(cfg)
    seg = Segment.constant(2.0, r0=1.0)
    assert float(cs.unbarred.gamma(0.0, seg, 0)[0]) == 1.0
    assert float(cs.unbarred.gamma(0.0, seg, 1)[0]) == 0.0
    assert float(cs.barred.sigma(0.0, seg)[0, 0]) == 1.0
    with pytest.raises(BadParams):
        coefficients_from_config({"d": 1, "b": ["1"], "colour": "red"})
    path = tmp_path / "c.json"
    path.write_text('{"builtin": "linear_drift", "params": {"lam": 2.0}}')
    cs2, raw = load_coefficients(str(path))
    assert cs2.params["lam"] == 2.0
    assert load_coefficients("builtin:zero")[0].name == "zero"
