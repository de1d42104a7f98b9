from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ordersfde.segment import History, Segment, align, join, leq, meet, same_path, sup_norm, truncate


def test_sup_norm_examples():
    assert sup_norm(Segment.constant(0.0, r0=2.0, d=3)) == 0.0
    assert sup_norm(Segment.constant([1.0, -2.0])) == 3.0
    assert sup_norm(Segment.linear(-3.0, 1.0, r0=1.0)) == 3.0


def test_leq_examples():
    a = Segment.constant([0.0, 5.0], r0=1.0)
    assert leq(a, a)[0]
    assert leq(Segment.constant(0.0), Segment.constant(1.0))[0]
    ok, where = leq(a, Segment.constant([1.0, 4.0], r0=1.0))
    assert not ok
    # 0-based component index; the first failing node is theta = -r0
    assert where == (1, -1.0)


def test_meet_examples():
    a = Segment.linear(-1.0, 2.0, r0=1.0)
    assert same_path(meet(a, a), a)
    assert same_path(meet(Segment.constant(0.0), Segment.constant(1.0)), Segment.constant(0.0))
    m = meet(Segment.constant([1.0, -2.0]), Segment.constant([0.0, 3.0]))
    np.testing.assert_array_equal(m.value0, [0.0, -2.0])


def test_meet_inserts_crossing_node():
    a = Segment.linear(-1.0, 1.0, r0=2.0)
    b = Segment.constant(0.0, r0=2.0)
    m = meet(a, b)
    assert -1.0 in m.times
    assert m(-1.5)[0] == pytest.approx(-0.5)
    assert m(-0.5)[0] == 0.0


def test_history_segments_around_one_jump():
    # path 0 on [-1, 1), then +1 at t* = 1
    times = [-1.0, 0.0, 1.0, 2.0]
    values = [[0.0], [0.0], [1.0], [1.0]]
    pre = [[0.0], [0.0], [0.0], [1.0]]
    h = History(times, values, pre, r0=1.0, t0=0.0)
    assert h.left_segment_at(1.0).value0[0] == 0.0
    assert h.segment_at(1.0).value0[0] == 1.0
    assert same_path(h.segment_at(0.5), h.left_segment_at(0.5))
    c = History([-1.0, 0.0, 2.0], [[3.0]] * 3, r0=1.0, t0=0.0)
    for t in (0.5, 1.0, 2.0):
        assert same_path(c.segment_at(t), Segment.constant(3.0, r0=1.0))
        assert same_path(c.left_segment_at(t), Segment.constant(3.0, r0=1.0))


def test_truncate_clips_and_is_idempotent():
    s = Segment.constant(5.0, r0=1.0)
    assert same_path(truncate(s, 2.0), Segment.constant(2.0, r0=1.0))
    assert same_path(truncate(truncate(s, 2.0), 2.0), truncate(s, 2.0))
    small = Segment.linear(-0.5, 0.5, r0=1.0)
    assert same_path(truncate(small, 2.0), small)


def test_invalid_segments_rejected():
    with pytest.raises(ValueError):
        Segment([-1.0, -0.5], [[0.0], [0.0]], r0=1.0)
    with pytest.raises(ValueError):
        Segment([-1.0, 0.0], [[0.0], [np.nan]])
    with pytest.raises(ValueError):
        Segment([0.0, -1.0], [[0.0], [0.0]])


def test_json_round_trip_keeps_jumps():
    s = Segment([-1.0, -0.5, 0.0], [[0.0], [2.0], [1.0]], pre=[[0.0], [1.0], [1.0]], r0=1.0)
    back = Segment.from_json(s.to_json())
    assert same_path(s, back)
    np.testing.assert_array_equal(back.pre, s.pre)


# -- lattice laws on random aligned segments ----------------------------------

SKELETON = np.linspace(-1.0, 0.0, 5)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


def _segments():
    return arrays(np.float64, (5, 2), elements=finite).map(lambda v: Segment(SKELETON, v, r0=1.0))


@settings(max_examples=60, deadline=None)
@given(_segments(), _segments(), _segments())
def test_partial_order_laws(a, b, c):
    assert leq(a, a)[0]
    if leq(a, b)[0] and leq(b, a)[0]:
        assert same_path(a, b)
    if leq(a, b)[0] and leq(b, c)[0]:
        assert leq(a, c)[0]


@settings(max_examples=60, deadline=None)
@given(_segments(), _segments())
def test_lattice_laws(a, b):
    m, j = meet(a, b), join(a, b)
    assert leq(m, a)[0] and leq(m, b)[0]
    assert leq(a, j)[0] and leq(b, j)[0]
    assert same_path(meet(a, join(a, b)), a, atol=1e-12)
    assert sup_norm(m) <= sup_norm(a) + sup_norm(b)


@settings(max_examples=60, deadline=None)
@given(_segments(), _segments(), st.floats(-5, 5, allow_nan=False))
def test_sup_norm_is_a_norm(a, b, c):
    total = Segment(a.times, a.values + b.values, r0=1.0)
    assert sup_norm(total) <= sup_norm(a) + sup_norm(b) + 1e-12
    assert sup_norm(a.scale(c)) == pytest.approx(abs(c) * sup_norm(a), rel=1e-12, abs=1e-300)


def test_align_refines_both_operands():
    a = Segment([-1.0, 0.0], [[0.0], [1.0]], r0=1.0)
    b = Segment([-1.0, -0.25, 0.0], [[0.0], [3.0], [0.0]], r0=1.0)
    a2, b2 = align(a, b)
    np.testing.assert_array_equal(a2.times, b2.times)
    assert a2(-0.25)[0] == pytest.approx(0.75)
