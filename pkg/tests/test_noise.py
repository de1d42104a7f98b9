from __future__ import annotations

import numpy as np
import pytest

from ordersfde.errors import InvalidHorizon, UnknownMark, UnsortedEvents, ZeroStep
from ordersfde.noise import TICKS_PER_STEP, MarkMeasure, NoiseRealization, generate, inject_events, path_seed


def test_no_marks_no_events():
    nz = generate(3, 2, MarkMeasure.empty(), 0.0, 5.0, 0.1)
    assert nz.n_events == 0
    assert nz.increments.shape == (50, 2)


def test_same_seed_same_realization():
    meas = MarkMeasure((1.0, -1.0), (2.0, 0.5))
    a = generate((4, 9), 2, meas, 0.0, 10.0, 0.01)
    b = generate((4, 9), 2, meas, 0.0, 10.0, 0.01)
    np.testing.assert_array_equal(a.increments, b.increments)
    np.testing.assert_array_equal(a.event_ticks, b.event_ticks)
    np.testing.assert_array_equal(a.event_marks, b.event_marks)
    np.testing.assert_array_equal(a.bridge_normals, b.bridge_normals)


def test_json_round_trip_is_exact():
    nz = generate(1, 1, MarkMeasure.single(3.0), 0.0, 2.0, 0.25)
    back = NoiseRealization.from_json(nz.to_json())
    np.testing.assert_array_equal(back.increments, nz.increments)
    np.testing.assert_array_equal(back.event_ticks, nz.event_ticks)
    assert back.events() == nz.events()


def test_inject_events():
    nz = generate(0, 1, MarkMeasure.single(1.0), 0.0, 2.0, 0.1)
    assert inject_events(nz, []).n_events == 0
    one = inject_events(nz, [(1.0, 0)])
    assert one.events() == [(1.0, 0)]
    np.testing.assert_array_equal(one.increments, nz.increments)
    with pytest.raises(UnsortedEvents):
        inject_events(nz, [(1.0, 0), (1.0, 0)])
    with pytest.raises(UnsortedEvents):
        inject_events(nz, [(3.0, 0)])
    with pytest.raises(UnknownMark):
        inject_events(nz, [(1.0, 4)])


def test_bad_horizons():
    with pytest.raises(ZeroStep):
        generate(0, 1, MarkMeasure.empty(), 0.0, 1.0, 0.0)
    with pytest.raises(InvalidHorizon):
        generate(0, 1, MarkMeasure.empty(), 1.0, 1.0, 0.1)
    with pytest.raises(InvalidHorizon):
        generate(0, 1, MarkMeasure.empty(), 0.0, 1.0, 0.3)


def test_event_ticks_on_grid():
    nz = generate(5, 1, MarkMeasure.single(50.0), 0.0, 1.0, 0.1)
    assert nz.n_events > 0
    assert np.all(np.diff(nz.event_ticks) > 0)
    assert nz.event_ticks[0] > 0 and nz.event_ticks[-1] <= nz.n_steps * TICKS_PER_STEP
    np.testing.assert_array_equal(nz.event_times, nz.event_ticks * (0.1 / TICKS_PER_STEP))


def test_truncate_keeps_prefix():
    nz = generate(2, 1, MarkMeasure.single(5.0), 0.0, 4.0, 0.5)
    short = nz.truncate(2.0)
    np.testing.assert_array_equal(short.increments, nz.increments[:4])
    assert all(t <= 2.0 for t, _ in short.events())
    assert short.events() == [e for e in nz.events() if e[0] <= 2.0]


def test_coarsen_sums_increments():
    nz = generate(2, 1, MarkMeasure.empty(), 0.0, 1.0, 0.01)
    c = nz.coarsen(10)
    np.testing.assert_allclose(c.increments, nz.increments.reshape(10, 10, 1).sum(axis=1), rtol=0, atol=1e-15)


def test_path_streams_uncorrelated():
    a = generate(path_seed(11, 0), 1, MarkMeasure.empty(), 0.0, 1000.0, 0.01).increments[:, 0]
    b = generate(path_seed(11, 1), 1, MarkMeasure.empty(), 0.0, 1000.0, 0.01).increments[:, 0]
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_mark_measure_lookup():
    meas = MarkMeasure.from_dict(
        [{"name": "up", "value": 1.0, "rate": 2.0}, {"name": "down", "value": -1.0, "rate": 1.0}]
    )
    assert meas.index("down") == 1
    assert meas.total == 3.0
    with pytest.raises(UnknownMark):
        meas.index("sideways")
    with pytest.raises(ValueError):
        MarkMeasure((1.0,), (0.0,))
