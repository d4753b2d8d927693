import math

import numpy as np
import pytest

from balax.grids import IntervalGrid, Verdict, geometric_points, parse_grid_spec, stabilization


def test_geometric_points_include_endpoints():
    pts = geometric_points(1, 100, 2)
    assert pts[0] == 1 and pts[-1] == 100
    assert np.all(np.diff(pts) > 0)


def test_grid_spec_round_trip():
    assert parse_grid_spec("1:1e6:1.25") == (1.0, 1e6, 1.25)
    with pytest.raises(ValueError):
        parse_grid_spec("1:2")
    g = IntervalGrid.from_spec("1:16:2")
    assert len(g) == 10  # 5 points, all pairs


def test_interval_grid_requires_r_at_least_one():
    with pytest.raises(ValueError):
        IntervalGrid.from_pairs([(0.5, 2)])
    with pytest.raises(ValueError):
        IntervalGrid.from_pairs([(2, 2)])


def test_stabilization_bounded_and_log_growth():
    x = geometric_points(1, 1e6, 2)
    assert stabilization(x, 1 - 1 / x).verdict is Verdict.YES
    assert stabilization(x, np.log(x)).verdict is Verdict.NO
    assert stabilization(x[:3], x[:3]).verdict is Verdict.INCONCLUSIVE


def test_stabilization_toward_zero():
    x = np.geomspace(1e-3, 1e-1, 9)
    assert stabilization(x, x, toward="zero").verdict is Verdict.YES
    assert stabilization(x, 1 / x, toward="zero").verdict is Verdict.NO


def test_stabilization_borderline_is_inconclusive():
    x = geometric_points(1, 1e4, 2)
    s_in = 1.0
    vals = np.where(x <= 100, s_in, s_in * 1.3)
    assert stabilization(x, vals).verdict is Verdict.INCONCLUSIVE


def test_verdict_exit_codes():
    assert [v.exit_code for v in Verdict] == [0, 1, 2]
