import math
from fractions import Fraction as F

import numpy as np
import pytest
from shapely.geometry import LineString, Point
from shapely.ops import polygonize, unary_union

from hoferbounds.geometry import (
    GeometryError,
    Polyline,
    RotationParams,
    count_axis_crossings,
    face_areas,
    fit_upper_slope,
    polyline_meander,
    polyline_to_weighted_meander,
    project_weights,
    rotated_diameter,
    sandwich_experiment,
    straight_diameter,
)
from hoferbounds.meander import Color, validate_meander, validate_weights
from hoferbounds.regiongraph import build_graph, tree_view


def arrangement_face_areas(c: Polyline) -> list[float]:
    """Independent oracle: polygonize curve + axis + circle with shapely."""
    circle = Point(0, 0).buffer(1.0, quad_segs=4096).exterior
    lines = unary_union([LineString(c.points), LineString([(-1, 0), (1, 0)]), circle])
    return sorted(face.area / math.pi for face in polygonize(lines))


def test_straight_diameter():
    c = straight_diameter()
    assert count_axis_crossings(c) == 0
    assert count_axis_crossings(rotated_diameter(RotationParams(0))) == 0
    with pytest.raises(GeometryError):
        polyline_to_weighted_meander(c)


@pytest.mark.parametrize("t,expected", [(0.4, 1), (1.2, 3), (2.3, 5), (7.7, 15)])
def test_crossing_counts(t, expected):
    c = rotated_diameter(RotationParams(t))
    assert c.is_embedded()
    assert count_axis_crossings(c) == expected
    assert expected <= 2 * t + 1


def test_crossings_monotone_and_bounded():
    ts = [round(0.1 * k, 10) for k in range(1, 101)]
    counts = []
    for t in ts:
        p = RotationParams(t).nondegenerate()
        counts.append(count_axis_crossings(rotated_diameter(p)))
        assert counts[-1] <= 2 * p.t + 1
    assert counts == sorted(counts)


def test_degenerate_t_offset():
    assert RotationParams(2.0).nondegenerate().t == pytest.approx(2.001)
    assert RotationParams(1.5).nondegenerate().t == pytest.approx(1.501)
    assert RotationParams(1.3).nondegenerate().t == 1.3
    with pytest.raises(GeometryError, match="axis"):
        rotated_diameter(RotationParams(2.0))


def test_rotation_params_checked():
    with pytest.raises(GeometryError):
        RotationParams(-1)
    with pytest.raises(GeometryError):
        RotationParams(1, eps=0)
    with pytest.raises(GeometryError, match="nonincreasing"):
        RotationParams(1, ramp=lambda u: (1 - u) * (1 + 0.5 * np.sin(6 * np.pi * u)))
    with pytest.raises(GeometryError, match="go from 1"):
        RotationParams(1, ramp=lambda u: 1 - 0.5 * u)


def test_angle_profile():
    p = RotationParams(1.7, eps=0.1)
    assert p.angle(0.5) == pytest.approx(math.pi * 1.7)
    assert p.angle(0.9) == pytest.approx(math.pi * 1.7)
    assert p.angle(1.0) == pytest.approx(0.0, abs=1e-15)
    r = np.linspace(0.9, 1.0, 500)
    assert (np.diff(p.angle(r)) <= 1e-15).all()


def test_linear_ramp_is_injectable():
    p = RotationParams(3.3, ramp=lambda u: 1 - np.asarray(u))
    c = rotated_diameter(p)
    assert c.is_embedded()
    assert count_axis_crossings(c) == 7


@pytest.mark.parametrize("t", [0.4, 1.2, 2.3, 4.6])
def test_face_areas_match_arrangement(t):
    c = rotated_diameter(RotationParams(t))
    areas = face_areas(c)
    assert sum(areas.values()) == pytest.approx(1.0, abs=1e-4)
    assert sorted(areas.values()) == pytest.approx(arrangement_face_areas(c), abs=2e-5)


def test_small_t_gives_n1():
    wm = polyline_to_weighted_meander(rotated_diameter(RotationParams(0.2)))
    assert wm.n == 1
    assert validate_weights(wm)


def test_spiral_meander_from_rotation():
    wm = polyline_to_weighted_meander(rotated_diameter(RotationParams(2.3)))
    assert wm.n == 5
    assert validate_meander(wm.meander)
    assert validate_weights(wm)
    black = tree_view(build_graph(wm), Color.BLACK)
    assert black.height >= 2
    assert all(len(kids) <= 1 for kids in black.children.values())  # a path


def test_projection_is_small_and_exact():
    c = rotated_diameter(RotationParams(5.6))
    m = polyline_meander(c)
    areas = face_areas(c, m)
    weights, change = project_weights(m, areas)
    assert all(isinstance(w, F) for w in weights.values())
    assert change < 1e-5
    sums = {}
    regions = build_graph(m).vertices
    for v in regions:
        sums[v.side] = sums.get(v.side, 0) + weights[v.id]
        sums[v.color] = sums.get(v.color, 0) + weights[v.id]
    assert set(sums.values()) == {F(1, 2)}


def test_non_embedded_curve_rejected():
    pts = np.array([[-1, 0], [0.5, -0.5], [0.5, 0.5], [-0.5, -0.5], [1, 0]], dtype=float)
    c = Polyline(pts)
    assert not c.is_embedded()
    with pytest.raises(GeometryError, match="embedded"):
        face_areas(c)


def test_vertex_on_axis_rejected():
    c = Polyline(np.array([[-1, 0], [-0.5, -0.2], [0, 0], [0.5, 0.2], [1, 0]]))
    with pytest.raises(GeometryError, match="axis"):
        count_axis_crossings(c)


def test_sandwich_small():
    table = sandwich_experiment([2, 3, 4, 5, 6], samples=2000)
    assert table.lower_rate == 0.125
    assert table.holds
    ns = [r.n for r in table.rows]
    assert ns == sorted(ns)
    for r in table.rows:
        assert r.upper_cost <= F(r.n, 8) + 1
        assert float(r.upper_cost) <= (2 * r.t + 1) / 8 + 1
    csv = table.to_csv()
    assert csv.splitlines()[0] == "t,n,upper_cost,lower_rate,lower_line"
    assert len(csv.splitlines()) == 6 and "\r" not in csv


def test_fit_upper_slope():
    ts = np.arange(0, 11)
    assert fit_upper_slope(ts, 3 * ts + 1) == pytest.approx(3)
    # only the upper half counts
    assert fit_upper_slope(ts, np.where(ts < 5, 100, ts)) == pytest.approx(1)
    with pytest.raises(ValueError):
        fit_upper_slope([1.0], [1.0])
