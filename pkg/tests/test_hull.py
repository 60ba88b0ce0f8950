# tests/test_hull.py - Upper-right hull of rate pairs.

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from experiments.hull import convex_hull, hull_contains


def test_collinear_point_is_dropped():
    assert convex_hull([(0.0, 2.0), (2.0, 0.0), (1.0, 1.0)]) == [(0.0, 2.0), (2.0, 0.0)]


def test_single_point_gets_axis_projections():
    assert convex_hull([(1.0, 1.0)]) == [(0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]


def test_interior_points_are_dropped():
    hull = convex_hull([(0.0, 1.0), (0.9, 0.9), (1.0, 0.0), (0.3, 0.3), (0.5, 0.8)])
    assert hull == [(0.0, 1.0), (0.9, 0.9), (1.0, 0.0)]


def test_duplicates_and_order_do_not_matter():
    points = [(1.0, 3.0), (2.5, 2.0), (3.0, 0.5), (1.0, 3.0)]
    assert convex_hull(points) == convex_hull(list(reversed(points)))


def test_vertex_order_and_endpoints():
    hull = convex_hull([(0.4, 2.0), (1.5, 1.8), (2.0, 1.0), (2.2, 0.1)])
    xs = [x for x, _ in hull]
    assert xs == sorted(xs)
    assert hull[0] == (0.0, 2.0)
    assert hull[-1] == (2.2, 0.0)


def test_empty_input():
    with pytest.raises(ValueError):
        convex_hull([])


def test_containment():
    hull = convex_hull([(0.0, 2.0), (2.0, 0.0)])
    assert hull_contains(hull, (1.0, 1.0))
    assert hull_contains(hull, (0.5, 0.5))
    assert not hull_contains(hull, (1.1, 1.1))
    assert not hull_contains(hull, (2.5, 0.0))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0.0, 10.0), st.floats(0.0, 10.0)), min_size=1, max_size=30))
def test_every_point_lies_under_the_hull(points):
    hull = convex_hull(points)
    for point in points:
        assert hull_contains(hull, point, tol=1e-7)
    # the boundary is concave: slopes only fall from left to right
    slopes = [(b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(hull, hull[1:]) if b[0] - a[0] > 1e-9]
    assert all(s2 <= s1 + 1e-6 for s1, s2 in zip(slopes, slopes[1:]))
