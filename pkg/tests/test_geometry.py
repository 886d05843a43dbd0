"""Domain descriptions: areas, angles, wall splits, John conditions."""

from __future__ import annotations

import math

import numpy as np
import pytest

from steklov import geometry
from steklov.geometry import (ConeDomain, CylinderDomain, DomainError,
                              ExplicitBase, IntervalBase, PolygonalDomain,
                              RectangleBase)


def unit_square():
    return geometry.rectangle_domain(1.0, 1.0)


def test_rectangle_domain_layout():
    d = geometry.rectangle_domain(math.pi, 1.0)
    assert d.n_vertices == 4
    assert geometry.free_length(d) == pytest.approx(math.pi, rel=1e-15)
    assert geometry.depth(d) == pytest.approx(1.0)
    tags = [tag for _i, _a, _b, tag in d.edges()]
    assert tags.count(geometry.FREE) == 1
    assert tags.count(geometry.WALL) == 3


def test_rectangle_corner_angles_are_right():
    d = unit_square()
    corners = geometry.corner_angles(d)
    assert len(corners) == 2
    for _pt, angle in corners:
        assert angle == pytest.approx(math.pi / 2, abs=1e-12)


def test_isoceles_triangle_angles_and_area():
    d = geometry.isoceles_triangle_domain(2.0, math.pi / 4)
    corners = geometry.corner_angles(d)
    assert [a for _p, a in corners] == pytest.approx([math.pi / 4] * 2)
    # apex depth = (L/2) tan(angle)
    assert geometry.depth(d) == pytest.approx(1.0)
    assert geometry.free_length(d) == pytest.approx(2.0)


def test_trapezoid_reduces_to_rectangle_at_right_angle():
    t = geometry.trapezoid_domain(2.0, math.pi / 2, 0.7)
    r = geometry.rectangle_domain(2.0, 0.7)
    assert np.allclose(np.sort(t.vertices, axis=0), np.sort(r.vertices, axis=0))


def test_free_surface_must_be_on_axis():
    with pytest.raises(DomainError):
        PolygonalDomain([(0, 0), (1, -0.3), (1, 1)], free_edges=[2])


def test_polygon_requires_some_free_edge():
    with pytest.raises(DomainError):
        PolygonalDomain([(0, 0), (1, 0), (1, -1), (0, -1)], free_edges=[])


def test_domain_below_surface_check():
    # a vertex strictly above y = 0 is not a sloshing geometry
    with pytest.raises(DomainError):
        PolygonalDomain([(0, 0), (1, 0), (1, 0.5), (0, -1)], free_edges=[0])


def pocket_polygon():
    """Non-convex domain whose wall between depths 0.5 and 1 faces upward."""
    return PolygonalDomain([(0, 0), (1.0, -0.5), (0.5, -1), (2, -1), (2, 0)],
                           free_edges=[4])


def test_wall_sign_split_rectangle_has_no_upward_walls():
    up, down = geometry.wall_sign_split(unit_square())
    assert up == []
    assert len(down) == 3  # vertical walls count as downward


def test_wall_sign_split_detects_overhang():
    d = pocket_polygon()
    up, down = geometry.wall_sign_split(d)
    assert len(up) == 1
    a = d.vertices[up[0]]
    b = d.vertices[(up[0] + 1) % d.n_vertices]
    assert sorted([a[1], b[1]]) == pytest.approx([-1.0, -0.5])


def test_john_condition_rectangle_vs_wide_bottom():
    assert geometry.john_condition(unit_square())
    # bottom wider than the free surface: sticks out of the strip below F
    d = PolygonalDomain([(0, 0), (-1, -1), (2, -1), (1, 0)], free_edges=[3])
    assert not geometry.john_condition(d)


def test_cylinder_properties():
    c = CylinderDomain(3, RectangleBase(1.0, 2.0), 0.5)
    assert geometry.ambient_dim(c) == 3
    assert geometry.free_area(c) == pytest.approx(2.0)
    assert geometry.depth(c) == pytest.approx(0.5)
    assert geometry.john_condition(c)


def test_interval_base_is_planar_cylinder():
    c = CylinderDomain(2, IntervalBase(math.pi), 1.0)
    assert geometry.free_area(c) == pytest.approx(math.pi)
    assert geometry.ambient_dim(c) == 2


def test_explicit_base_keeps_given_data():
    b = ExplicitBase((0.0, 1.5, 2.5), "neumann", 4.0)
    c = CylinderDomain(3, b, 2.0)
    assert geometry.free_area(c) == pytest.approx(4.0)


def test_cone_geometry():
    # half angle measured between wall and surface at the rim
    cone = ConeDomain(math.pi / 6, 2.0)
    assert geometry.ambient_dim(cone) == 3
    r = 2.0 / math.tan(math.pi / 6)
    assert cone.base_radius == pytest.approx(r)
    assert geometry.free_area(cone) == pytest.approx(math.pi * r * r)
    assert geometry.john_condition(cone)


def test_overhanging_cone_fails_john():
    assert not geometry.john_condition(ConeDomain(2.0, 1.0))  # alpha > pi/2


def test_domain_metadata_roundtrip_keys():
    meta = geometry.domain_metadata(geometry.rectangle_domain(3.0, 1.5))
    assert meta["n"] == 2
    assert meta["areaF"] == pytest.approx(3.0)
    assert meta["depth"] == pytest.approx(1.5)
    assert meta["john"] is True
    assert meta["alpha"] == pytest.approx(math.pi / 2)


def test_metadata_for_triangle_includes_angles():
    meta = geometry.domain_metadata(
        geometry.isoceles_triangle_domain(2.0, math.pi / 4))
    assert meta["alpha"] == pytest.approx(math.pi / 4)
    assert meta["beta"] == pytest.approx(math.pi / 4)


def test_axis_rectangle_sides():
    assert geometry.axis_rectangle_sides(unit_square()) == pytest.approx((1.0, 1.0))
    tri = geometry.isoceles_triangle_domain(1.0, math.pi / 4)
    assert geometry.axis_rectangle_sides(tri) is None


def test_local_john_condition_at_corners():
    d = unit_square()
    for pt, _angle in geometry.corner_angles(d):
        assert geometry.local_john_condition(d, pt)  # vertical walls
    tri = geometry.isoceles_triangle_domain(2.0, math.pi / 4)
    for pt, _angle in geometry.corner_angles(tri):
        assert geometry.local_john_condition(tri, pt)


def test_overhang_depth_is_min_clearance():
    assert geometry.overhang_depth(pocket_polygon()) == pytest.approx(0.5)
    assert geometry.overhang_depth(unit_square()) is None
