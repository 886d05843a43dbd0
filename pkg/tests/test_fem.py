"""Finite elements: assembly oracles, meshing, condensation, convergence."""

from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
import scipy.linalg

from steklov import fem, geometry, spectra
from steklov.fem import Mesh, MeshError
from steklov.geometry import DomainError


def reference_triangle_mesh():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, -1.0]])
    tris = np.array([[0, 2, 1]])   # counterclockwise for a domain below y=0
    boundary = [(0, 1, "free"), (1, 2, "wall"), (2, 0, "wall")]
    return Mesh(nodes, tris, boundary)


def test_stiffness_reference_triangle():
    # P1 stiffness of the unit right triangle, frozen by hand:
    # grad hats are (-1, 1), (1, 0), (0, -1) up to orientation; K row sums 0
    K, _ = fem.assemble(reference_triangle_mesh())
    Kd = K.toarray()
    expect = 0.5 * np.array([[2.0, -1.0, -1.0],
                             [-1.0, 1.0, 0.0],
                             [-1.0, 0.0, 1.0]])
    assert Kd == pytest.approx(expect, abs=1e-14)
    assert Kd.sum(axis=1) == pytest.approx(np.zeros(3), abs=1e-14)


def test_boundary_mass_total_is_surface_length():
    mesh = fem.triangulate(geometry.rectangle_domain(2.0, 1.0), 0.3)
    _, mf = fem.assemble(mesh)
    assert mf.sum() == pytest.approx(2.0, rel=1e-12)
    assert mf == pytest.approx(mf.T)          # symmetric
    # consistent 1D mass: each free edge contributes [[l/3,l/6],[l/6,l/3]]
    single = reference_triangle_mesh()
    _, mf1 = fem.assemble(single)
    assert mf1 == pytest.approx(np.array([[1 / 3, 1 / 6], [1 / 6, 1 / 3]]))


def test_structured_rectangle_mesh_shape():
    d = geometry.rectangle_domain(1.0, 0.5)
    mesh = fem.triangulate(d, 0.13)
    nx, ny = 8, 4                          # ceil(1/0.13), ceil(0.5/0.13)
    assert mesh.nodes.shape[0] == (nx + 1) * (ny + 1)
    assert mesh.triangles.shape[0] == 2 * nx * ny
    tags = {tag for _i, _j, tag in mesh.boundary_edges}
    assert tags == {"free", "wall"}
    # free edges lie on the surface line y = 0
    for i, j, tag in mesh.boundary_edges:
        ys = mesh.nodes[[i, j], 1]
        if tag == "free":
            assert np.all(np.abs(ys) < 1e-12)
    assert mesh.mesh_size <= 1.5 * 0.13 + 1e-12


def test_triangle_mesher_self_similar():
    d = geometry.isoceles_triangle_domain(2.0, math.pi / 4)
    mesh = fem.triangulate(d, 0.3)
    fem.validate_mesh(mesh)
    assert mesh.mesh_size <= 1.5 * 0.3
    # total triangle area = domain area = L^2 tan(angle) / 4 = 1
    p = mesh.nodes[mesh.triangles]
    areas = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                         - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
    assert areas.sum() == pytest.approx(1.0, rel=1e-12)


def test_convex_fan_mesher():
    d = geometry.trapezoid_domain(2.0, math.pi / 3, 0.6)
    mesh = fem.triangulate(d, 0.2)
    fem.validate_mesh(mesh)
    assert mesh.mesh_size <= 1.5 * 0.2
    free_len = sum(np.hypot(*(mesh.nodes[j] - mesh.nodes[i]))
                   for i, j, tag in mesh.boundary_edges if tag == "free")
    assert free_len == pytest.approx(2.0, rel=1e-12)


def test_nonconvex_polygon_is_rejected():
    d = geometry.PolygonalDomain(
        [(0, 0), (1.0, -0.5), (0.5, -1), (2, -1), (2, 0)], free_edges=[4])
    with pytest.raises(DomainError, match="load_mesh"):
        fem.triangulate(d, 0.1)


def test_triangulate_validates_target_h():
    d = geometry.rectangle_domain(1.0, 1.0)
    with pytest.raises(ValueError):
        fem.triangulate(d, 0.0)
    with pytest.raises(ValueError):
        fem.triangulate(d, 5.0)


def test_mesh_validation_catches_defects():
    good = reference_triangle_mesh()
    with pytest.raises(MeshError, match="nonexistent"):
        fem.validate_mesh(Mesh(good.nodes, np.array([[0, 1, 7]]),
                               good.boundary_edges))
    with pytest.raises(MeshError, match="clockwise|degenerate"):
        fem.validate_mesh(Mesh(good.nodes, np.array([[0, 1, 2]]),
                               good.boundary_edges))
    with pytest.raises(MeshError, match="untagged"):
        fem.validate_mesh(Mesh(good.nodes, good.triangles,
                               [(0, 1, "free")]))
    with pytest.raises(MeshError, match="tag"):
        fem.validate_mesh(Mesh(good.nodes, good.triangles,
                               [(0, 1, "free"), (1, 2, "wall"),
                                (2, 0, "slippery")]))
    with pytest.raises(MeshError, match="twice"):
        fem.validate_mesh(Mesh(good.nodes, good.triangles,
                               [(0, 1, "free"), (1, 2, "wall"),
                                (2, 0, "wall"), (0, 1, "wall")]))


def test_mesh_save_load_roundtrip(tmp_path):
    mesh = fem.triangulate(geometry.rectangle_domain(1.0, 1.0), 0.4)
    path = tmp_path / "mesh.txt"
    fem.save_mesh(mesh, path)
    back = fem.load_mesh(path)
    assert back.nodes == pytest.approx(mesh.nodes)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert back.boundary_edges == mesh.boundary_edges


def test_load_mesh_flips_clockwise_triangles(tmp_path):
    path = tmp_path / "cw.txt"
    path.write_text(
        "3\n0 0\n1 0\n0 -1\n"
        "1\n0 1 2\n"          # clockwise orientation
        "3\n0 1 free\n1 2 wall\n2 0 wall\n")
    with pytest.warns(UserWarning, match="reoriented"):
        mesh = fem.load_mesh(path)
    fem.validate_mesh(mesh)


def test_load_mesh_rejects_malformed(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2\n0 0\n1 0\n")
    with pytest.raises(MeshError, match="malformed"):
        fem.load_mesh(path)


def test_schur_complement_matches_dense_oracle():
    mesh = fem.triangulate(geometry.rectangle_domain(1.0, 1.0), 0.3)
    pair = fem.dtn_matrices(mesh, "SN")
    K = fem.assemble(mesh)[0].toarray()
    surf = pair.surface_nodes
    inner = np.setdiff1d(np.arange(mesh.nodes.shape[0]), surf)
    s_dense = K[np.ix_(surf, surf)] - K[np.ix_(surf, inner)] @ np.linalg.solve(
        K[np.ix_(inner, inner)], K[np.ix_(inner, surf)])
    assert pair.S == pytest.approx(s_dense, abs=1e-10)
    assert pair.asymmetry < 1e-10


def test_sd_eliminates_wall_and_corner_nodes():
    mesh = fem.triangulate(geometry.rectangle_domain(1.0, 1.0), 0.3)
    sn = fem.dtn_matrices(mesh, "SN")
    sd = fem.dtn_matrices(mesh, "SD")
    # the two surface corners belong to walls, so SD keeps 2 fewer nodes
    assert sd.surface_nodes.size == sn.surface_nodes.size - 2
    wall = set(mesh.wall_nodes())
    assert not wall.intersection(sd.surface_nodes)


def test_dtn_spectrum_rectangle_oracle():
    d = geometry.rectangle_domain(math.pi, 1.0)
    exact_sn = spectra.rectangle_sn(math.pi, 1.0, 8).values
    exact_sd = spectra.rectangle_sd(math.pi, 1.0, 8).values
    sn = fem.dtn_spectrum(d, "SN", 8, 0.04)
    sd = fem.dtn_spectrum(d, "SD", 8, 0.04)
    assert sn.values[0] <= 1e-8                   # ground mode
    assert sn.values[1:] == pytest.approx(exact_sn[1:], rel=2e-2)
    assert sd.values == pytest.approx(exact_sd, rel=3e-2)
    assert np.all(sd.values[:-1] > sn.values[1:])  # clamping raises everything
    assert sn.source.startswith("fem:h=")
    assert sn.meta["areaF"] == pytest.approx(math.pi)


def test_dtn_spectrum_validates_count():
    d = geometry.rectangle_domain(1.0, 1.0)
    with pytest.raises(ValueError, match="count"):
        fem.dtn_spectrum(d, "SN", 500, 0.3)
    with pytest.raises(ValueError):
        fem.dtn_matrices(fem.triangulate(d, 0.3), "XX")


def test_dtn_with_error_certificates():
    d = geometry.rectangle_domain(math.pi, 1.0)
    s, errs = fem.dtn_with_error(d, "SN", 6, 0.1)
    exact = spectra.rectangle_sn(math.pi, 1.0, 6).values
    assert errs.shape == (6,)
    assert np.all(errs >= 0)
    # the certificate dominates the true fine-mesh error (order 2 method)
    true_err = np.abs(s.values - exact)
    assert np.all(true_err[1:] <= errs[1:] + 1e-12)


def test_fem_monotone_in_depth():
    # deeper tank -> higher sloshing frequencies, visible through FEM too
    shallow = fem.dtn_spectrum(geometry.rectangle_domain(2.0, 0.5), "SN", 5, 0.05)
    deep = fem.dtn_spectrum(geometry.rectangle_domain(2.0, 1.0), "SN", 5, 0.05)
    assert np.all(deep.values[1:] > shallow.values[1:])
