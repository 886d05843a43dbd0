"""P1 finite-element solver for the planar Dirichlet-to-Neumann spectra.

The free-surface eigenvalues are Rayleigh quotients of the Dirichlet energy
over the boundary trace,

    R(f) = integral_Omega |grad f|^2 dx / integral_F |f|^2 ds,

so the discrete problem is a generalized eigenproblem between the stiffness
matrix and a boundary mass matrix supported on the free-surface nodes.  The
interior (and, for SN, wall) unknowns are condensed out through a Schur
complement, leaving a small dense SPD pencil that a standard symmetric
solver handles: S u = nu M_F u.

SN keeps wall nodes as free unknowns (natural boundary condition); SD
eliminates them (including the surface corner nodes) before condensation.
The built-in mesher covers convex polygons; anything else comes in through
``load_mesh`` (plain text: node count, `x y` lines, triangle count, `i j k`
lines, boundary count, `i j tag` lines, all 0-based).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import geometry
from .geometry import DomainError, PolygonalDomain
from .spectra import Spectrum

__all__ = ["Mesh", "MeshError", "DtnMatrixPair", "triangulate", "load_mesh",
           "save_mesh", "assemble", "dtn_matrices", "dtn_spectrum",
           "dtn_with_error"]


class MeshError(ValueError):
    """Raised for invalid meshes (dangling indices, holes, bad tags...)."""


@dataclass
class Mesh:
    """Conforming triangle mesh with tagged boundary edges.

    ``triangles`` are counterclockwise index triples; ``boundary_edges`` is a
    list of (i, j, tag) with tag "free" or "wall".  Conformity (triangles
    meeting only along full shared edges, boundary edges tiling the actual
    mesh boundary) is checked by :func:`validate_mesh`.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: list

    @property
    def mesh_size(self) -> float:
        tri = self.nodes[self.triangles]
        e = np.concatenate([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 1],
                            tri[:, 0] - tri[:, 2]])
        return float(np.hypot(e[:, 0], e[:, 1]).max())

    def free_nodes(self) -> np.ndarray:
        """Sorted ids of nodes on Free boundary edges (corners included)."""
        ids = {v for i, j, tag in self.boundary_edges if tag == geometry.FREE
               for v in (i, j)}
        return np.array(sorted(ids), dtype=int)

    def wall_nodes(self) -> np.ndarray:
        ids = {v for i, j, tag in self.boundary_edges if tag == geometry.WALL
               for v in (i, j)}
        return np.array(sorted(ids), dtype=int)


def _tri_areas(nodes, triangles):
    p = nodes[triangles]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def validate_mesh(mesh: Mesh) -> None:
    """Check index ranges, orientation, conformity, and boundary tiling."""
    nodes, tris = mesh.nodes, mesh.triangles
    m = nodes.shape[0]
    if nodes.ndim != 2 or nodes.shape[1] != 2:
        raise MeshError("nodes must be an (m, 2) array")
    if tris.ndim != 2 or tris.shape[1] != 3:
        raise MeshError("triangles must be a (t, 3) index array")
    if tris.size and (tris.min() < 0 or tris.max() >= m):
        raise MeshError("triangle refers to a nonexistent node")
    areas = _tri_areas(nodes, tris)
    if np.any(areas <= 0):
        bad = int(np.argmax(areas <= 0))
        raise MeshError(f"triangle {bad} is degenerate or clockwise "
                        f"(signed area {areas[bad]:.3e})")
    counts: dict = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            counts[key] = counts.get(key, 0) + 1
    if any(c > 2 for c in counts.values()):
        raise MeshError("non-conforming mesh: an edge is shared by more than "
                        "two triangles")
    hull = {e for e, c in counts.items() if c == 1}
    tagged = set()
    for i, j, tag in mesh.boundary_edges:
        if tag not in (geometry.FREE, geometry.WALL):
            raise MeshError(f"boundary edge ({i}, {j}) has unknown tag {tag!r}")
        if not (0 <= i < m and 0 <= j < m):
            raise MeshError(f"boundary edge ({i}, {j}) refers to a missing node")
        key = (min(i, j), max(i, j))
        if key not in hull:
            raise MeshError(f"boundary edge ({i}, {j}) is not on the mesh "
                            "boundary (or repeats an interior edge)")
        if key in tagged:
            raise MeshError(f"boundary edge ({i}, {j}) is tagged twice")
        tagged.add(key)
    if tagged != hull:
        missing = sorted(hull - tagged)[:3]
        raise MeshError(f"untagged boundary edges, e.g. {missing}")


# ---------------------------------------------------------------------------
# meshing
# ---------------------------------------------------------------------------

def _classify_boundary(d: PolygonalDomain, nodes, hull_edges):
    """Tag each hull edge by the domain edge its midpoint lies on."""
    segs = [(a, b, tag) for _i, a, b, tag in d.edges()]
    tol = max(d._tol, 1e-9)
    out = []
    for i, j in hull_edges:
        mid = 0.5 * (nodes[i] + nodes[j])
        for a, b, tag in segs:
            ab = b - a
            t = float((mid - a) @ ab) / float(ab @ ab)
            t = min(1.0, max(0.0, t))
            if np.hypot(*(mid - (a + t * ab))) <= tol * (1 + np.hypot(*ab)):
                out.append((int(i), int(j), tag))
                break
        else:
            raise MeshError(f"boundary edge ({i}, {j}) lies on no domain edge")
    return out


def _refine(nodes, triangles, levels):
    """Uniform 4-split refinement (midpoint subdivision), `levels` times."""
    nodes = [tuple(p) for p in nodes]
    tris = [tuple(t) for t in triangles]
    for _ in range(levels):
        midpoint: dict = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in midpoint:
                pa, pb = nodes[a], nodes[b]
                nodes.append(((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2))
                midpoint[key] = len(nodes) - 1
            return midpoint[key]

        out = []
        for a, b, c in tris:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            out.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        tris = out
    return np.array(nodes), np.array(tris, dtype=int)


def _hull_edges(triangles):
    counts: dict = {}
    for tri in triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            counts[key] = counts.get(key, 0) + 1
    return [e for e, c in counts.items() if c == 1]


def triangulate(d: PolygonalDomain, target_h: float) -> Mesh:
    """Mesh a convex polygon with mesh size <= 1.5 * target_h.

    Axis-aligned rectangles get a structured near-square grid (diagonal
    split), triangles are self-similar 4-split refinements of the polygon
    itself, and other convex polygons start from a centroid fan.  Boundary
    segments come out no longer than target_h.  Non-convex polygons are
    rejected; supply a mesh file via :func:`load_mesh` for those.
    """
    if not target_h > 0:
        raise ValueError(f"target_h must be positive, got {target_h}")
    span = d.vertices.max(axis=0) - d.vertices.min(axis=0)
    if target_h >= float(np.hypot(*span)):
        raise ValueError(f"target_h = {target_h} is no smaller than the "
                         "domain diameter; nothing to resolve")

    if geometry.axis_rectangle_sides(d) is not None:
        x0, y0 = d.vertices.min(axis=0)
        x1, y1 = d.vertices.max(axis=0)
        lx, ly = x1 - x0, y1 - y0
        nx = max(1, math.ceil(lx / target_h))
        ny = max(1, math.ceil(ly / target_h))
        xs = np.linspace(x0, x1, nx + 1)
        ys = np.linspace(y0, y1, ny + 1)
        nodes = np.array([(x, y) for y in ys for x in xs])
        tris = []
        for j in range(ny):
            for i in range(nx):
                n00 = j * (nx + 1) + i
                n10, n01 = n00 + 1, n00 + nx + 1
                n11 = n01 + 1
                tris.extend([(n00, n10, n11), (n00, n11, n01)])
        triangles = np.array(tris, dtype=int)
    else:
        m = d.n_vertices
        v, nxt = d.vertices, np.roll(d.vertices, -1, axis=0)
        crosses = (nxt - v)[:, 0] * (np.roll(nxt, -1, axis=0) - nxt)[:, 1] \
            - (nxt - v)[:, 1] * (np.roll(nxt, -1, axis=0) - nxt)[:, 0]
        if np.any(crosses < -d._tol):
            raise DomainError(
                "the built-in mesher handles convex polygons only; create a "
                "mesh with an external tool and use load_mesh")
        if m == 3:
            nodes0, tris0 = d.vertices.copy(), np.array([[0, 1, 2]])
        else:
            centroid = d.vertices.mean(axis=0)
            nodes0 = np.vstack([d.vertices, centroid])
            tris0 = np.array([[i, (i + 1) % m, m] for i in range(m)])
        edge_max = max(float(np.hypot(*(b - a))) for _i, a, b, _t in d.edges())
        levels = 0
        while edge_max / 2 ** levels > target_h:
            levels += 1
        nodes, triangles = _refine(nodes0, tris0, levels)
        while Mesh(nodes, triangles, []).mesh_size > 1.5 * target_h:
            nodes, triangles = _refine(nodes, triangles, 1)

    boundary = _classify_boundary(d, nodes, _hull_edges(triangles))
    mesh = Mesh(nodes, triangles, boundary)
    validate_mesh(mesh)
    return mesh


def load_mesh(path) -> Mesh:
    """Read the plain-text mesh format (see module docstring); validates.

    Clockwise triangles are flipped with a warning rather than rejected.
    """
    with open(path) as fh:
        tokens = [ln.strip() for ln in fh
                  if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        pos = 0
        n_nodes = int(tokens[pos]); pos += 1
        nodes = np.array([[float(x) for x in tokens[pos + i].split()]
                          for i in range(n_nodes)])
        pos += n_nodes
        n_tri = int(tokens[pos]); pos += 1
        tris = np.array([[int(x) for x in tokens[pos + i].split()]
                         for i in range(n_tri)], dtype=int)
        pos += n_tri
        n_bnd = int(tokens[pos]); pos += 1
        boundary = []
        for i in range(n_bnd):
            parts = tokens[pos + i].split()
            boundary.append((int(parts[0]), int(parts[1]), parts[2].lower()))
    except (IndexError, ValueError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc
    if nodes.ndim != 2 or nodes.shape[1] != 2:
        raise MeshError("node lines must contain two coordinates")
    if tris.size and (tris.min() < 0 or tris.max() >= n_nodes):
        raise MeshError("triangle refers to a nonexistent node")
    areas = _tri_areas(nodes, tris)
    flipped = areas < 0
    if np.any(flipped):
        warnings.warn(f"{int(flipped.sum())} clockwise triangle(s) reoriented",
                      stacklevel=2)
        tris[flipped] = tris[flipped][:, ::-1]
    mesh = Mesh(nodes, tris, boundary)
    validate_mesh(mesh)
    return mesh


def save_mesh(mesh: Mesh, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{mesh.nodes.shape[0]}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"{mesh.triangles.shape[0]}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        fh.write(f"{len(mesh.boundary_edges)}\n")
        for i, j, tag in mesh.boundary_edges:
            fh.write(f"{i} {j} {tag}\n")


# ---------------------------------------------------------------------------
# assembly and condensation
# ---------------------------------------------------------------------------

def assemble(mesh: Mesh):
    """(K, M_F): P1 stiffness over all nodes, consistent boundary mass over
    the free-surface nodes (row order = ``mesh.free_nodes()``)."""
    nodes, tris = mesh.nodes, mesh.triangles
    p = nodes[tris]                         # (t, 3, 2)
    areas = _tri_areas(nodes, tris)
    if np.any(areas <= 0):
        raise MeshError("degenerate triangle encountered during assembly")
    # gradients of the barycentric hats: b_i = y_j - y_k, c_i = x_k - x_j
    b = p[:, [1, 2, 0], 1] - p[:, [2, 0, 1], 1]
    c = p[:, [2, 0, 1], 0] - p[:, [1, 2, 0], 0]
    kloc = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) \
        / (4.0 * areas)[:, None, None]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    K = sp.coo_matrix((kloc.ravel(), (rows, cols)),
                      shape=(nodes.shape[0],) * 2).tocsr()

    free = mesh.free_nodes()
    glob2loc = {int(g): i for i, g in enumerate(free)}
    nf = free.size
    mf = np.zeros((nf, nf))
    for i, j, tag in mesh.boundary_edges:
        if tag != geometry.FREE:
            continue
        li, lj = glob2loc[int(i)], glob2loc[int(j)]
        ell = float(np.hypot(*(nodes[j] - nodes[i])))
        mf[li, li] += ell / 3.0
        mf[lj, lj] += ell / 3.0
        mf[li, lj] += ell / 6.0
        mf[lj, li] += ell / 6.0
    return K, mf


@dataclass
class DtnMatrixPair:
    """Schur complement S and boundary mass M_F on the retained surface nodes."""

    S: np.ndarray
    M_F: np.ndarray
    surface_nodes: np.ndarray   # global node ids, row order of S and M_F
    asymmetry: float            # relative asymmetry of S before symmetrizing


def dtn_matrices(mesh: Mesh, problem: str) -> DtnMatrixPair:
    """Condense the stiffness matrix onto the free-surface unknowns.

    SN treats wall nodes as ordinary unknowns and keeps every free-surface
    node; SD removes wall nodes (Dirichlet), including the corner nodes the
    two boundary parts share.
    """
    if problem not in ("SN", "SD"):
        raise ValueError(f"problem must be 'SN' or 'SD', got {problem!r}")
    K, mf = assemble(mesh)
    free = mesh.free_nodes()
    if problem == "SD":
        wall = set(int(w) for w in mesh.wall_nodes())
        keep_mask = np.array([int(g) not in wall for g in free])
        surface = free[keep_mask]
        eliminated = wall
    else:
        surface = free
        keep_mask = np.ones(free.size, dtype=bool)
        eliminated = set()
    if surface.size < 2:
        raise MeshError("too few free-surface unknowns; refine the mesh")
    all_ids = np.arange(mesh.nodes.shape[0])
    surf_set = set(int(v) for v in surface)
    inner = np.array([i for i in all_ids
                      if i not in surf_set and i not in eliminated], dtype=int)

    K_ff = K[surface][:, surface].toarray()
    S = K_ff.copy()
    if inner.size:
        K_fi = K[surface][:, inner].tocsr()
        K_ii = K[inner][:, inner].tocsc()
        try:
            lu = splu(K_ii)
        except RuntimeError as exc:
            raise MeshError(f"interior stiffness block is numerically singular "
                            f"({exc}); the mesh may be disconnected") from exc
        k_if = K_fi.T.tocsc()
        chunk = max(1, min(64, surface.size))
        for start in range(0, surface.size, chunk):
            sl = slice(start, min(start + chunk, surface.size))
            X = lu.solve(k_if[:, sl].toarray())
            S[:, sl] -= K_fi @ X
    scale = float(np.abs(S).max()) or 1.0
    asym = float(np.abs(S - S.T).max()) / scale
    if asym > 1e-10:
        warnings.warn(f"Schur complement asymmetry {asym:.2e} above 1e-10",
                      stacklevel=2)
    S = 0.5 * (S + S.T)
    m_sub = mf[np.ix_(keep_mask, keep_mask)]
    return DtnMatrixPair(S=S, M_F=m_sub, surface_nodes=surface, asymmetry=asym)


def dtn_spectrum(d: PolygonalDomain, problem: str, count: int,
                 target_h: float) -> Spectrum:
    """First `count` Dirichlet-to-Neumann eigenvalues of the meshed domain.

    Solves the condensed pencil S u = nu M_F u with the symmetric
    Cholesky-reduction eigensolver.  The returned Spectrum carries the
    domain metadata and source = "fem:h=<actual mesh size>".
    """
    mesh = triangulate(d, target_h)
    return _spectrum_from_mesh(mesh, d, problem, count)


def _spectrum_from_mesh(mesh: Mesh, d: PolygonalDomain, problem: str,
                        count: int) -> Spectrum:
    pair = dtn_matrices(mesh, problem)
    n_surf = pair.surface_nodes.size
    if not 1 <= count <= n_surf - 1:
        raise ValueError(f"count = {count} exceeds the {n_surf} surface "
                         "unknowns minus one; refine the mesh")
    vals = scipy.linalg.eigh(pair.S, pair.M_F, eigvals_only=True)[:count]
    if problem == "SN":
        # the discrete constant mode lands at solver roundoff, possibly below 0
        vals = np.maximum(vals, 0.0)
    return Spectrum(problem=problem, values=vals,
                    source=f"fem:h={mesh.mesh_size:.6g}",
                    meta=geometry.domain_metadata(d),
                    zero_tol=1e-8 if problem == "SN" else 1e-10)


def dtn_with_error(d: PolygonalDomain, problem: str, count: int,
                   target_h: float):
    """(Spectrum, errors): FEM spectrum plus certified per-eigenvalue errors.

    Solves at target_h and target_h/2 on nested meshes and returns the fine
    spectrum with the plain difference |nu_k(h) - nu_k(h/2)| as the error
    certificate -- for a method of order p >= 1 the true fine-mesh error is
    at most that difference (and about a third of it at the expected p = 2),
    so the certificate is conservative.
    """
    coarse = dtn_spectrum(d, problem, count, target_h)
    fine = dtn_spectrum(d, problem, count, target_h / 2.0)
    errors = np.abs(coarse.values - fine.values)
    return fine, errors
