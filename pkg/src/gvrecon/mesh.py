"""Derivatives on triangulated surfaces.

Face normals are averaged (unweighted) into vertex normals; a heightfield
normal proportional to ``(f_x, f_y, -1)`` gives the partials directly. A
quadratic patch through nearby points gives first and second partials
mesh-free. Derivative fields are then forced to be gradually varied on the
mesh 1-skeleton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateGeometryError, IllConditionedPatchError,
                     InsufficientNeighborsError, InvalidArgumentError, OutOfDomainError,
                     ParseError, SingularGradientError, VerticalTangentError)
from .graph import DomainGraph, skeleton_of
from .gvf import LevelChain, SampleSet, ScalarField, feasible_chain, gvf_approximate, gvf_extend

VERTICAL_EPS = 1e-6
PATCH_COND_LIMIT = 1e10


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Vertex positions ``(n, 3)`` and triangles ``(m, 3)``."""

    positions: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        tri = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidArgumentError(f"positions must be (n, 3), got {pos.shape}")
        if len(tri) and (tri.min() < 0 or tri.max() >= len(pos)):
            raise InvalidArgumentError("triangle references a missing vertex")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "triangles", tri)
        if len(tri):
            scale = float(np.ptp(pos, axis=0).max()) or 1.0
            area = 0.5 * np.linalg.norm(_raw_face_normals(pos, tri), axis=1)
            bad = np.nonzero(area <= 1e-12 * scale * scale)[0]
            if len(bad):
                raise DegenerateGeometryError(f"degenerate triangles {bad[:10].tolist()}",
                                              triangles=bad.tolist())
            _check_orientation(tri)

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    def lifted(self, heights) -> "TriMesh":
        """Same triangulation with z replaced by ``heights``."""
        pos = self.positions.copy()
        pos[:, 2] = heights
        return TriMesh(pos, self.triangles)


def _check_orientation(tri):
    seen = {}
    for t, (a, b, c) in enumerate(tri.tolist()):
        key = frozenset((a, b, c))
        for e in ((a, b), (b, c), (c, a)):
            prev = seen.get(e)
            # a repeated identical triangle is tolerated and deduplicated later
            if prev is not None and prev[1] != key:
                raise InvalidArgumentError(
                    f"triangles {prev[0]} and {t} traverse edge {e} in the same direction")
            seen[e] = (t, key)


def _raw_face_normals(pos, tri):
    a, b, c = pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]]
    return np.cross(b - a, c - a)


def read_off(path) -> TriMesh:
    """Read an ASCII OFF file with triangular faces."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    tokens = [ln for ln in lines if ln]
    if not tokens or not tokens[0].startswith("OFF"):
        raise ParseError(f"{path}: missing OFF header")
    head = tokens[0][3:].split() or tokens.pop(1).split()
    try:
        nv, nf = int(head[0]), int(head[1])
        verts = [list(map(float, tokens[1 + i].split()[:3])) for i in range(nv)]
        faces = []
        for i in range(nf):
            parts = tokens[1 + nv + i].split()
            if int(parts[0]) != 3:
                raise ParseError(f"{path}: face {i} is not a triangle")
            faces.append([int(p) for p in parts[1:4]])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: malformed OFF body ({exc})") from exc
    return TriMesh(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


def write_off(mesh: TriMesh, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"OFF\n{mesh.vertex_count} {len(mesh.triangles)} 0\n")
        for p in mesh.positions:
            fh.write(" ".join(f"{v:.17g}" for v in p) + "\n")
        for t in mesh.triangles:
            fh.write("3 " + " ".join(str(int(i)) for i in t) + "\n")


def face_normal(mesh: TriMesh, tri_index: int) -> np.ndarray:
    a, b, c = mesh.positions[mesh.triangles[tri_index]]
    n = np.cross(b - a, c - a)
    norm = np.linalg.norm(n)
    if norm <= 1e-300:
        raise DegenerateGeometryError(f"triangle {tri_index} has zero area")
    return n / norm


def face_normals(mesh: TriMesh) -> np.ndarray:
    n = _raw_face_normals(mesh.positions, mesh.triangles)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def vertex_normals(mesh: TriMesh) -> np.ndarray:
    """Normalized unweighted mean of incident face normals, ``(n, 3)``."""
    fn = face_normals(mesh)
    acc = np.zeros((mesh.vertex_count, 3))
    counts = np.zeros(mesh.vertex_count, dtype=np.int64)
    for k in range(3):
        np.add.at(acc, mesh.triangles[:, k], fn)
        np.add.at(counts, mesh.triangles[:, k], 1)
    isolated = np.nonzero(counts == 0)[0]
    if len(isolated):
        raise DegenerateGeometryError(f"isolated vertices {isolated.tolist()}",
                                      vertices=isolated.tolist())
    acc /= counts[:, None]
    norm = np.linalg.norm(acc, axis=1)
    folded = np.nonzero(norm <= 1e-12)[0]
    if len(folded):
        raise DegenerateGeometryError(f"face normals cancel at vertices {folded.tolist()}",
                                      vertices=folded.tolist())
    return acc / norm[:, None]


def normal_to_partials(n, eps: float = VERTICAL_EPS):
    """Partials ``(f_x, f_y)`` of a heightfield from a normal at one point.

    The normal is scaled so its z-component is -1; normals pointing up are
    flipped first.
    """
    nx, ny, nz = (float(c) for c in n)
    if abs(nz) <= eps:
        raise VerticalTangentError(f"normal {tuple(n)} is (nearly) horizontal")
    return -nx / nz, -ny / nz


def partials_from_normals(normals: np.ndarray, eps: float = VERTICAL_EPS) -> np.ndarray:
    """Vectorized :func:`normal_to_partials`, returns ``(n, 2)``."""
    normals = np.asarray(normals, dtype=float)
    nz = normals[:, 2]
    bad = np.nonzero(np.abs(nz) <= eps)[0]
    if len(bad):
        raise VerticalTangentError(f"vertical tangent planes at vertices {bad[:10].tolist()}",
                                   vertices=bad.tolist())
    return -normals[:, :2] / nz[:, None]


def implicit_unit_normal(grad) -> np.ndarray:
    g = np.asarray(grad, dtype=float)
    norm = math.sqrt(float(g @ g))
    if norm <= 1e-12:
        raise SingularGradientError(f"gradient {tuple(g)} is too small to normalize")
    return g / norm


@dataclass(frozen=True)
class QuadraticPatch:
    """``a0 + a1 x + a2 y + a3 xy + a4 x^2 + a5 y^2`` fitted around ``center``."""

    coefficients: tuple
    center: tuple
    residual: float
    # partials at the center, computed in local coordinates
    partials: tuple

    def __call__(self, x, y):
        a0, a1, a2, a3, a4, a5 = self.coefficients
        return a0 + a1 * x + a2 * y + a3 * x * y + a4 * x * x + a5 * y * y

    def derivatives(self) -> dict:
        return dict(zip(("fx", "fy", "fxx", "fxy", "fyy"), self.partials))


def quadratic_fit(center, points) -> QuadraticPatch:
    """Least-squares quadratic through ``points`` (rows ``x, y, value``).

    The solve runs in coordinates centered on ``center`` and scaled to unit
    radius; coefficients are mapped back to absolute ``x, y``.

    Raises
    ------
    InsufficientNeighborsError
        Fewer than 6 points.
    IllConditionedPatchError
        Scaled design matrix condition number above 1e10.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 6:
        raise InsufficientNeighborsError(f"quadratic fit needs >= 6 points, got {len(pts)}")
    x0, y0 = float(center[0]), float(center[1])
    du, dv = pts[:, 0] - x0, pts[:, 1] - y0
    scale = float(np.max(np.hypot(du, dv)))
    if scale == 0.0:
        raise IllConditionedPatchError("all points coincide with the center")
    u, v = du / scale, dv / scale
    design = np.column_stack([np.ones_like(u), u, v, u * v, u * u, v * v])
    cond = np.linalg.cond(design)
    if not cond <= PATCH_COND_LIMIT:
        raise IllConditionedPatchError(f"patch design condition number {cond:.3g} exceeds 1e10",
                                       condition=float(cond))
    b, *_ = np.linalg.lstsq(design, pts[:, 2], rcond=None)
    resid = float(np.linalg.norm(design @ b - pts[:, 2]))
    s2 = scale * scale
    fx, fy = b[1] / scale, b[2] / scale
    c3, c4, c5 = b[3] / s2, b[4] / s2, b[5] / s2
    a1 = fx - c3 * y0 - 2 * c4 * x0
    a2 = fy - c3 * x0 - 2 * c5 * y0
    a0 = b[0] - fx * x0 - fy * y0 + c3 * x0 * y0 + c4 * x0 * x0 + c5 * y0 * y0
    coeffs = tuple(float(c) for c in (a0, a1, a2, c3, c4, c5))
    partials = tuple(float(c) for c in (fx, fy, 2 * c4, c3, 2 * c5))
    return QuadraticPatch(coeffs, (x0, y0), resid, partials)


def nearest_neighbors(points, query, count: int) -> np.ndarray:
    """Ids of the ``count`` points closest to ``query``; ties go to lower ids."""
    pts = np.asarray(points, dtype=float)
    if count > len(pts):
        raise InsufficientNeighborsError(f"asked for {count} neighbors among {len(pts)} points")
    q = np.asarray(query, dtype=float)
    d2 = np.sum((pts[:, :len(q)] - q) ** 2, axis=1)
    return np.argsort(d2, kind="stable")[:count]


def fit_patch_adaptive(points, center_index: int, start: int = 6) -> QuadraticPatch:
    """Fit around ``points[center_index]`` with its ``start`` nearest points,
    widening the neighborhood while the patch is ill-conditioned."""
    pts = np.asarray(points, dtype=float)
    count = start
    while True:
        ids = nearest_neighbors(pts[:, :2], pts[center_index, :2], count)
        try:
            return quadratic_fit(pts[center_index, :2], pts[ids])
        except IllConditionedPatchError:
            if count >= len(pts):
                raise
            count = min(len(pts), count + 1)


def quadratic_partials(points, start: int = 6) -> dict:
    """Per-point partials from adaptive quadratic patches of ``(x, y, value)`` rows."""
    pts = np.asarray(points, dtype=float)
    rows = [fit_patch_adaptive(pts, i, start).partials for i in range(len(pts))]
    arr = np.array(rows).reshape(-1, 5)
    return {k: arr[:, j] for j, k in enumerate(("fx", "fy", "fxx", "fxy", "fyy"))}


def barycentric(p, a, b, c):
    """Barycentric weights of ``p`` w.r.t. triangle ``abc`` (2-D or 3-D) and
    the distance from ``p`` to the triangle's plane."""
    p, a, b, c = (np.asarray(t, dtype=float) for t in (p, a, b, c))
    v0, v1, v2 = b - a, c - a, p - a
    d00, d01, d11 = v0 @ v0, v0 @ v1, v1 @ v1
    d20, d21 = v2 @ v0, v2 @ v1
    den = d00 * d11 - d01 * d01
    wb = (d11 * d20 - d01 * d21) / den
    wc = (d00 * d21 - d01 * d20) / den
    w = np.array([1.0 - wb - wc, wb, wc])
    off = float(np.linalg.norm(p - (w[0] * a + w[1] * b + w[2] * c)))
    return w, off


def pl_interpolate_derivatives(mesh: TriMesh, values, point, tol: float = 1e-9):
    """Piecewise-linear value of per-vertex tuples at a point on the mesh.

    A 2-D ``point`` is located in the xy projection (heightfield meshes); a
    3-D point must lie on a triangle within ``tol`` of mesh scale.
    """
    vals = np.asarray(values, dtype=float)
    p = np.asarray(point, dtype=float)
    dim = len(p)
    if dim not in (2, 3):
        raise InvalidArgumentError("query point must have 2 or 3 coordinates")
    pos = mesh.positions[:, :dim]
    scale = float(np.ptp(mesh.positions, axis=0).max()) or 1.0
    for tri in mesh.triangles:
        a, b, c = pos[tri]
        with np.errstate(divide="ignore", invalid="ignore"):
            w, off = barycentric(p, a, b, c)
        if not np.all(np.isfinite(w)):
            continue
        if off <= tol * scale and np.all(w >= -tol) and np.all(w <= 1 + tol):
            w = np.clip(w, 0.0, 1.0)
            w /= w.sum()
            return w @ vals[tri]
    raise OutOfDomainError(f"point {tuple(p)} is not on any triangle")


def force_gvd_on_mesh(mesh: TriMesh, component, chain: LevelChain = None,
                      levels: int = 64, graph: DomainGraph = None) -> ScalarField:
    """Gradually varied approximation of a per-vertex component on the skeleton."""
    graph = graph or skeleton_of(mesh)
    vals = np.asarray(component, dtype=float)
    if chain is None:
        chain = LevelChain.spanning(float(vals.min()), float(vals.max()), levels)
    return gvf_approximate(ScalarField(graph, vals), graph, chain)


def lattice_mesh(xs, ys, heights=None) -> TriMesh:
    """Heightfield triangulation of a rectilinear lattice, two triangles per cell.

    ``heights`` is a callable ``f(x, y)`` or an array shaped ``(len(ys), len(xs))``;
    vertex ids are row-major like grid domains.
    """
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    gx, gy = np.meshgrid(xs, ys)
    if heights is None:
        gz = np.zeros_like(gx)
    elif callable(heights):
        gz = heights(gx, gy)
    else:
        gz = np.asarray(heights, dtype=float).reshape(gx.shape)
    pos = np.column_stack([gx.ravel(), gy.ravel(), np.broadcast_to(gz, gx.shape).ravel()])
    w = len(xs)
    tris = []
    for j in range(len(ys) - 1):
        for i in range(w - 1):
            v00, v10 = j * w + i, j * w + i + 1
            v01, v11 = v00 + w, v10 + w
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return TriMesh(pos, np.array(tris, dtype=np.int64).reshape(-1, 3))


def icosphere(level: int = 0) -> TriMesh:
    """Unit icosahedron refined by ``level`` rounds of 4-to-1 midpoint splits."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    pos = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = pos[a] + pos[b]
                pos.append(m / np.linalg.norm(m))
                cache[key] = len(pos) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return TriMesh(np.array(pos), np.array(faces, dtype=np.int64))


def heightfield_derivatives(mesh: TriMesh, heights, order: int = 1, levels: int = 64,
                            graph: DomainGraph = None) -> dict:
    """Gradually varied partials of ``z = heights`` over the mesh's xy layout.

    First order comes from vertex normals of the lifted surface; second
    order from adaptive quadratic patches. Every component is forced onto
    its own ``levels``-level chain.
    """
    graph = graph or skeleton_of(mesh)
    heights = np.asarray(heights, dtype=float)
    lifted = mesh.lifted(heights)
    comps = {}
    fxy = partials_from_normals(vertex_normals(lifted))
    raw = {"fx": fxy[:, 0], "fy": fxy[:, 1]}
    if order >= 2:
        quad = quadratic_partials(lifted.positions)
        raw.update({k: quad[k] for k in ("fxx", "fxy", "fyy")})
    for name, vals in raw.items():
        comps[name] = force_gvd_on_mesh(mesh, vals, levels=levels, graph=graph)
    return comps


def method_b(mesh: TriMesh, samples: SampleSet, order: int = 1, blend: str = "nearest",
             chain: LevelChain = None, derivative_levels: int = 64):
    """Gradually varied extension on the skeleton, normal-based derivatives,
    Taylor blend around the samples."""
    from .taylor import DerivativeField, Reconstruction, ReconstructionConfig, taylor_blend

    ReconstructionConfig(order=order, blend=blend)
    graph = samples.graph
    if graph.vertex_count != mesh.vertex_count:
        raise InvalidArgumentError("samples are not on this mesh's skeleton")
    chain = chain or feasible_chain(samples, graph)
    base = gvf_extend(samples, graph, chain)
    comps = {"f": base}
    comps.update(heightfield_derivatives(mesh, base.values, order, derivative_levels, graph))
    arrays = {k: v.values for k, v in comps.items()}
    centers = samples.vertices
    out = taylor_blend(graph, centers, arrays, order, blend, coords=mesh.positions[:, :2])
    out[centers] = base.values[centers]
    return Reconstruction(ScalarField(graph, out), DerivativeField(order, comps), chain)
