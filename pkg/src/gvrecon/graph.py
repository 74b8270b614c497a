"""Finite discrete domains: grid lattices and triangle-mesh 1-skeletons.

Grid vertices are numbered row-major, ``id = y * width + x``, and use
4-adjacency. All distances are unweighted shortest-path lengths.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import DisconnectedDomainError, InvalidArgumentError

GRID = "grid"
MESH_SKELETON = "mesh"


@dataclass(frozen=True, eq=False)
class DomainGraph:
    """Connected, undirected, unweighted graph over vertices ``0..n-1``.

    Parameters
    ----------
    adjacency : tuple of tuple of int
        Sorted neighbor ids for every vertex.
    kind : str
        ``"grid"`` or ``"mesh"``.
    width, height : int, optional
        Lattice dimensions for grid domains.
    coords : ndarray, optional
        ``(n, 2)`` planar coordinates used for Taylor offsets. Grids use
        integer lattice positions, skeletons the mesh ``(x, y)``.
    """

    adjacency: tuple
    kind: str = MESH_SKELETON
    width: Optional[int] = None
    height: Optional[int] = None
    coords: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.adjacency)
        if n == 0:
            raise InvalidArgumentError("a domain needs at least one vertex")
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if not 0 <= v < n:
                    raise InvalidArgumentError(f"vertex {u} lists unknown neighbor {v}")
                if v == u:
                    raise InvalidArgumentError(f"self loop at vertex {u}")
                if u not in self.adjacency[v]:
                    raise InvalidArgumentError(f"adjacency not symmetric for edge ({u}, {v})")
        sizes = _component_sizes(self.adjacency)
        if len(sizes) > 1:
            raise DisconnectedDomainError(
                f"domain has {len(sizes)} components of sizes {sizes}",
                component_sizes=sizes)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def neighbors(self, u: int) -> tuple:
        return self.adjacency[self.check_vertex(u)]

    def check_vertex(self, u) -> int:
        if isinstance(u, (bool, np.bool_)) or not isinstance(u, (int, np.integer)):
            raise InvalidArgumentError(f"vertex id must be an integer, got {u!r}")
        if not 0 <= u < self.vertex_count:
            raise InvalidArgumentError(
                f"vertex id {u} out of range for {self.vertex_count} vertices")
        return int(u)

    def edges(self):
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    @cached_property
    def edge_array(self) -> np.ndarray:
        e = list(self.edges())
        return np.array(e, dtype=np.int64).reshape(-1, 2)

    @property
    def edge_count(self) -> int:
        return len(self.edge_array)

    def vertex_of(self, x: int, y: int) -> int:
        if self.kind != GRID:
            raise InvalidArgumentError("lattice coordinates only exist on grid domains")
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise InvalidArgumentError(f"cell ({x}, {y}) outside {self.width}x{self.height} grid")
        return y * self.width + x

    def bfs(self, source: int) -> np.ndarray:
        """Hop distances from ``source`` to every vertex."""
        return self.distance_field([source])

    def distance_field(self, sources: Iterable[int]) -> np.ndarray:
        """Distance from every vertex to the nearest of ``sources``."""
        srcs = sorted({self.check_vertex(s) for s in sources})
        if not srcs:
            raise InvalidArgumentError("distance_field needs at least one source")
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        queue = deque(srcs)
        dist[srcs] = 0
        adj = self.adjacency
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for v in adj[u]:
                if dist[v] < 0:
                    dist[v] = du
                    queue.append(v)
        return dist

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs hop distances; quadratic memory, meant for small domains."""
        return np.stack([self.bfs(u) for u in range(self.vertex_count)])

    def cone_envelope(self, offsets: Mapping[int, int]) -> np.ndarray:
        """Return ``min_p(offsets[p] + d(x, p))`` for every vertex ``x``.

        Multi-source Dijkstra with unit edge weights; exact for integer
        offsets.
        """
        if not offsets:
            raise InvalidArgumentError("cone_envelope needs at least one source")
        best = np.full(self.vertex_count, np.iinfo(np.int64).max, dtype=np.int64)
        heap = []
        for p, off in offsets.items():
            p = self.check_vertex(p)
            if off < best[p]:
                best[p] = off
                heap.append((int(off), p))
        heapq.heapify(heap)
        adj = self.adjacency
        while heap:
            d, u = heapq.heappop(heap)
            if d > best[u]:
                continue
            for v in adj[u]:
                if d + 1 < best[v]:
                    best[v] = d + 1
                    heapq.heappush(heap, (d + 1, v))
        return best


def _component_sizes(adjacency) -> list:
    n = len(adjacency)
    seen = np.zeros(n, dtype=bool)
    sizes = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        sizes.append(size)
    return sorted(sizes, reverse=True)


def build_grid(width: int, height: int) -> DomainGraph:
    """4-adjacent ``width x height`` lattice with row-major ids."""
    for name, val in (("width", width), ("height", height)):
        if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
            raise InvalidArgumentError(f"grid {name} must be a positive integer, got {val!r}")
    width, height = int(width), int(height)
    adj = []
    for y in range(height):
        for x in range(width):
            nbrs = []
            if y > 0:
                nbrs.append((y - 1) * width + x)
            if x > 0:
                nbrs.append(y * width + x - 1)
            if x < width - 1:
                nbrs.append(y * width + x + 1)
            if y < height - 1:
                nbrs.append((y + 1) * width + x)
            adj.append(tuple(nbrs))
    ys, xs = np.divmod(np.arange(width * height), width)
    coords = np.column_stack([xs, ys]).astype(float)
    return DomainGraph(tuple(adj), kind=GRID, width=width, height=height, coords=coords)


def from_edges(n: int, edges: Iterable[tuple], coords=None) -> DomainGraph:
    """Build a skeleton-kind graph from an undirected edge list (deduplicated)."""
    nbrs = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            continue
        nbrs[u].add(v)
        nbrs[v].add(u)
    return DomainGraph(tuple(tuple(sorted(s)) for s in nbrs), kind=MESH_SKELETON,
                       coords=None if coords is None else np.asarray(coords, dtype=float))


def skeleton_of(mesh) -> DomainGraph:
    """1-skeleton of a triangle mesh: one vertex per mesh vertex, one edge per
    distinct triangle side."""
    edges = set()
    for a, b, c in np.asarray(mesh.triangles, dtype=np.int64).tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(u, v), max(u, v)))
    positions = np.asarray(mesh.positions, dtype=float)
    return from_edges(len(positions), sorted(edges), coords=positions[:, :2])


def graph_distance(g: DomainGraph, u: int, v: int) -> int:
    g.check_vertex(v)
    return int(g.bfs(u)[v])


def distance_field(g: DomainGraph, sources) -> np.ndarray:
    return g.distance_field(sources)
