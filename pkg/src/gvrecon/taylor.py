"""Iterated gradually varied derivatives and truncated Taylor reconstruction.

Each derivative order is the unit-step forward difference of the previous
(already fitted) order, re-fitted to be gradually varied on its own chain.
Local second-order Taylor expansions around the sample vertices are then
blended into a full field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, UnsupportedOrderError
from .graph import GRID, DomainGraph
from .gvf import (LevelChain, SampleSet, ScalarField, feasible_chain, gvf_approximate,
                  gvf_extend)

NEAREST = "nearest"
INVERSE_DISTANCE = "idw"
BLENDS = (NEAREST, INVERSE_DISTANCE)

FIRST_ORDER = ("fx", "fy")
SECOND_ORDER = ("fxx", "fxy", "fyy")


@dataclass(frozen=True, eq=False)
class DerivativeField:
    """Components ``f, fx, fy[, fxx, fxy, fyy]`` as fields over one domain."""

    order: int
    components: dict

    def __getitem__(self, name) -> ScalarField:
        return self.components[name]

    def arrays(self) -> dict:
        return {k: v.values for k, v in self.components.items()}


@dataclass(frozen=True)
class ReconstructionConfig:
    """Settings for :func:`reconstruct_smooth`.

    ``chain`` is the value chain; ``None`` picks the finest feasible chain
    no finer than ``range / 64``. Each derivative component is re-fitted on
    its own chain of ``derivative_levels`` levels spanning its raw range.
    """

    order: int = 1
    blend: str = NEAREST
    chain: Optional[LevelChain] = None
    derivative_levels: int = 64

    def __post_init__(self):
        if self.order not in (1, 2):
            raise UnsupportedOrderError(f"order must be 1 or 2, got {self.order}")
        if self.blend not in BLENDS:
            raise InvalidArgumentError(f"blend must be one of {BLENDS}, got {self.blend!r}")
        if self.derivative_levels < 2:
            raise InvalidArgumentError("derivative chains need at least 2 levels")


def grid_difference(graph: DomainGraph, values, axis: str) -> np.ndarray:
    """Unit-step forward difference along ``"x"`` or ``"y"``.

    The last column (row) reuses the backward difference so the result
    stays total; a single-column (row) grid gives zeros.
    """
    if graph.kind != GRID:
        raise InvalidArgumentError("lattice differences need a grid domain")
    grid = np.asarray(values, dtype=float).reshape(graph.height, graph.width)
    ax = 1 if axis == "x" else 0
    if grid.shape[ax] < 2:
        return np.zeros(graph.vertex_count)
    d = np.diff(grid, axis=ax)
    last = d[:, -1:] if ax == 1 else d[-1:, :]
    return np.concatenate([d, last], axis=ax).ravel()


def _refit(graph, raw, levels, fallback_spacing):
    chain = LevelChain.spanning(float(raw.min()), float(raw.max()), levels, fallback_spacing)
    return gvf_approximate(ScalarField(graph, raw), graph, chain)


def gvd_iterate(base: ScalarField, graph: DomainGraph, chain: LevelChain, k: int,
                derivative_levels: int = 64) -> DerivativeField:
    """Gradually varied derivatives of ``base`` up to order ``k`` (at most 2)."""
    if k < 0 or k > 2:
        raise UnsupportedOrderError(f"grid derivatives go up to order 2, got {k}")
    comps = {"f": ScalarField(graph, base.values, chain)}
    if k >= 1:
        for name, axis in (("fx", "x"), ("fy", "y")):
            raw = grid_difference(graph, base.values, axis)
            comps[name] = _refit(graph, raw, derivative_levels, chain.spacing)
    if k >= 2:
        for name, src, axis in (("fxx", "fx", "x"), ("fxy", "fy", "x"), ("fyy", "fy", "y")):
            raw = grid_difference(graph, comps[src].values, axis)
            comps[name] = _refit(graph, raw, derivative_levels, comps[src].chain.spacing)
    return DerivativeField(k, comps)


def taylor_eval_1d(x0: float, derivs, x):
    """Truncated Taylor polynomial ``sum_j f^(j)(x0) (x - x0)^j / j!``."""
    derivs = list(derivs)
    if not derivs:
        raise InvalidArgumentError("need at least the function value")
    h = np.asarray(x, dtype=float) - x0
    total = np.zeros_like(h)
    term = np.ones_like(h)
    for j, dj in enumerate(derivs):
        if j:
            term = term * h / j
        total = total + dj * term
    return float(total) if total.ndim == 0 else total


def taylor_eval_2d(center, derivs, point):
    """Second-order bivariate Taylor expansion.

    ``derivs`` is ``(f, fx, fy, fxx, fxy, fyy)``; ``point`` may be an
    ``(..., 2)`` array.
    """
    f, fx, fy, fxx, fxy, fyy = derivs
    p = np.asarray(point, dtype=float)
    dx = p[..., 0] - center[0]
    dy = p[..., 1] - center[1]
    out = f + dx * fx + dy * fy + 0.5 * (dx * dx * fxx + 2.0 * dx * dy * fxy + dy * dy * fyy)
    return float(out) if np.ndim(out) == 0 else out


def sample_distances(graph: DomainGraph, centers) -> np.ndarray:
    """``(len(centers), n)`` hop distances from each center."""
    return np.stack([graph.bfs(int(c)) for c in centers])


def taylor_blend(graph: DomainGraph, centers, derivs: dict, order: int, blend: str,
                 coords=None, dist=None) -> np.ndarray:
    """Blend Taylor expansions centered at ``centers`` over every vertex.

    ``derivs`` maps component names to per-vertex arrays; components above
    ``order`` are treated as zero. Nearest blending picks the closest
    center in the graph metric, lowest vertex id on ties.
    """
    centers = np.asarray(centers, dtype=np.int64)
    coords = graph.coords if coords is None else np.asarray(coords, dtype=float)
    if dist is None:
        dist = sample_distances(graph, centers)
    zero = np.zeros(graph.vertex_count)
    names = ("f",) + FIRST_ORDER + (SECOND_ORDER if order >= 2 else ())
    full = {k: np.asarray(derivs[k], dtype=float) if k in names else zero
            for k in ("f",) + FIRST_ORDER + SECOND_ORDER}

    def expand(c, target):
        tup = tuple(full[k][c] for k in ("f",) + FIRST_ORDER + SECOND_ORDER)
        return taylor_eval_2d(coords[c], tup, coords[target])

    verts = np.arange(graph.vertex_count)
    if blend == NEAREST:
        order_ix = np.argsort(centers, kind="stable")
        nearest = order_ix[np.argmin(dist[order_ix], axis=0)]
        out = np.empty(graph.vertex_count)
        for a, c in enumerate(centers):
            mask = nearest == a
            if mask.any():
                out[mask] = expand(c, verts[mask])
        return out
    if blend == INVERSE_DISTANCE:
        weights = 1.0 / (1.0 + dist.astype(float)) ** 2
        weights /= weights.sum(axis=0)
        # accumulate offsets from one reference expansion so equal expansions
        # blend to exactly that value
        ref = expand(centers[0], verts)
        acc = np.zeros(graph.vertex_count)
        for a, c in enumerate(centers[1:], start=1):
            acc += weights[a] * (expand(c, verts) - ref)
        return ref + acc
    raise InvalidArgumentError(f"unknown blend {blend!r}")


@dataclass(frozen=True, eq=False)
class Reconstruction:
    field: ScalarField
    derivatives: DerivativeField
    chain: LevelChain
    extras: dict = field(default_factory=dict)


def method_a(samples: SampleSet, graph: DomainGraph,
             config: ReconstructionConfig = ReconstructionConfig()) -> Reconstruction:
    """Gradually varied extension, iterated derivatives, Taylor blend."""
    if samples.graph is not graph and samples.graph.vertex_count != graph.vertex_count:
        raise InvalidArgumentError("samples belong to a different domain")
    chain = config.chain or feasible_chain(samples, graph)
    base = gvf_extend(samples, graph, chain)
    derivs = gvd_iterate(base, graph, chain, config.order, config.derivative_levels)
    centers = samples.vertices
    out = taylor_blend(graph, centers, derivs.arrays(), config.order, config.blend)
    out[centers] = base.values[centers]
    return Reconstruction(ScalarField(graph, out), derivs, chain)


def reconstruct_smooth(samples: SampleSet, graph: DomainGraph,
                       config: ReconstructionConfig = ReconstructionConfig()) -> ScalarField:
    return method_a(samples, graph, config).field

