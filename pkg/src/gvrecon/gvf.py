"""Level chains and gradually varied extension / approximation.

A field is gradually varied when the level indices at the two ends of
every edge differ by at most one. Extension and approximation are both
computed from the pair of cone envelopes

    U(x) = min_p (idx(p) + d(x, p)),    L(x) = max_p (idx(p) - d(x, p)),

whose rounded-down midpoint is gradually varied whenever ``L <= U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import FeasibilityError, InvalidArgumentError, RangeError
from .graph import DomainGraph


@dataclass(frozen=True)
class LevelChain:
    """Uniform chain ``min_value + i * spacing`` for ``0 <= i < level_count``."""

    min_value: float
    spacing: float
    level_count: int

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise InvalidArgumentError(f"chain spacing must be positive, got {self.spacing}")
        if self.level_count < 2:
            raise InvalidArgumentError(f"chain needs at least 2 levels, got {self.level_count}")
        if not math.isfinite(self.min_value):
            raise InvalidArgumentError("chain minimum must be finite")

    @property
    def max_value(self) -> float:
        return self.min_value + (self.level_count - 1) * self.spacing

    def level(self, i):
        return self.min_value + np.asarray(i) * self.spacing

    @classmethod
    def spanning(cls, lo: float, hi: float, levels: int = 64, fallback_spacing: float = 1.0):
        """Chain of ``levels`` levels from ``lo`` to ``hi`` inclusive.

        A zero-width range gets a two-level chain starting at ``lo``.
        """
        if hi > lo:
            return cls(float(lo), (hi - lo) / (levels - 1), int(levels))
        return cls(float(lo), float(fallback_spacing), 2)


def quantize(chain: LevelChain, value):
    """Nearest level index, clamped; exact midpoints go to the lower index."""
    v = np.asarray(value, dtype=float)
    idx = np.ceil((v - chain.min_value) / chain.spacing - 0.5)
    idx = np.clip(idx, 0, chain.level_count - 1).astype(np.int64)
    return int(idx) if idx.ndim == 0 else idx


def dequantize(chain: LevelChain, index):
    idx = np.asarray(index)
    if np.any(idx < 0) or np.any(idx >= chain.level_count):
        raise RangeError(f"level index outside [0, {chain.level_count})")
    out = chain.min_value + idx * chain.spacing
    return float(out) if out.ndim == 0 else out


class SampleSet:
    """Values on a subset ``J`` of a domain's vertices."""

    def __init__(self, graph: DomainGraph, entries: Mapping[int, float]):
        if not entries:
            raise InvalidArgumentError("a sample set needs at least one entry")
        clean = {}
        for k, val in entries.items():
            k = graph.check_vertex(k)
            val = float(val)
            if not math.isfinite(val):
                raise InvalidArgumentError(f"sample at vertex {k} is not finite")
            clean[k] = val
        self.graph = graph
        self.entries = dict(sorted(clean.items()))

    def __len__(self):
        return len(self.entries)

    @property
    def vertices(self) -> np.ndarray:
        return np.fromiter(self.entries, dtype=np.int64, count=len(self.entries))

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def __repr__(self):
        return f"SampleSet({len(self)} samples on {self.graph.vertex_count} vertices)"


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Total map from vertices to reals, optionally tagged with its chain."""

    graph: DomainGraph
    values: np.ndarray
    chain: Optional[LevelChain] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.graph.vertex_count,):
            raise InvalidArgumentError(
                f"field has shape {vals.shape}, domain has {self.graph.vertex_count} vertices")
        object.__setattr__(self, "values", vals)

    def indices(self, chain: Optional[LevelChain] = None) -> np.ndarray:
        chain = chain or self.chain
        if chain is None:
            raise InvalidArgumentError("no level chain to index the field against")
        return quantize(chain, self.values)


def max_edge_step(graph: DomainGraph, idx) -> int:
    """Largest index jump across any edge (0 for edgeless domains)."""
    e = graph.edge_array
    if len(e) == 0:
        return 0
    idx = np.asarray(idx)
    return int(np.max(np.abs(idx[e[:, 0]] - idx[e[:, 1]])))


def is_gradually_varied(graph: DomainGraph, idx) -> bool:
    return max_edge_step(graph, idx) <= 1


def gvf_feasible(samples: SampleSet, graph: DomainGraph, chain: LevelChain):
    """Check ``|idx(x) - idx(y)| <= d(x, y)`` over all sample pairs.

    Returns
    -------
    feasible : bool
    witness : tuple of int or None
        The first violating pair (lowest ids first) when infeasible.
    """
    verts = samples.vertices
    idx = quantize(chain, samples.values)
    for a in range(len(verts) - 1):
        dist = graph.bfs(int(verts[a]))[verts[a + 1:]]
        gap = np.abs(idx[a + 1:] - idx[a])
        bad = np.nonzero(gap > dist)[0]
        if len(bad):
            return False, (int(verts[a]), int(verts[a + 1 + bad[0]]))
    return True, None


def _envelopes(graph: DomainGraph, upper_offsets, lower_offsets):
    upper = graph.cone_envelope(upper_offsets)
    lower = -graph.cone_envelope({k: -v for k, v in lower_offsets.items()})
    return upper, lower


def gvf_extend_indices(graph: DomainGraph, sample_idx: Mapping[int, int]) -> np.ndarray:
    """Midpoint gradually varied extension of integer index samples."""
    upper, lower = _envelopes(graph, sample_idx, sample_idx)
    if np.any(lower > upper):
        # Envelope crossing means some pair violates the distance bound.
        x = int(np.nonzero(lower > upper)[0][0])
        raise FeasibilityError(f"samples cannot be gradually varied around vertex {x}",
                               pair=_violating_pair(graph, sample_idx))
    return (upper + lower) // 2


def _violating_pair(graph, sample_idx):
    keys = sorted(sample_idx)
    for a, p in enumerate(keys):
        dist = graph.bfs(p)
        for q in keys[a + 1:]:
            if abs(sample_idx[p] - sample_idx[q]) > dist[q]:
                return (p, q)
    return None


def gvf_extend(samples: SampleSet, graph: DomainGraph, chain: LevelChain) -> ScalarField:
    """Gradually varied interpolation of ``samples`` over the whole domain.

    Raises
    ------
    FeasibilityError
        If some pair of quantized samples is further apart in levels than
        in graph distance; ``err.pair`` names that pair.
    """
    if samples.graph is not graph:
        graph.check_vertex(int(samples.vertices.max()))
    ok, pair = gvf_feasible(samples, graph, chain)
    if not ok:
        raise FeasibilityError(
            f"samples at vertices {pair} differ by more levels than their graph distance",
            pair=pair)
    idx = quantize(chain, samples.values)
    out = gvf_extend_indices(graph, dict(zip(samples.vertices.tolist(), idx.tolist())))
    return ScalarField(graph, dequantize(chain, out), chain)


def _approx_for_budget(graph, idx, t):
    offsets_hi = {v: int(i) + t for v, i in enumerate(idx)}
    offsets_lo = {v: int(i) - t for v, i in enumerate(idx)}
    upper, lower = _envelopes(graph, offsets_hi, offsets_lo)
    if np.any(lower > upper):
        return None
    return (upper + lower) // 2


def gvf_approximate_indices(graph: DomainGraph, idx, level_count: int):
    """Gradually varied index field closest to ``idx`` in sup norm.

    Returns
    -------
    out : ndarray of int
    deviation : int
        ``max |out - idx|``, the smallest achievable.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if is_gradually_varied(graph, idx):
        return idx.copy(), 0
    lo, hi = 1, max(1, int(idx.max() - idx.min()))
    best = _approx_for_budget(graph, idx, hi)
    while lo < hi:
        mid = (lo + hi) // 2
        cand = _approx_for_budget(graph, idx, mid)
        if cand is None:
            lo = mid + 1
        else:
            hi, best = mid, cand
    # Clamping a 1-Lipschitz field into the level range keeps it gradually
    # varied and cannot move it further from an in-range target.
    out = np.clip(best, 0, level_count - 1)
    return out, int(np.max(np.abs(out - idx)))


def gvf_approximate(field: ScalarField, graph: DomainGraph, chain: LevelChain) -> ScalarField:
    """Gradually varied uniform approximation of a total field."""
    if field.graph is not graph and field.graph.vertex_count != graph.vertex_count:
        raise InvalidArgumentError("field and graph have different vertex counts")
    idx = quantize(chain, field.values)
    out, _ = gvf_approximate_indices(graph, idx, chain.level_count)
    return ScalarField(graph, dequantize(chain, out), chain)


def feasible_chain(samples: SampleSet, graph: DomainGraph, levels: int = 64,
                   max_tries: int = 2000) -> LevelChain:
    """Finest chain, no finer than ``range / levels``, on which ``samples`` are feasible.

    The spacing starts at ``max(range / levels, Lmin)`` where ``Lmin`` is the
    graph-metric Lipschitz constant of the samples, then grows by 1% until
    the quantized samples pass :func:`gvf_feasible`.
    """
    vals = samples.values
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        return LevelChain(lo, 1.0, 2)
    verts = samples.vertices
    lip = 0.0
    for a in range(len(verts) - 1):
        dist = graph.bfs(int(verts[a]))[verts[a + 1:]]
        lip = max(lip, float(np.max(np.abs(vals[a + 1:] - vals[a]) / dist)))
    spacing = max((hi - lo) / levels, lip)
    for _ in range(max_tries):
        count = int(math.floor((hi - lo) / spacing + 1e-9)) + 2
        chain = LevelChain(lo, spacing, count)
        if gvf_feasible(samples, graph, chain)[0]:
            return chain
        spacing *= 1.01
    raise FeasibilityError("no feasible chain found", pair=gvf_feasible(samples, graph, chain)[1])
