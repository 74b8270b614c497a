"""Lipschitz extension of scattered samples and the halving derivative chain.

The extension used throughout is the midpoint of the two extremal
L-Lipschitz extensions::

    upper(x) = min_p (v_p + L d(x, p))      (McShane)
    lower(x) = max_p (v_p - L d(x, p))      (Whitney)

over a graph metric (hop counts) or Euclidean point sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleBudgetError, InvalidArgumentError, UnsupportedOrderError
from .graph import GRID, DomainGraph
from .gvf import SampleSet, ScalarField
from .mesh import fit_patch_adaptive
from .taylor import (FIRST_ORDER, NEAREST, SECOND_ORDER, DerivativeField, Reconstruction,
                     ReconstructionConfig, grid_difference, taylor_blend)

DIFFERENCE_ROUTE = "difference"
QUADRATIC_ROUTE = "quadratic"


class MetricSamples:
    """Values at distinct locations: vertex ids of ``graph``, or coordinate rows."""

    def __init__(self, locations, values, graph: Optional[DomainGraph] = None):
        vals = np.asarray(values, dtype=float).ravel()
        if len(vals) == 0:
            raise InvalidArgumentError("need at least one sample")
        if graph is not None:
            locs = np.array([graph.check_vertex(int(v)) for v in np.ravel(locations)],
                            dtype=np.int64)
            distinct = len(set(locs.tolist())) == len(locs)
        else:
            locs = np.asarray(locations, dtype=float)
            if locs.ndim == 1:
                locs = locs[:, None]
            distinct = len(np.unique(locs, axis=0)) == len(locs)
        if len(locs) != len(vals):
            raise InvalidArgumentError("locations and values differ in length")
        if not distinct:
            raise InvalidArgumentError("sample locations must be distinct")
        self.locations = locs
        self.values = vals
        self.graph = graph

    @classmethod
    def from_samples(cls, samples: SampleSet) -> "MetricSamples":
        return cls(samples.vertices, samples.values, samples.graph)

    def __len__(self):
        return len(self.values)

    @property
    def metric(self) -> str:
        return "graph" if self.graph is not None else "euclidean"

    def distances_to(self, domain) -> np.ndarray:
        """``(m, N)`` distances from each sample to every domain point."""
        if isinstance(domain, DomainGraph):
            if self.graph is None:
                if domain.coords is None:
                    raise InvalidArgumentError("domain has no coordinates for a Euclidean metric")
                return self.distances_to(domain.coords)
            if domain.vertex_count != self.graph.vertex_count:
                raise InvalidArgumentError("samples live on a different graph")
            return np.stack([domain.bfs(int(v)) for v in self.locations]).astype(float)
        if self.graph is not None:
            raise InvalidArgumentError("graph-metric samples need a graph domain")
        pts = np.asarray(domain, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = self.locations[:, None, :] - pts[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=2))

    def pairwise(self) -> np.ndarray:
        if self.graph is not None:
            return np.stack([self.graph.bfs(int(v))[self.locations] for v in self.locations]
                            ).astype(float)
        return self.distances_to(self.locations)

    def sample_positions(self, domain):
        """Indices of domain points that coincide with sample locations."""
        if isinstance(domain, DomainGraph) and self.graph is not None:
            return self.locations, np.arange(len(self))
        pts = domain.coords if isinstance(domain, DomainGraph) else np.asarray(domain, float)
        if pts.ndim == 1:
            pts = pts[:, None]
        dom_ix, samp_ix = [], []
        for a, loc in enumerate(self.locations):
            hit = np.nonzero(np.all(pts == loc, axis=1))[0]
            dom_ix.extend(hit.tolist())
            samp_ix.extend([a] * len(hit))
        return np.array(dom_ix, dtype=np.int64), np.array(samp_ix, dtype=np.int64)


def lipschitz_witness(s: MetricSamples):
    """Smallest admissible constant and the pair attaining it (``None`` for one sample)."""
    if len(s) < 2:
        return 0.0, None
    d = s.pairwise()
    gap = np.abs(s.values[:, None] - s.values[None, :])
    iu = np.triu_indices(len(s), 1)
    ratio = gap[iu] / d[iu]
    k = int(np.argmax(ratio))
    pair = (s.locations[iu[0][k]].tolist(), s.locations[iu[1][k]].tolist())
    return float(ratio[k]), pair


def min_lipschitz_constant(s: MetricSamples) -> float:
    return lipschitz_witness(s)[0]


def lipschitz_envelopes(s: MetricSamples, L: float, domain):
    """Whitney (lower) and McShane (upper) envelopes over ``domain``."""
    d = s.distances_to(domain)
    cones = L * d
    upper = np.min(s.values[:, None] + cones, axis=0)
    lower = np.max(s.values[:, None] - cones, axis=0)
    return lower, upper


def _check_budget(s, L, order=None, component=None):
    need, pair = lipschitz_witness(s)
    if L < need:
        where = "" if order is None else f" at order {order}"
        if component:
            where += f" ({component})"
        raise InfeasibleBudgetError(
            f"samples{where} need Lipschitz constant {need:.6g} > budget {L:.6g}",
            pair=pair, required=need, budget=L, order=order, component=component)


def mcshane_extend(s: MetricSamples, L: float, domain, order=None, component=None):
    """Midpoint Lipschitz extension; exact on the samples.

    Returns a :class:`ScalarField` on graph domains, an array on point sets.

    Raises
    ------
    InfeasibleBudgetError
        ``L`` is below the samples' minimal Lipschitz constant.
    """
    if not L >= 0:
        raise InvalidArgumentError(f"Lipschitz constant must be nonnegative, got {L}")
    _check_budget(s, L, order, component)
    lower, upper = lipschitz_envelopes(s, L, domain)
    out = 0.5 * (lower + upper)
    dom_ix, samp_ix = s.sample_positions(domain)
    out[dom_ix] = s.values[samp_ix]
    if isinstance(domain, DomainGraph):
        return ScalarField(domain, out)
    return out


@dataclass(frozen=True)
class Certificate:
    constant: float
    passed: bool
    max_ratio: float
    pair: Optional[tuple]
    order: Optional[int] = None
    component: Optional[str] = None

    def as_dict(self) -> dict:
        return {"order": self.order, "component": self.component, "constant": self.constant,
                "passed": self.passed, "max_ratio": self.max_ratio,
                "pair": None if self.pair is None else list(self.pair)}


def lipschitz_certificate(values, L: float, graph: DomainGraph, order=None,
                          component=None, rtol: float = 1e-12) -> Certificate:
    """Exhaustive pairwise check ``|F(x) - F(y)| <= L d(x, y)``.

    Slack of ``rtol`` times the largest magnitude involved absorbs
    floating-point rounding in the envelope arithmetic.
    """
    vals = np.asarray(values, dtype=float)
    d = graph.distance_matrix.astype(float)
    gap = np.abs(vals[:, None] - vals[None, :])
    slack = rtol * (float(np.max(np.abs(vals))) + L * float(d.max()) + 1.0)
    ok = bool(np.all(gap <= L * d + slack))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0, gap / np.where(d > 0, d, 1.0), 0.0)
    k = int(np.argmax(ratio))
    u, v = divmod(k, len(vals))
    worst = float(ratio[u, v])
    return Certificate(float(L), ok, worst, (u, v) if worst > 0 else None, order, component)


@dataclass(frozen=True)
class LipschitzBudget:
    """Per-order constants with ``L_i <= factor * L_{i-1}``."""

    constants: tuple
    factor: float = 0.5

    def __post_init__(self):
        if not self.constants:
            raise InvalidArgumentError("budget needs at least the order-0 constant")
        if not 0 < self.factor <= 1:
            raise InvalidArgumentError(f"budget factor must be in (0, 1], got {self.factor}")
        c = [float(x) for x in self.constants]
        if any(x < 0 for x in c):
            raise InvalidArgumentError("Lipschitz constants must be nonnegative")
        for i in range(1, len(c)):
            if c[i] > self.factor * c[i - 1] * (1 + 1e-12):
                raise InvalidArgumentError(
                    f"L_{i} = {c[i]} exceeds {self.factor} * L_{i - 1} = {self.factor * c[i - 1]}")
        object.__setattr__(self, "constants", tuple(c))

    @classmethod
    def geometric(cls, l0: float, order: int, factor: float = 0.5) -> "LipschitzBudget":
        return cls(tuple(l0 * factor ** i for i in range(order + 1)), factor)

    def __getitem__(self, i):
        return self.constants[i]

    def __len__(self):
        return len(self.constants)


@dataclass(frozen=True, eq=False)
class LipschitzChain:
    fields: list
    certificates: list


def _as_components(entry):
    if isinstance(entry, MetricSamples):
        return {"f": entry}
    return dict(entry)


def lipschitz_derivative_chain(samples_by_order: Sequence, budget: LipschitzBudget,
                               domain: DomainGraph, certify_limit: int = 400) -> LipschitzChain:
    """Extend every order's samples under its budgeted constant.

    ``samples_by_order[i]`` is a :class:`MetricSamples` or a mapping of
    component name to samples. Graph domains up to ``certify_limit``
    vertices get an exhaustive Lipschitz certificate per field.
    """
    if len(samples_by_order) > len(budget):
        raise InvalidArgumentError(
            f"budget covers {len(budget)} orders, samples given for {len(samples_by_order)}")
    fields, certs = [], []
    for i, entry in enumerate(samples_by_order):
        out = {}
        for name, s in _as_components(entry).items():
            fld = mcshane_extend(s, budget[i], domain, order=i, component=name)
            out[name] = fld
            if isinstance(domain, DomainGraph) and domain.vertex_count <= certify_limit:
                cert = lipschitz_certificate(fld.values, budget[i], domain, i, name)
                if not cert.passed:
                    raise InfeasibleBudgetError(
                        f"extension at order {i} ({name}) failed its Lipschitz certificate",
                        pair=cert.pair, required=cert.max_ratio, budget=budget[i],
                        order=i, component=name)
                certs.append(cert)
        fields.append(out)
    return LipschitzChain(fields, certs)


def _derivative_samples_quadratic(samples: SampleSet, graph: DomainGraph, order: int):
    pts = np.column_stack([graph.coords[samples.vertices], samples.values])
    rows = np.array([fit_patch_adaptive(pts, i).partials for i in range(len(pts))])
    names = FIRST_ORDER + SECOND_ORDER
    comps = {k: rows[:, j] for j, k in enumerate(names)}
    verts = samples.vertices
    by_order = [{k: MetricSamples(verts, comps[k], graph) for k in FIRST_ORDER}]
    if order >= 2:
        by_order.append({k: MetricSamples(verts, comps[k], graph) for k in SECOND_ORDER})
    return by_order


def method_c(samples: SampleSet, graph: DomainGraph, order: int = 1,
             budget: Optional[LipschitzBudget] = None, factor: float = 0.5,
             route: str = QUADRATIC_ROUTE,
             config: Optional[ReconstructionConfig] = None) -> Reconstruction:
    """Lipschitz extension of order 0, derivative samples, halving-budget
    extension of the derivatives, Taylor blend.

    The quadratic route needs at least 6 samples; with fewer it falls back
    to differences of the order-0 extension.
    """
    if order not in (1, 2):
        raise UnsupportedOrderError(f"order must be 1 or 2, got {order}")
    if graph.kind != GRID or graph.coords is None:
        raise InvalidArgumentError("Lipschitz reconstruction runs on grid domains")
    if route not in (QUADRATIC_ROUTE, DIFFERENCE_ROUTE):
        raise InvalidArgumentError(f"unknown derivative route {route!r}")
    config = config or ReconstructionConfig(order=order, blend=NEAREST)
    base_samples = MetricSamples.from_samples(samples)
    if budget is None:
        budget = LipschitzBudget.geometric(min_lipschitz_constant(base_samples), order, factor)
    if len(budget) < order + 1:
        raise InvalidArgumentError(f"budget has {len(budget)} orders, need {order + 1}")
    base = mcshane_extend(base_samples, budget[0], graph, order=0, component="f")
    verts = samples.vertices
    used_route = route if (route == DIFFERENCE_ROUTE or len(samples) >= 6) else DIFFERENCE_ROUTE

    if used_route == QUADRATIC_ROUTE:
        chain = lipschitz_derivative_chain(
            [base_samples] + _derivative_samples_quadratic(samples, graph, order), budget, graph)
    else:
        first = {"fx": grid_difference(graph, base.values, "x"),
                 "fy": grid_difference(graph, base.values, "y")}
        by_order = [base_samples, {k: MetricSamples(verts, v[verts], graph)
                                   for k, v in first.items()}]
        chain = lipschitz_derivative_chain(by_order, budget, graph)
        if order >= 2:
            fx, fy = chain.fields[1]["fx"].values, chain.fields[1]["fy"].values
            second = {"fxx": grid_difference(graph, fx, "x"),
                      "fxy": grid_difference(graph, fy, "x"),
                      "fyy": grid_difference(graph, fy, "y")}
            by_order.append({k: MetricSamples(verts, v[verts], graph) for k, v in second.items()})
            chain = lipschitz_derivative_chain(by_order, budget, graph)

    comps = {"f": chain.fields[0]["f"]}
    for level in chain.fields[1:]:
        comps.update(level)
    arrays = {k: v.values for k, v in comps.items()}
    out = taylor_blend(graph, verts, arrays, order, config.blend)
    out[verts] = samples.values
    return Reconstruction(ScalarField(graph, out), DerivativeField(order, comps), None,
                          extras={"budget": budget, "certificates": chain.certificates,
                                  "route": used_route})


def reconstruct_via_lipschitz(samples: SampleSet, graph: DomainGraph, order: int = 1,
                              budget: Optional[LipschitzBudget] = None, **kwargs) -> ScalarField:
    return method_c(samples, graph, order, budget, **kwargs).field
