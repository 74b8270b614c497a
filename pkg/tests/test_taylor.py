import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvrecon.errors import InvalidArgumentError, UnsupportedOrderError
from gvrecon.graph import build_grid
from gvrecon.gvf import LevelChain, SampleSet, ScalarField, is_gradually_varied, quantize
from gvrecon.taylor import (ReconstructionConfig, grid_difference, gvd_iterate, method_a,
                            reconstruct_smooth, taylor_blend, taylor_eval_1d, taylor_eval_2d)

NAMES = ("f", "fx", "fy", "fxx", "fxy", "fyy")


def test_grid_difference_axes():
    g = build_grid(3, 2)
    vals = np.array([0.0, 1.0, 3.0, 10.0, 11.0, 13.0])
    assert grid_difference(g, vals, "x").tolist() == [1, 2, 2, 1, 2, 2]
    assert grid_difference(g, vals, "y").tolist() == [10] * 6
    assert np.all(grid_difference(build_grid(1, 4), np.arange(4.0), "x") == 0)


def test_gvd_constant_base():
    g = build_grid(5, 4)
    chain = LevelChain(0.0, 1.0, 4)
    d = gvd_iterate(ScalarField(g, np.full(20, 2.0)), g, chain, 2)
    for k in NAMES[1:]:
        assert np.all(d[k].values == 0)


def test_gvd_ramp():
    g = build_grid(6, 6)
    chain = LevelChain(0.0, 0.5, 12)
    base = ScalarField(g, chain.level(g.coords[:, 0].astype(int)))
    d = gvd_iterate(base, g, chain, 2)
    assert np.all(d["fx"].values == chain.spacing)
    assert np.all(d["fy"].values == 0)
    for k in ("fxx", "fxy", "fyy"):
        assert np.all(d[k].values == 0)


def test_gvd_checkerboard_components_gradually_varied():
    g = build_grid(6, 6)
    chain = LevelChain(0.0, 1.0, 3)
    parity = (g.coords[:, 0] + g.coords[:, 1]) % 2
    base = ScalarField(g, 2.0 * parity)
    raw = grid_difference(g, base.values, "x")
    assert set(np.abs(raw)) == {2.0}
    d = gvd_iterate(base, g, chain, 2)
    for k in NAMES[1:]:
        comp = d[k]
        assert is_gradually_varied(g, quantize(comp.chain, comp.values))


def test_gvd_order_limit():
    g = build_grid(3, 3)
    with pytest.raises(UnsupportedOrderError):
        gvd_iterate(ScalarField(g, np.zeros(9)), g, LevelChain(0, 1, 2), 3)


def test_taylor_1d_examples():
    assert taylor_eval_1d(0.3, [5.0, 2.0, 7.0], 0.3) == 5.0
    assert taylor_eval_1d(1.0, [1.0, 2.0, 2.0], 2.0) == 4.0
    assert taylor_eval_1d(0.0, [1.0] * 6, 1.0) == pytest.approx(163 / 60, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        taylor_eval_1d(0.0, [], 1.0)


def test_taylor_2d_examples():
    derivs = (1.5, 2.0, -1.0, 0.5, 0.2, 3.0)
    assert taylor_eval_2d((2.0, 3.0), derivs, (2.0, 3.0)) == 1.5
    pts = np.random.default_rng(4).uniform(-5, 5, (20, 2))
    assert np.all(taylor_eval_2d((0.0, 0.0), (4.0, 0, 0, 0, 0, 0), pts) == 4.0)


def quad_and_derivs(c, x0, y0):
    """Analytic derivative tuple of c0 + c1 x + c2 y + c3 xy + c4 x^2 + c5 y^2."""
    c0, c1, c2, c3, c4, c5 = c
    f = c0 + c1 * x0 + c2 * y0 + c3 * x0 * y0 + c4 * x0 ** 2 + c5 * y0 ** 2
    return (f, c1 + c3 * y0 + 2 * c4 * x0, c2 + c3 * x0 + 2 * c5 * y0, 2 * c4, c3, 2 * c5)


def quad_eval(c, x, y):
    return c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x * x + c[5] * y * y


def test_taylor_2d_reproduces_fixed_quadratic():
    c = (3.0, 1.0, 2.0, 1.0, 1.0, 0.0)
    pts = np.random.default_rng(1).uniform(-4, 4, (50, 2))
    for center in [(0.0, 0.0), (1.5, -2.0), (-3.0, 0.7)]:
        got = taylor_eval_2d(center, quad_and_derivs(c, *center), pts)
        assert np.max(np.abs(got - quad_eval(c, pts[:, 0], pts[:, 1]))) <= 1e-12 * 100


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6),
       st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
       st.tuples(st.floats(-5, 5), st.floats(-5, 5)))
def test_taylor_2d_exact_on_quadratics(c, center, point):
    got = taylor_eval_2d(center, quad_and_derivs(c, *center), point)
    want = quad_eval(c, *point)
    scale = sum(abs(x) for x in c) * 100 + 1
    assert abs(got - want) <= 1e-12 * scale


def test_config_validation():
    with pytest.raises(UnsupportedOrderError):
        ReconstructionConfig(order=3)
    with pytest.raises(InvalidArgumentError):
        ReconstructionConfig(blend="spline")


def test_single_sample_constant():
    g = build_grid(5, 5)
    out = reconstruct_smooth(SampleSet(g, {12: 0.75}), g, ReconstructionConfig(order=1))
    assert np.all(out.values == 0.75)


@pytest.mark.parametrize("blend", ["nearest", "idw"])
def test_plane_corners(blend):
    g = build_grid(8, 8)
    s = SampleSet(g, {g.vertex_of(x, y): float(x) for x in (0, 7) for y in (0, 7)})
    rec = method_a(s, g, ReconstructionConfig(order=1, blend=blend))
    assert np.max(np.abs(rec.field.values - g.coords[:, 0])) <= rec.chain.spacing


def sinusoid(g, n=8):
    x, y = g.coords[:, 0], g.coords[:, 1]
    return np.sin(np.pi * x / n) * np.sin(np.pi * y / n)


def strided(g, truth, stride):
    return SampleSet(g, {g.vertex_of(x, y): truth[g.vertex_of(x, y)]
                         for x in range(0, g.width, stride) for y in range(0, g.height, stride)})


def test_refinement_reduces_error_4_to_2():
    g = build_grid(17, 17)
    truth = sinusoid(g)
    cfg = ReconstructionConfig(order=2)
    e4 = np.max(np.abs(reconstruct_smooth(strided(g, truth, 4), g, cfg).values - truth))
    e2 = np.max(np.abs(reconstruct_smooth(strided(g, truth, 2), g, cfg).values - truth))
    assert e2 < e4


@pytest.mark.parametrize("blend", ["nearest", "idw"])
@pytest.mark.parametrize("order", [1, 2])
def test_interpolation_and_determinism(blend, order, rng):
    g = build_grid(9, 7)
    verts = rng.choice(63, 10, replace=False)
    s = SampleSet(g, {int(v): float(g.coords[v, 0] * 0.3 - g.coords[v, 1] * 0.2) for v in verts})
    cfg = ReconstructionConfig(order=order, blend=blend)
    a, b = method_a(s, g, cfg), method_a(s, g, cfg)
    assert a.field.values.tobytes() == b.field.values.tobytes()
    q = a.chain.level(quantize(a.chain, s.values))
    assert np.array_equal(a.field.values[s.vertices], q)
    for comp in a.derivatives.components.values():
        assert is_gradually_varied(g, quantize(comp.chain, comp.values))


def test_equal_samples_give_constant():
    g = build_grid(6, 6)
    s = SampleSet(g, {0: 1.25, 20: 1.25, 35: 1.25})
    out = reconstruct_smooth(s, g, ReconstructionConfig(order=2, blend="idw"))
    assert np.all(out.values == 1.25)


def test_blend_tie_breaks_to_lowest_id():
    g = build_grid(3, 1)
    derivs = {"f": np.array([1.0, 0.0, 5.0]), "fx": np.zeros(3), "fy": np.zeros(3)}
    out = taylor_blend(g, [2, 0], derivs, 1, "nearest")
    # vertex 1 is equidistant from 0 and 2
    assert out.tolist() == [1.0, 1.0, 5.0]
