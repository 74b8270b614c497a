import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvrecon.errors import InvalidArgumentError
from gvrecon.finite_diff import (Sequence1D, alternating, cos_aliasing_report, forward_difference,
                                 kth_difference, oscillation_report)


def test_forward_difference_examples():
    assert np.all(forward_difference(Sequence1D([3.0] * 5)).values == 0)
    assert forward_difference(Sequence1D([1, -1, 1, -1])).values.tolist() == [-2, 2, -2]
    assert np.allclose(forward_difference(Sequence1D(0.7 * np.arange(6))).values, 0.7)
    with pytest.raises(InvalidArgumentError):
        forward_difference(Sequence1D([1.0]))


def test_forward_difference_divides_by_step():
    s = Sequence1D([0.0, 0.5, 2.0], step=0.5)
    out = forward_difference(s)
    assert out.values.tolist() == [1.0, 3.0]
    assert out.step == 0.5


def test_second_difference_of_square():
    h = 0.25
    x = np.arange(10) * h
    table = kth_difference(Sequence1D(x ** 2, h), 2)
    assert np.allclose(table.orders[2].values, 2.0, atol=1e-12)
    assert [len(o) for o in table.orders] == [10, 9, 8]


def test_kth_difference_bounds():
    with pytest.raises(InvalidArgumentError):
        kth_difference(Sequence1D([1.0, 2.0, 3.0]), 3)


@pytest.mark.parametrize("amp", [1.0, 2.5, 7.0])
def test_alternating_growth(amp):
    table = kth_difference(alternating(amp, 12), 10)
    for k in range(11):
        assert table.max_abs(k) == 2 ** k * amp


def test_oscillation_report_examples():
    assert oscillation_report(1.0, 5, 3) == [(1, 2.0), (2, 4.0), (3, 8.0)]
    assert all(v == 0 for _, v in oscillation_report(0.0, 6, 4))
    assert oscillation_report(2.5, 6, 4)[-1] == (4, 40.0)
    with pytest.raises(InvalidArgumentError):
        oscillation_report(1.0, 3, 3)


def test_cos_aliasing_examples():
    pi = cos_aliasing_report("pi", 8)
    assert pi.per_index == pytest.approx(2.0, abs=1e-12)
    assert pi.per_x == pytest.approx(2 / math.pi, abs=1e-12)
    assert pi.per_index > pi.true_bound
    quarter = cos_aliasing_report("quarter-pi", 9)
    # largest step of 1, a, 0, -a, -1 with a = cos(pi/4) is a
    assert quarter.per_x == pytest.approx(math.cos(math.pi / 4) / (math.pi / 4), abs=1e-12)
    assert quarter.per_x <= 1.0
    half = cos_aliasing_report("half-pi", 5)
    assert half.per_x == pytest.approx(2 / math.pi, abs=1e-12)
    const = cos_aliasing_report("pi", 3, func=lambda x: np.ones_like(x))
    assert const.per_x == 0.0 and const.per_index == 0.0
    with pytest.raises(InvalidArgumentError):
        cos_aliasing_report("pi", 2)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=6, max_size=20), finite, finite, st.integers(0, 4))
def test_linearity(vals, alpha, beta, k):
    f = np.array(vals)
    g = np.cos(np.arange(len(f)))
    lhs = kth_difference(Sequence1D(alpha * f + beta * g), k).orders[k].values
    rhs = (alpha * kth_difference(Sequence1D(f), k).orders[k].values
           + beta * kth_difference(Sequence1D(g), k).orders[k].values)
    scale = 2 ** k * (abs(alpha) * np.max(np.abs(f)) + abs(beta) + 1.0)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 5), st.lists(st.floats(-3, 3), min_size=6, max_size=6),
       st.floats(0.1, 2.0))
def test_degree_annihilation(deg, coeffs, step):
    x = np.arange(12) * step
    y = np.polyval(coeffs[:deg + 1], x)
    out = kth_difference(Sequence1D(y, step), deg + 1).orders[deg + 1].values
    scale = np.max(np.abs(y)) / step ** (deg + 1) * 2 ** (deg + 1) + 1.0
    assert np.max(np.abs(out)) <= 1e-9 * scale
