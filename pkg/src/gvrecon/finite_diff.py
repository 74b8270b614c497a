"""Forward finite differences and the two sampling pathologies they expose.

The alternating sequence ``L, -L, L, ...`` doubles in magnitude under every
difference, and ``cos`` sampled at multiples of pi reports slopes larger
than the true derivative ever reaches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class Sequence1D:
    values: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) < 1:
            raise InvalidArgumentError("a sequence needs a 1-D array of values")
        if not self.step > 0:
            raise InvalidArgumentError(f"step must be positive, got {self.step}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class DifferenceTable:
    """``orders[j]`` holds the j-th difference quotient."""

    orders: tuple

    def max_abs(self, k: int) -> float:
        vals = self.orders[k].values
        return float(np.max(np.abs(vals))) if len(vals) else 0.0


def forward_difference(s: Sequence1D) -> Sequence1D:
    if len(s) < 2:
        raise InvalidArgumentError("forward difference needs at least 2 values")
    return Sequence1D(np.diff(s.values) / s.step, s.step)


def kth_difference(s: Sequence1D, k: int) -> DifferenceTable:
    if k < 0 or k >= len(s):
        raise InvalidArgumentError(f"order {k} needs more than {len(s)} samples")
    orders = [s]
    for _ in range(k):
        orders.append(forward_difference(orders[-1]))
    return DifferenceTable(tuple(orders))


def alternating(amplitude: float, n: int) -> Sequence1D:
    """``amplitude * (-1)**i`` for ``i < n`` at unit step."""
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return Sequence1D(amplitude * signs, 1.0)


def oscillation_report(amplitude: float, n: int, k_max: int) -> list:
    """Rows ``(k, max |Delta^k f| / dx^k)`` for the alternating sequence."""
    if n <= k_max:
        raise InvalidArgumentError(f"need n > k_max, got n={n}, k_max={k_max}")
    table = kth_difference(alternating(amplitude, n), k_max)
    return [(k, table.max_abs(k)) for k in range(1, k_max + 1)]


COS_SPACINGS = {
    "pi": math.pi,
    "half-pi": math.pi / 2,
    "quarter-pi": math.pi / 4,
}


@dataclass(frozen=True)
class AliasingReport:
    spacing: str
    dx: float
    per_x: float
    per_index: float
    true_bound: float = 1.0

    @property
    def exceeds_bound(self) -> bool:
        return self.per_index > self.true_bound or self.per_x > self.true_bound


def cos_aliasing_report(spacing: str, n: int, func=np.cos) -> AliasingReport:
    """Largest first difference of ``func(i * dx)``, per unit x and per sample.

    ``spacing`` is one of ``"pi"``, ``"half-pi"``, ``"quarter-pi"``.
    """
    if spacing not in COS_SPACINGS:
        raise InvalidArgumentError(f"unknown spacing {spacing!r}; pick from {sorted(COS_SPACINGS)}")
    if n < 3:
        raise InvalidArgumentError("need at least 3 samples")
    dx = COS_SPACINGS[spacing]
    vals = func(np.arange(n) * dx) * np.ones(n)
    jump = float(np.max(np.abs(np.diff(vals))))
    return AliasingReport(spacing, dx, jump / dx, jump)
