"""Test-signal catalog and regularity measurements.

Signals carry the regularity metadata the convergence theory consumes: a
sup-norm bound, a Lipschitz constant when one is known, breakpoints where
the function jumps or kinks, and a continuity class. The modulus of
continuity is estimated from below on a pair grid and, when a Lipschitz
constant is declared, bounded from above in closed form, so callers can
pick whichever side of the estimate their argument needs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "UNIFORM",
    "BOUNDED_ONLY",
    "Signal",
    "UniformGrid",
    "GridFunction",
    "ModulusEstimate",
    "builtin_signal",
    "indicator",
    "piecewise_constant",
    "modulus_of_continuity",
    "sup_error",
]

UNIFORM = "uniformly-continuous"
BOUNDED_ONLY = "bounded-only"

_MAX_PAIR_POINTS = 4_000_000


@dataclass(frozen=True)
class Signal:
    """A real signal with evaluation and regularity metadata.

    ``evaluate`` accepts a float or ndarray and returns the same shape.
    Declared metadata is a promise the test suite spot-checks, not a value
    derived from the samples.
    """

    name: str
    evaluate: Callable
    breakpoints: tuple = ()
    sup_norm: Optional[float] = None
    lipschitz_constant: Optional[float] = None
    continuity: str = UNIFORM

    def __post_init__(self):
        if tuple(sorted(self.breakpoints)) != tuple(self.breakpoints):
            raise ValueError("breakpoints must be sorted")
        if self.sup_norm is not None and self.sup_norm < 0:
            raise ValueError("sup norm must be nonnegative")
        if self.lipschitz_constant is not None and self.lipschitz_constant < 0:
            raise ValueError("Lipschitz constant must be nonnegative")

    def __call__(self, x):
        return self.evaluate(x)

    def scaled(self, c: float) -> "Signal":
        base = self.evaluate
        factor = float(c)
        return replace(
            self,
            name=f"{factor:g}*{self.name}",
            evaluate=lambda x: factor * base(x),
            sup_norm=None if self.sup_norm is None else abs(factor) * self.sup_norm,
            lipschitz_constant=None if self.lipschitz_constant is None
            else abs(factor) * self.lipschitz_constant,
        )


@dataclass(frozen=True)
class UniformGrid:
    """Equispaced evaluation grid: start + step * i for i < count."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if self.count < 1:
            raise ValueError("grid needs at least one point")

    @classmethod
    def from_window(cls, lo: float, hi: float, step: float) -> "UniformGrid":
        if hi <= lo:
            raise ValueError("grid window is empty")
        return cls(float(lo), float(step), int(round((hi - lo) / step)) + 1)

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.count - 1)

    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True)
class GridFunction:
    """Samples on a uniform grid read back as a piecewise-constant signal.

    Cell i covers [start + i*step, start + (i+1)*step); outside the grid the
    function is zero. Modular integrals of such functions are exact sums.
    """

    grid: UniformGrid
    values: np.ndarray
    breakpoints: tuple = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.count,):
            raise ValueError("one value per grid point is required")
        object.__setattr__(self, "values", vals)

    def evaluate(self, x):
        arr = np.asarray(x, dtype=float)
        idx = np.floor((arr - self.grid.start) / self.grid.step).astype(int)
        inside = (idx >= 0) & (idx < self.grid.count)
        out = np.where(inside, self.values[np.clip(idx, 0, self.grid.count - 1)], 0.0)
        return float(out) if arr.ndim == 0 else out

    def __call__(self, x):
        return self.evaluate(x)


def _piecewise(conditions_values):
    """Build a vectorized evaluator from (mask_fn, value_fn) pairs, where the
    value function is only applied where its mask holds."""

    def evaluate(x):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr)
        out = np.zeros_like(flat)
        for mask_fn, value_fn in conditions_values:
            mask = mask_fn(flat)
            if np.any(mask):
                out[mask] = value_fn(flat[mask])
        return float(out[0]) if arr.ndim == 0 else out

    return evaluate


def builtin_signal(which: str, value: Optional[float] = None) -> Signal:
    """Catalog of reference signals used across the test harness.

    ``runge``: 1/(x^2+1), smooth with known Lipschitz constant.
    ``box``: plateau indicator, 1 on |x| <= 1 else 0.
    ``piecewise_rational``: rational tails around two interior steps.
    ``constant``: requires ``value``.
    ``identity``: x itself (unbounded, Lipschitz 1).
    """
    if which == "runge":
        def evaluate(x):
            arr = np.asarray(x, dtype=float)
            out = 1.0 / (arr * arr + 1.0)
            return float(out) if arr.ndim == 0 else out

        return Signal(
            name="runge",
            evaluate=evaluate,
            sup_norm=1.0,
            lipschitz_constant=3.0 * math.sqrt(3.0) / 8.0,
            continuity=UNIFORM,
        )

    if which == "box":
        return Signal(
            name="box",
            evaluate=_piecewise([(lambda t: np.abs(t) <= 1.0, lambda t: np.ones_like(t))]),
            breakpoints=(-1.0, 1.0),
            sup_norm=1.0,
            continuity=BOUNDED_ONLY,
        )

    if which == "piecewise_rational":
        return Signal(
            name="piecewise_rational",
            evaluate=_piecewise([
                (lambda t: t < -1.0, lambda t: 9.0 / (t * t)),
                (lambda t: (t >= -1.0) & (t < 0.0), lambda t: np.full_like(t, 2.0)),
                (lambda t: (t >= 0.0) & (t < 1.0), lambda t: np.ones_like(t)),
                (lambda t: t >= 1.0, lambda t: -50.0 / t**4),
            ]),
            breakpoints=(-1.0, 0.0, 1.0),
            sup_norm=50.0,
            continuity=BOUNDED_ONLY,
        )

    if which == "constant":
        if value is None:
            raise ValueError("constant signal needs a value")
        c = float(value)

        def evaluate(x):
            arr = np.asarray(x, dtype=float)
            out = np.full_like(arr, c)
            return float(out) if arr.ndim == 0 else out

        return Signal(
            name=f"constant({c:g})",
            evaluate=evaluate,
            sup_norm=abs(c),
            lipschitz_constant=0.0,
            continuity=UNIFORM,
        )

    if which == "identity":
        def evaluate(x):
            arr = np.asarray(x, dtype=float)
            return float(arr) if arr.ndim == 0 else arr.copy()

        return Signal(
            name="identity",
            evaluate=evaluate,
            lipschitz_constant=1.0,
            continuity=UNIFORM,
        )

    raise ValueError(f"unknown builtin signal {which!r}")


def indicator(lo: float, hi: float, value: float = 1.0) -> Signal:
    """Scaled indicator of the half-open interval [lo, hi)."""
    if hi <= lo:
        raise ValueError("indicator needs lo < hi")
    lo, hi, value = float(lo), float(hi), float(value)
    return Signal(
        name=f"indicator[{lo:g}..{hi:g})*{value:g}",
        evaluate=_piecewise([(lambda t: (t >= lo) & (t < hi),
                              lambda t: np.full_like(t, value))]),
        breakpoints=(lo, hi),
        sup_norm=abs(value),
        continuity=BOUNDED_ONLY,
    )


def piecewise_constant(pieces, name: str = "piecewise-constant") -> Signal:
    """Signal from (lo, hi, value) rows, each a half-open constant cell."""
    rows = [(float(lo), float(hi), float(v)) for lo, hi, v in pieces]
    if not rows:
        raise ValueError("at least one piece is required")
    for lo, hi, _ in rows:
        if hi <= lo:
            raise ValueError("each piece needs lo < hi")
    edges = tuple(sorted({edge for lo, hi, _ in rows for edge in (lo, hi)}))

    def evaluate(x):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr)
        out = np.zeros_like(flat)
        for lo, hi, v in rows:
            out[(flat >= lo) & (flat < hi)] = v
        return float(out[0]) if arr.ndim == 0 else out

    return Signal(
        name=name,
        evaluate=evaluate,
        breakpoints=edges,
        sup_norm=max(abs(v) for _, _, v in rows),
        continuity=BOUNDED_ONLY,
    )


@dataclass(frozen=True)
class ModulusEstimate:
    """Two-sided envelope for the modulus of continuity at one delta.

    ``grid_lower`` is a supremum over sampled pairs, hence a lower estimate;
    ``lipschitz_upper`` is the certified bound L*delta when L is declared.
    """

    grid_lower: float
    lipschitz_upper: Optional[float]


def modulus_of_continuity(f: Signal, delta: float, window, resolution: int = 32) -> ModulusEstimate:
    """Estimate sup{|f(x)-f(y)| : |x-y| < delta} inside ``window``.

    Pairs are taken on a grid of stride delta/resolution, offset by every
    multiple below delta, so the estimate is a lower bound up to grid
    resolution.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    lo, hi = float(window[0]), float(window[1])
    if hi <= lo:
        raise ValueError("window is empty")
    if f.continuity != UNIFORM:
        warnings.warn(
            f"signal {f.name!r} is not uniformly continuous; its modulus of "
            "continuity does not vanish with delta",
            stacklevel=2,
        )

    stride = delta / resolution
    count = int(math.floor((hi - lo) / stride)) + 1
    if count > _MAX_PAIR_POINTS:
        raise ValueError("pair grid too fine; enlarge delta or reduce resolution")
    values = np.asarray(f.evaluate(lo + stride * np.arange(count)), dtype=float)
    best = 0.0
    for offset in range(1, resolution):
        if offset >= count:
            break
        best = max(best, float(np.max(np.abs(values[offset:] - values[:-offset]))))

    upper = None
    if f.lipschitz_constant is not None:
        upper = f.lipschitz_constant * delta
    return ModulusEstimate(best, upper)


def sup_error(f: Signal, values, grid: UniformGrid) -> float:
    """max_i |f(x_i) - values_i| over the grid."""
    vals = np.asarray(values, dtype=float)
    if vals.shape != (grid.count,):
        raise ValueError("values do not match the grid")
    exact = np.asarray(f.evaluate(grid.points()), dtype=float)
    return float(np.max(np.abs(exact - vals)))
