"""Weight ramps and cutoff surfaces on the (t, a) node lattice.

The verification norms are weighted by negative powers of the distance
|lam| = T + a_max + eta - t - a, which is strictly positive (at least eta)
and largest-weighted near the terminal corner.  Cutoffs are products of
one-dimensional polynomial smoothsteps in t and in a; they localize fields
away from the lattice edges while staying identically 1 on the far
rectangle, and their breakpoints must sit on grid nodes so restriction and
quadrature see the same geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ..errors import BreakpointOffGrid
from ..grid import Grid, lambda_ramp

__all__ = [
    "WeightSpec",
    "CutoffSpec",
    "smoothstep",
    "weight_field",
    "make_cutoff",
]


@dataclass(frozen=True)
class WeightSpec:
    """Exponent family for the verification weights.

    The interior norm weight is |lam|^(-m/k) and the strengthened weight
    is |lam|^(-m/k-1); m may be any real >= 1, k > 0 fixes the exponent
    scale, and eta > 0 keeps |lam| away from zero.
    """

    m: float
    k: float
    eta: float

    def __post_init__(self) -> None:
        if not self.m >= 1.0:
            raise ValueError("m must be >= 1")
        if not self.k > 0.0:
            raise ValueError("k must be positive")
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")


@dataclass(frozen=True)
class CutoffSpec:
    """Breakpoints for the cutoff surfaces.

    (t1, t2) and (a1, a2) frame the rising transitions; the optional
    (t3, a3) mark the inner corner rectangle used by the decay study.
    ``order`` is the smoothstep differentiability class (>= 2).
    """

    t1: float
    t2: float
    a1: float
    a2: float
    t3: float | None = None
    a3: float | None = None
    order: int = 2

    def __post_init__(self) -> None:
        if not (0.0 <= self.t1 < self.t2):
            raise ValueError("need 0 <= t1 < t2")
        if not (0.0 <= self.a1 < self.a2):
            raise ValueError("need 0 <= a1 < a2")
        if (self.t3 is None) != (self.a3 is None):
            raise ValueError("t3 and a3 come together")
        if self.t3 is not None and not (self.t2 < self.t3 and self.a2 < self.a3):
            raise ValueError("need t2 < t3 and a2 < a3")
        if self.order < 2:
            raise ValueError("smoothstep order must be at least 2")


def smoothstep(x: np.ndarray | float, order: int = 2) -> np.ndarray:
    """Polynomial step: 0 for x <= 0, 1 for x >= 1, C^order in between.

    Odd-symmetric about (1/2, 1/2), so smoothstep(1/2) = 1/2 exactly.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    n = order
    acc = np.zeros_like(x)
    for j in range(n + 1):
        acc += comb(n + j, j) * comb(2 * n + 1, n - j) * (-x) ** j
    return x ** (n + 1) * acc


def weight_field(w: WeightSpec, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Node arrays of |lam|^(-m/k) and |lam|^(-m/k-1).

    Both are strictly positive, bounded by the corresponding powers of
    eta, and increase along any path of increasing t + a.
    """
    dist = -lambda_ramp(grid, w.eta)
    p = w.m / w.k
    base = dist ** (-p)
    return base, base / dist


def _snap_breakpoint(grid: Grid, value: float, name: str) -> None:
    idx = round(value / grid.step)
    if abs(value - idx * grid.step) > 1e-9 * max(grid.step, abs(value)):
        raise BreakpointOffGrid(
            f"cutoff breakpoint {name}={value} is not a multiple of the step {grid.step}"
        )


def make_cutoff(c: CutoffSpec, kind: str, grid: Grid) -> np.ndarray:
    """Product-smoothstep cutoff evaluated on the (t, a) node lattice.

    kappa (and its alias kappa_bar) rises from 0 below (t1, a1) to 1 above
    (t2, a2); terminal_chi mirrors it, equal to 1 up to (t2, a2) and
    vanishing at t = T and a = a_max.
    """
    for name, value in (("t1", c.t1), ("t2", c.t2), ("a1", c.a1), ("a2", c.a2)):
        _snap_breakpoint(grid, value, name)
    if c.t3 is not None:
        _snap_breakpoint(grid, c.t3, "t3")
        _snap_breakpoint(grid, c.a3, "a3")
    t = grid.t_nodes
    a = grid.a_nodes
    if kind in ("kappa", "kappa_bar"):
        ft = smoothstep((t - c.t1) / (c.t2 - c.t1), c.order)
        fa = smoothstep((a - c.a1) / (c.a2 - c.a1), c.order)
    elif kind == "terminal_chi":
        if not (c.t2 < grid.t_final and c.a2 < grid.a_max):
            raise ValueError("terminal_chi needs t2 < T and a2 < a_max")
        ft = smoothstep((grid.t_final - t) / (grid.t_final - c.t2), c.order)
        fa = smoothstep((grid.a_max - a) / (grid.a_max - c.a2), c.order)
    else:
        raise ValueError(f"unknown cutoff kind {kind!r}")
    return np.outer(ft, fa)
