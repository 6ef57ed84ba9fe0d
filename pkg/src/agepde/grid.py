"""Tensor grid over the time-age-space cylinder (0,T) x (0,a_dagger) x Omega.

Time and age share a single step so that the drift d/dt + d/da is a pure
diagonal difference on the node lattice: node (i, j) talks to (i+1, j+1)
and nothing in between.  Space is a cell-centered box mesh; spatial values
live at cell midpoints and spatial boundary data lives on the faces of the
boundary cells.

Quadrature convention, used by every norm in the package:

* trapezoid weights along t and along a (endpoints half-weighted),
* midpoint rule in space (each cell counts its full volume).

Squared norms are therefore plain weighted sums of squares; the summation
order is fixed (numpy pairwise reduction over a fixed layout), which makes
repeated evaluations bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidDimension, NonIntegerStepRatio, RectOffGrid

__all__ = [
    "Grid",
    "TraceFlags",
    "Field",
    "BoundaryField",
    "build_grid",
    "norm_q",
    "norm_boundary",
    "restrict",
    "rect_indices",
    "ta_norm_sq",
    "lambda_ramp",
]

_REL_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Immutable discretization of (0,T) x (0,a_dagger) x Omega.

    Attributes:
        t_final: horizon T.
        a_max: maximal age a_dagger.
        step: shared time-age step (Delta t = Delta a).
        n_t: number of time steps (nodes are 0..n_t).
        n_a: number of age steps.
        extents: spatial box edge lengths, one per axis (dim 1 or 2).
        n_x: cells per spatial axis (same count on every axis).
        t_nodes: node coordinates along t, shape (n_t + 1,).
        a_nodes: node coordinates along a, shape (n_a + 1,).
        centers: cell-center coordinates per axis, each shape (n_x,).
        dx: cell widths per axis.
        cell_volume: product of the cell widths.
        boundary_cells: flat cell index adjacent to each boundary face.
        boundary_axis: axis normal to each boundary face.
        boundary_side: 0 for the low side of the axis, 1 for the high side.
        boundary_area: face areas; their sum is the measure of the boundary.
    """

    t_final: float
    a_max: float
    step: float
    n_t: int
    n_a: int
    extents: tuple[float, ...]
    n_x: int
    t_nodes: np.ndarray = field(repr=False)
    a_nodes: np.ndarray = field(repr=False)
    centers: tuple[np.ndarray, ...] = field(repr=False)
    dx: tuple[float, ...]
    cell_volume: float
    boundary_cells: np.ndarray = field(repr=False)
    boundary_axis: np.ndarray = field(repr=False)
    boundary_side: np.ndarray = field(repr=False)
    boundary_area: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return (self.n_x,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.n_x**self.dim

    @property
    def n_boundary_faces(self) -> int:
        return self.boundary_cells.shape[0]

    @property
    def node_shape(self) -> tuple[int, ...]:
        return (self.n_t + 1, self.n_a + 1)

    @property
    def domain_volume(self) -> float:
        return float(np.prod(self.extents))

    @property
    def boundary_measure(self) -> float:
        return float(np.sum(self.boundary_area))

    def ta_weights(self) -> np.ndarray:
        """Trapezoid weight array over the full node lattice, shape node_shape."""
        wt = np.ones(self.n_t + 1)
        wt[0] = wt[-1] = 0.5
        wa = np.ones(self.n_a + 1)
        wa[0] = wa[-1] = 0.5
        return np.outer(wt, wa)

    def ta_weights_rect(self, rect: tuple[float, float, float, float]) -> np.ndarray:
        """Trapezoid weights supported on an on-grid rectangle, zero outside."""
        i0, i1, j0, j1 = rect_indices(self, rect)
        w = np.zeros(self.node_shape)
        if i1 > i0 and j1 > j0:
            wt = np.ones(i1 - i0 + 1)
            wt[0] = wt[-1] = 0.5
            wa = np.ones(j1 - j0 + 1)
            wa[0] = wa[-1] = 0.5
            w[i0 : i1 + 1, j0 : j1 + 1] = np.outer(wt, wa)
        return w

    def boundary_trace(self, spatial_values: np.ndarray) -> np.ndarray:
        """Piecewise-constant trace of a cell array onto the boundary faces."""
        return spatial_values.reshape(-1)[self.boundary_cells]


@dataclass(frozen=True)
class TraceFlags:
    """Declared zero-trace structure of a field.

    ``zero_t_ends`` and ``zero_a_ends`` refer to stored node slices (t in
    {0, T}, a in {0, a_dagger}) and are enforced exactly.  The spatial flag
    declares membership in the zero-trace class used by the Dirichlet ghost
    convention; cell-centered storage holds no nodes on the boundary itself,
    so there is nothing to zero and the flag is purely semantic.
    """

    zero_t_ends: bool = False
    zero_a_ends: bool = False
    zero_spatial_boundary: bool = False


@dataclass(frozen=True)
class Field:
    """Scalar field sampled at (t-node, a-node, spatial cell) points.

    Values have shape (n_t + 1, n_a + 1) + spatial_shape and are always
    finite; construction rejects NaN/Inf and checks declared trace flags
    against the stored slices.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    flags: TraceFlags = TraceFlags()

    def __post_init__(self) -> None:
        expected = self.grid.node_shape + self.grid.spatial_shape
        if self.values.shape != expected:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")
        if self.flags.zero_t_ends:
            if np.any(self.values[0]) or np.any(self.values[-1]):
                raise ValueError("zero_t_ends declared but end slices are nonzero")
        if self.flags.zero_a_ends:
            if np.any(self.values[:, 0]) or np.any(self.values[:, -1]):
                raise ValueError("zero_a_ends declared but end slices are nonzero")
        arr = np.asarray(self.values)
        arr.flags.writeable = False

    def with_values(self, values: np.ndarray, flags: TraceFlags | None = None) -> "Field":
        return Field(self.grid, np.asarray(values, dtype=float), flags or self.flags)


@dataclass(frozen=True)
class BoundaryField:
    """Scalar data on the lateral boundary: one value per (t, a, face)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        expected = self.grid.node_shape + (self.grid.n_boundary_faces,)
        if self.values.shape != expected:
            raise ValueError(
                f"boundary field shape {self.values.shape} does not match {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("boundary field contains non-finite values")
        arr = np.asarray(self.values)
        arr.flags.writeable = False


def build_grid(
    t_final: float,
    a_max: float,
    extents: Sequence[float],
    n_x: int,
    n_char: int | None = None,
    step: float | None = None,
) -> Grid:
    """Construct a grid with a shared time-age step.

    Exactly one of ``n_char`` and ``step`` must be given.  ``n_char`` is the
    step count along both t and a and requires t_final == a_max; ``step``
    works for unequal horizons as long as both extents are integer multiples
    of it.

    Args:
        t_final: horizon T > 0.
        a_max: maximal age a_dagger > 0.
        extents: spatial box edge lengths; length 1 or 2.
        n_x: cells per spatial axis, >= 2.
        n_char: number of characteristic steps when t_final == a_max.
        step: shared step; must divide both extents.

    Raises:
        NonIntegerStepRatio: step does not evenly divide an extent, or
            n_char given with t_final != a_max.
        InvalidDimension: spatial dimension not 1 or 2.
    """
    if (n_char is None) == (step is None):
        raise ValueError("provide exactly one of n_char and step")
    if t_final <= 0 or a_max <= 0:
        raise ValueError("horizons must be positive")
    extents = tuple(float(e) for e in extents)
    if len(extents) not in (1, 2):
        raise InvalidDimension(f"spatial dimension {len(extents)} not supported")
    if any(e <= 0 for e in extents):
        raise ValueError("spatial extents must be positive")
    if n_x < 2:
        raise ValueError("need at least 2 cells per axis")

    if n_char is not None:
        if n_char < 1:
            raise ValueError("n_char must be >= 1")
        if abs(t_final - a_max) > _REL_SNAP_TOL * max(t_final, a_max):
            raise NonIntegerStepRatio(
                "n_char requires equal horizons; pass step= for "
                f"t_final={t_final}, a_max={a_max}"
            )
        ds = t_final / n_char
        n_t = n_a = int(n_char)
    else:
        assert step is not None
        if step <= 0:
            raise ValueError("step must be positive")
        ds = float(step)
        n_t = _snap_count(t_final, ds, "t_final")
        n_a = _snap_count(a_max, ds, "a_max")

    t_nodes = np.arange(n_t + 1) * ds
    a_nodes = np.arange(n_a + 1) * ds
    dx = tuple(e / n_x for e in extents)
    centers = tuple((np.arange(n_x) + 0.5) * h for h in dx)
    cell_volume = float(np.prod(dx))

    b_cells, b_axis, b_side, b_area = _boundary_faces(len(extents), n_x, dx)
    for arr in (t_nodes, a_nodes, b_cells, b_axis, b_side, b_area, *centers):
        arr.flags.writeable = False

    return Grid(
        t_final=float(t_final),
        a_max=float(a_max),
        step=ds,
        n_t=n_t,
        n_a=n_a,
        extents=extents,
        n_x=int(n_x),
        t_nodes=t_nodes,
        a_nodes=a_nodes,
        centers=centers,
        dx=dx,
        cell_volume=cell_volume,
        boundary_cells=b_cells,
        boundary_axis=b_axis,
        boundary_side=b_side,
        boundary_area=b_area,
    )


def _snap_count(extent: float, step: float, name: str) -> int:
    ratio = extent / step
    n = round(ratio)
    if n < 1 or abs(ratio - n) > _REL_SNAP_TOL * max(1.0, ratio):
        raise NonIntegerStepRatio(f"{name}={extent} is not an integer multiple of step={step}")
    return int(n)


def _boundary_faces(dim, n_x, dx):
    """Enumerate boundary faces: flat adjacent cell, normal axis, side, area."""
    cells, axes, sides, areas = [], [], [], []
    if dim == 1:
        for side, cell in ((0, 0), (1, n_x - 1)):
            cells.append(cell)
            axes.append(0)
            sides.append(side)
            areas.append(1.0)  # point boundary carries counting measure
    else:
        idx = np.arange(n_x)
        for axis in range(2):
            area = dx[1 - axis]
            for side in (0, 1):
                edge = 0 if side == 0 else n_x - 1
                if axis == 0:
                    flat = edge * n_x + idx
                else:
                    flat = idx * n_x + edge
                cells.extend(flat.tolist())
                axes.extend([axis] * n_x)
                sides.extend([side] * n_x)
                areas.extend([area] * n_x)
    return (
        np.asarray(cells, dtype=np.intp),
        np.asarray(axes, dtype=np.intp),
        np.asarray(sides, dtype=np.intp),
        np.asarray(areas, dtype=float),
    )


def rect_indices(grid: Grid, rect: tuple[float, float, float, float]) -> tuple[int, int, int, int]:
    """Snap a (t1, t2, a1, a2) rectangle to node indices.

    Raises RectOffGrid when a corner misses the lattice or the rectangle is
    inverted or outside the cylinder.
    """
    t1, t2, a1, a2 = rect
    i0 = _snap_node(grid, t1, grid.n_t, "t1")
    i1 = _snap_node(grid, t2, grid.n_t, "t2")
    j0 = _snap_node(grid, a1, grid.n_a, "a1")
    j1 = _snap_node(grid, a2, grid.n_a, "a2")
    if i1 < i0 or j1 < j0:
        raise RectOffGrid(f"rectangle {rect} is inverted")
    return i0, i1, j0, j1


def _snap_node(grid: Grid, value: float, n_max: int, name: str) -> int:
    ratio = value / grid.step
    k = round(ratio)
    if abs(value - k * grid.step) > _REL_SNAP_TOL * max(grid.step, abs(value)):
        raise RectOffGrid(f"{name}={value} is not on the node lattice (step={grid.step})")
    if k < 0 or k > n_max:
        raise RectOffGrid(f"{name}={value} lies outside the cylinder")
    return int(k)


def norm_q(
    f: Field,
    rect: tuple[float, float, float, float] | None = None,
    weight: np.ndarray | None = None,
) -> float:
    """Squared weighted norm over the cylinder (or an on-grid sub-rectangle).

    Computes sum over nodes and cells of  w(t,a)^2 f^2 dV  with trapezoid
    weights in (t, a) and midpoint cells in space, i.e. the square of the
    norm of w*f.  ``weight`` is a (t, a) node array applied multiplicatively.
    """
    g = f.grid
    wta = g.ta_weights() if rect is None else g.ta_weights_rect(rect)
    if weight is not None:
        if weight.shape != g.node_shape:
            raise ValueError("weight must be a (t, a) node array")
        wta = wta * weight * weight
    space = np.sum(f.values * f.values, axis=tuple(range(2, f.values.ndim)))
    return float(np.sum(wta * space) * g.cell_volume * g.step * g.step)


def norm_boundary(
    f: BoundaryField,
    rect: tuple[float, float, float, float] | None = None,
    weight: np.ndarray | None = None,
) -> float:
    """Squared weighted norm over the lateral boundary (0,T)x(0,a_dagger)x dOmega."""
    g = f.grid
    wta = g.ta_weights() if rect is None else g.ta_weights_rect(rect)
    if weight is not None:
        if weight.shape != g.node_shape:
            raise ValueError("weight must be a (t, a) node array")
        wta = wta * weight * weight
    space = np.sum(f.values * f.values * g.boundary_area, axis=2)
    return float(np.sum(wta * space) * g.step * g.step)


def restrict(f: Field, rect: tuple[float, float, float, float]) -> Field:
    """Zero a field outside an on-grid rectangle (boundary nodes kept)."""
    g = f.grid
    i0, i1, j0, j1 = rect_indices(g, rect)
    out = np.zeros_like(f.values)
    out[i0 : i1 + 1, j0 : j1 + 1] = f.values[i0 : i1 + 1, j0 : j1 + 1]
    return Field(g, out, f.flags)


def ta_norm_sq(
    grid: Grid,
    node_array: np.ndarray,
    rect: tuple[float, float, float, float] | None = None,
) -> float:
    """Squared trapezoid norm of a plain (t, a) node array (no spatial factor)."""
    if node_array.shape != grid.node_shape:
        raise ValueError("expected a (t, a) node array")
    wta = grid.ta_weights() if rect is None else grid.ta_weights_rect(rect)
    return float(np.sum(wta * node_array * node_array) * grid.step * grid.step)


def lambda_ramp(grid: Grid, eta: float) -> np.ndarray:
    """Signed ramp t - T + a - a_max - eta on the (t, a) node lattice.

    Strictly negative for eta > 0, and its forward diagonal difference is
    exactly 2 whenever T, a_max and the step are dyadic rationals.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive to keep the ramp away from zero")
    return (
        grid.t_nodes[:, None]
        + grid.a_nodes[None, :]
        - (grid.t_final + grid.a_max + eta)
    )
