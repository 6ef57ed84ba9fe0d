"""Characteristic-aligned marching schemes for the age-structured problem.

Forward solves advance along characteristics: the value at node (i, j)
comes from (i-1, j-1) in a single step that treats diffusion implicitly
(conjugate gradients on I - step * A, which is symmetric positive
definite) and the reaction term explicitly at the departure node.  The
march is level-synchronous in time so that nonlocal reaction terms and
renewal inflow can read the whole previous age slab.

The naive backward march inverts the forward step exactly:
u_prev = u_cur - step * A u_cur.  It exists to demonstrate instability,
not to produce answers; high spatial modes are amplified by
(1 + step * mu_j) per step and the march reports where values overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import SimpleNamespace
from typing import Callable, Literal

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import LinearSolveDiverged, StiffSourceStep
from .grid import BoundaryField, Field, Grid, TraceFlags
from .model import DiffusionSpec, SourceSpec, SurfaceSpec, eval_source, eval_surface
from .operators import (
    DirichletBC,
    OperatorWorkspace,
    RobinBC,
    _subtract_boundary_flux,
)

__all__ = [
    "Scenario",
    "SolveReport",
    "BackwardReport",
    "CoupledScenario",
    "CoupledReport",
    "solve_forward",
    "solve_diagonal_forward",
    "solve_backward_naive",
    "solve_coupled",
]


@dataclass(frozen=True)
class Scenario:
    """One well-posed forward problem on the time-age-space cylinder.

    ``initial`` prescribes u(0, a, x) over the age slab; the age-zero line
    comes either from an ``inflow`` table u(t, 0, x) or from a renewal
    ``birth_kernel`` b(a) applied to the previous time level,
    u(t_i, 0, x) = integral of b(a) u(t_{i-1}, a, x) da.  ``forcing`` is an
    optional known production term f(t, a, xmesh) added to the reaction.
    """

    grid: Grid
    diffusion: DiffusionSpec
    source: SourceSpec
    bc: Literal["dirichlet", "robin"] = "dirichlet"
    surface: SurfaceSpec | None = None
    initial: np.ndarray | None = None
    inflow: np.ndarray | None = None
    birth_kernel: np.ndarray | None = None
    forcing: Callable[[float, float, tuple], np.ndarray] | None = None

    def __post_init__(self) -> None:
        g = self.grid
        if self.bc not in ("dirichlet", "robin"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.bc == "robin" and self.surface is None:
            raise ValueError("robin runs need a surface law")
        if self.initial is not None:
            want = (g.n_a + 1,) + g.spatial_shape
            if np.shape(self.initial) != want:
                raise ValueError(f"initial must have shape {want}")
        if self.inflow is not None and self.birth_kernel is not None:
            raise ValueError("prescribe inflow or a birth kernel, not both")
        if self.inflow is not None:
            want = (g.n_t + 1,) + g.spatial_shape
            if np.shape(self.inflow) != want:
                raise ValueError(f"inflow must have shape {want}")
        if self.birth_kernel is not None and np.shape(self.birth_kernel) != (g.n_a + 1,):
            raise ValueError("birth kernel lives on the age nodes")


@dataclass(frozen=True)
class SolveReport:
    u: Field
    steps: int
    total_cg_iterations: int
    max_cg_iterations: int
    max_source_lipschitz: float


@dataclass(frozen=True)
class BackwardReport:
    """Diagonal backward march history; ``overflow_step`` marks divergence."""

    history: np.ndarray
    overflow_step: int | None


class _Stepper:
    """Shared implicit-step machinery for the marches."""

    def __init__(self, grid: Grid, diffusion, bc: str) -> None:
        self.grid = grid
        self.bc = bc
        if bc == "dirichlet":
            op_bc = DirichletBC()
        else:
            zero_flux = BoundaryField(
                grid, np.zeros(grid.node_shape + (grid.n_boundary_faces,))
            )
            op_bc = RobinBC(flux=zero_flux)
        self.ws = OperatorWorkspace(grid, diffusion, op_bc)
        self.total_cg = 0
        self.max_cg = 0

    def implicit_solve(self, b: np.ndarray, i: int, j: int) -> np.ndarray:
        g = self.grid
        n = b.size
        shape = b.shape
        ds = g.step

        def matvec(v: np.ndarray) -> np.ndarray:
            vs = v.reshape(shape)
            return (vs - ds * self.ws.apply_slice(vs, i, j)).reshape(-1)

        op = LinearOperator((n, n), matvec=matvec, dtype=float)
        iters = 0

        def count(_xk: np.ndarray) -> None:
            nonlocal iters
            iters += 1

        x, info = cg(op, b.reshape(-1), x0=b.reshape(-1), rtol=1e-12, atol=0.0,
                     maxiter=1000, callback=count)
        if info != 0:
            raise LinearSolveDiverged(
                f"conjugate gradients stalled at node ({i}, {j}), info={info}"
            )
        self.total_cg += iters
        self.max_cg = max(self.max_cg, iters)
        return x.reshape(shape)


def _xmesh(grid: Grid) -> tuple:
    return tuple(np.meshgrid(*grid.centers, indexing="ij"))


def _source_step(
    scn: Scenario, xmesh, t: float, a: float, u_old: np.ndarray, ctx
) -> tuple[np.ndarray, float]:
    """Explicit reaction increment and a local Lipschitz estimate."""
    g = scn.grid
    lip = 0.0
    total = np.zeros_like(u_old)
    if scn.source.kind != "zero":
        f0 = eval_source(scn.source, t, a, xmesh, u_old, context=ctx)
        h = 1e-6 * (1.0 + float(np.max(np.abs(u_old))))
        fp = eval_source(scn.source, t, a, xmesh, u_old + h, context=ctx)
        fm = eval_source(scn.source, t, a, xmesh, u_old - h, context=ctx)
        lip = float(np.max(np.abs(fp - fm))) / (2.0 * h)
        if g.step * lip > 1.0:
            raise StiffSourceStep(
                f"step * local Lipschitz bound = {g.step * lip:.3g} > 1 at "
                f"(t={t:.6g}, a={a:.6g}); refine the characteristic step"
            )
        total += f0
    if scn.forcing is not None:
        total += scn.forcing(t, a, xmesh)
    return total, lip


def _renewal_slice(grid: Grid, kernel: np.ndarray, slab: np.ndarray) -> np.ndarray:
    wa = np.ones(grid.n_a + 1)
    wa[0] = wa[-1] = 0.5
    shape = (grid.n_a + 1,) + (1,) * (slab.ndim - 1)
    return np.sum((wa * kernel).reshape(shape) * slab, axis=0) * grid.step


def solve_forward(scn: Scenario) -> SolveReport:
    """March the scenario forward across the full (t, a) lattice."""
    g = scn.grid
    stepper = _Stepper(g, scn.diffusion, scn.bc)
    xmesh = _xmesh(g)
    u = np.zeros((g.n_t + 1, g.n_a + 1) + g.spatial_shape)
    if scn.initial is not None:
        u[0] = np.asarray(scn.initial, dtype=float)
    if scn.inflow is not None:
        u[1:, 0] = np.asarray(scn.inflow, dtype=float)[1:]
    max_lip = 0.0
    for i in range(1, g.n_t + 1):
        ctx = SimpleNamespace(grid=g, values=u)
        if scn.birth_kernel is not None:
            u[i, 0] = _renewal_slice(g, scn.birth_kernel, u[i - 1])
        for j in range(1, g.n_a + 1):
            t0, a0 = g.t_nodes[i - 1], g.a_nodes[j - 1]
            u_old = u[i - 1, j - 1]
            react, lip = _source_step(scn, xmesh, t0, a0, u_old, ctx)
            max_lip = max(max_lip, lip)
            b = u_old + g.step * react
            if scn.bc == "robin":
                g_flux = np.asarray(
                    eval_surface(scn.surface, g.boundary_trace(u_old)), dtype=float
                )
                _subtract_boundary_flux(g, b, g.step * g_flux)
            u[i, j] = stepper.implicit_solve(b, i, j)
    flags = TraceFlags(zero_spatial_boundary=(scn.bc == "dirichlet"))
    return SolveReport(
        u=Field(g, u, flags),
        steps=g.n_t * g.n_a,
        total_cg_iterations=stepper.total_cg,
        max_cg_iterations=stepper.max_cg,
        max_source_lipschitz=max_lip,
    )


def solve_diagonal_forward(scn: Scenario, initial: np.ndarray) -> np.ndarray:
    """Forward march restricted to the main diagonal nodes (i, i).

    Only the zero reaction kind is supported; this is the well-posed half
    of the instability demo.
    """
    if scn.source.kind != "zero" or scn.forcing is not None:
        raise ValueError("diagonal marches support reaction-free runs only")
    g = scn.grid
    q = min(g.n_t, g.n_a)
    stepper = _Stepper(g, scn.diffusion, scn.bc)
    history = np.empty((q + 1,) + g.spatial_shape)
    history[0] = np.asarray(initial, dtype=float)
    for i in range(1, q + 1):
        history[i] = stepper.implicit_solve(history[i - 1].copy(), i, i)
    return history


def solve_backward_naive(scn: Scenario, terminal: np.ndarray) -> BackwardReport:
    """Explicit reversal of the diagonal forward march.

    Exact algebraic inverse of the implicit step, and therefore unstable:
    mode j grows by (1 + step * mu_j) each step.  On overflow the history
    is filled with nan from the failing step on.
    """
    if scn.source.kind != "zero" or scn.forcing is not None:
        raise ValueError("the naive reversal supports reaction-free runs only")
    if scn.bc != "dirichlet":
        raise ValueError("the naive reversal is a Dirichlet demo")
    g = scn.grid
    q = min(g.n_t, g.n_a)
    ws = OperatorWorkspace(g, scn.diffusion, DirichletBC())
    history = np.empty((q + 1,) + g.spatial_shape)
    history[q] = np.asarray(terminal, dtype=float)
    overflow: int | None = None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(q, 0, -1):
            prev = history[i] - g.step * ws.apply_slice(history[i], i, i)
            if not np.all(np.isfinite(prev)):
                history[: i] = np.nan
                overflow = i - 1
                break
            history[i - 1] = prev
    return BackwardReport(history=history, overflow_step=overflow)


@dataclass(frozen=True)
class CoupledScenario:
    """Two interacting species sharing one diffusion law.

    The transfer rate chi * u1 * (age integral of u2) moves mass from
    species 1 to species 2; ``recovery`` removes species-2 mass.  Both
    species use the same boundary condition; ``robin`` here means the
    zero-flux wall (no surface reaction), the conservative setting.
    """

    grid: Grid
    diffusion: DiffusionSpec
    chi: float
    recovery: float
    initial_1: np.ndarray
    initial_2: np.ndarray
    inflow_1: np.ndarray | None = None
    inflow_2: np.ndarray | None = None
    birth_kernel: np.ndarray | None = None
    bc: Literal["dirichlet", "robin"] = "robin"


@dataclass(frozen=True)
class CoupledReport:
    u1: Field
    u2: Field
    total_cg_iterations: int


def _age_pressure(grid: Grid, slab: np.ndarray) -> np.ndarray:
    """Age integral of a (n_a+1, *cells) slab, pointwise in space."""
    wa = np.ones(grid.n_a + 1)
    wa[0] = wa[-1] = 0.5
    shape = (grid.n_a + 1,) + (1,) * (slab.ndim - 1)
    return np.sum(wa.reshape(shape) * slab, axis=0) * grid.step


def solve_coupled(scn: CoupledScenario) -> CoupledReport:
    """Level-synchronous march for the two-species system.

    The transfer term is evaluated once per step from the previous level
    and applied with opposite signs, so the summed update is transfer-free
    and total mass obeys the single-species budget exactly.
    """
    g = scn.grid
    stepper = _Stepper(g, scn.diffusion, scn.bc)
    u1 = np.zeros((g.n_t + 1, g.n_a + 1) + g.spatial_shape)
    u2 = np.zeros_like(u1)
    u1[0] = np.asarray(scn.initial_1, dtype=float)
    u2[0] = np.asarray(scn.initial_2, dtype=float)
    if scn.inflow_1 is not None:
        u1[1:, 0] = np.asarray(scn.inflow_1, dtype=float)[1:]
    if scn.inflow_2 is not None:
        u2[1:, 0] = np.asarray(scn.inflow_2, dtype=float)[1:]
    for i in range(1, g.n_t + 1):
        if scn.birth_kernel is not None:
            u1[i, 0] = _renewal_slice(g, scn.birth_kernel, u1[i - 1] + u2[i - 1])
        pressure = _age_pressure(g, u2[i - 1])
        for j in range(1, g.n_a + 1):
            transfer = scn.chi * u1[i - 1, j - 1] * pressure
            b1 = u1[i - 1, j - 1] - g.step * transfer
            b2 = u2[i - 1, j - 1] + g.step * (transfer - scn.recovery * u2[i - 1, j - 1])
            u1[i, j] = stepper.implicit_solve(b1, i, j)
            u2[i, j] = stepper.implicit_solve(b2, i, j)
    flags = TraceFlags(zero_spatial_boundary=(scn.bc == "dirichlet"))
    return CoupledReport(
        u1=Field(g, u1, flags),
        u2=Field(g, u2, flags),
        total_cg_iterations=stepper.total_cg,
    )
