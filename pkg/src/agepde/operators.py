"""Discrete spatial operator, characteristic transport, identity checks.

The elliptic part is a flux-form finite-volume operator on the cell mesh:
face fluxes from face-centered diffusivities, divided by cell volume.  The
construction is variational, which buys two structural facts used heavily
by the verification layer:

* summation by parts is exact: for zero-trace slices,
  <A u, v> = -sum over faces of d * (du/dx)(dv/dx) * face volume,
  with boundary faces half-weighted, to machine precision;
* the operator is symmetric, and negative semidefinite whenever the
  tensor is pointwise positive.

Dirichlet data enters through odd ghost cells (ghost = -interior, so the
trace vanishes at the face); Robin data through a prescribed outward flux
on the boundary faces.  Off-diagonal tensor entries are discretized with
corner-averaged cross gradients, currently for Dirichlet data only.

Transport along characteristics is the diagonal node difference; because
time and age share one step, a forward difference of any function of t - a
vanishes identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import TraceFlagMissing
from .grid import BoundaryField, Field, Grid, TraceFlags, lambda_ramp
from .model import DiffusionSpec, SurfaceSpec, eval_diffusion, eval_surface

__all__ = [
    "DirichletBC",
    "RobinBC",
    "OperatorWorkspace",
    "IdentityReport",
    "apply_A",
    "apply_transport",
    "gradient",
    "check_green_identity",
    "check_transport_identity",
    "grad_norm_sq_profile",
    "boundary_flux_gap",
    "boundary_curvature_scale",
]


@dataclass(frozen=True)
class DirichletBC:
    """Homogeneous Dirichlet data (zero spatial trace)."""


@dataclass(frozen=True)
class RobinBC:
    """Nonlinear flux condition: outward normal flux -d grad(u) . n = S(u).

    Either ``surface`` with a reference field (flux = S of the boundary
    trace of ``u_ref``), or a fully prescribed ``flux`` table.  Exactly one
    of the two routes must be provided.
    """

    surface: SurfaceSpec | None = None
    u_ref: Field | None = None
    flux: BoundaryField | None = None

    def __post_init__(self) -> None:
        by_surface = self.surface is not None and self.u_ref is not None
        by_flux = self.flux is not None
        if by_surface == by_flux:
            raise ValueError("provide either (surface, u_ref) or flux")

    def flux_slice(self, grid: Grid, i: int, j: int) -> np.ndarray:
        if self.flux is not None:
            return self.flux.values[i, j]
        trace = grid.boundary_trace(self.u_ref.values[i, j])
        return np.asarray(eval_surface(self.surface, trace), dtype=float)


BC = DirichletBC | RobinBC


class OperatorWorkspace:
    """Face-centered diffusivities for one grid/tensor/boundary combination.

    Face arrays are cached per (t, a) node (a single shared entry when the
    tensor is constant in time-age).  The same face value serves both
    adjacent cells by construction, so transmissibility symmetry is exact.
    """

    _CACHE_MAX = 16

    def __init__(self, grid: Grid, d: DiffusionSpec, bc: BC) -> None:
        if d.dim != grid.dim:
            raise ValueError("diffusion dimension does not match grid")
        if grid.dim == 2 and isinstance(bc, RobinBC) and not _is_diagonal(d, grid):
            raise NotImplementedError("cross-diffusion with Robin data not supported")
        self.grid = grid
        self.d = d
        self.bc = bc
        self._cache: dict[tuple[int, int], tuple] = {}
        self._face_points = _face_points(grid)
        self._corner_points = _corner_points(grid) if grid.dim == 2 else None

    def face_coeffs(self, i: int, j: int):
        """Per-axis face diffusivities and (2D) corner cross coefficients."""
        key = (0, 0) if self.d.constant_in_ta else (i, j)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        t = key[0] * self.grid.step if self.d.constant_in_ta else self.grid.t_nodes[i]
        a = self.grid.a_nodes[0] if self.d.constant_in_ta else self.grid.a_nodes[j]
        axes = []
        for axis, pts in enumerate(self._face_points):
            tensor = eval_diffusion(self.d, t, a, pts)
            axes.append(np.ascontiguousarray(tensor[..., axis, axis]))
        cross = None
        if self._corner_points is not None:
            tensor = eval_diffusion(self.d, t, a, self._corner_points)
            off = tensor[..., 0, 1]
            if np.any(off):
                cross = np.ascontiguousarray(off)
        entry = (tuple(axes), cross)
        if len(self._cache) >= self._CACHE_MAX:
            self._cache.clear()
        self._cache[key] = entry
        return entry

    def apply_slice(self, u: np.ndarray, i: int, j: int) -> np.ndarray:
        """A applied to one spatial slice at node (i, j)."""
        faces, cross = self.face_coeffs(i, j)
        dirichlet = isinstance(self.bc, DirichletBC)
        out = _diag_divergence(self.grid, u, faces, dirichlet)
        if cross is not None:
            out += _cross_divergence(self.grid, u, cross)
        if not dirichlet:
            g = self.bc.flux_slice(self.grid, i, j)
            _subtract_boundary_flux(self.grid, out, g)
        return out

    def energy_slice(self, u: np.ndarray, v: np.ndarray, i: int, j: int) -> float:
        """Bilinear form sum of d (du/dx)(dv/dx) over faces at node (i, j).

        For Dirichlet data this equals -<A u, v> exactly; for Robin it is
        the interior part (boundary fluxes enter separately).
        """
        faces, cross = self.face_coeffs(i, j)
        dirichlet = isinstance(self.bc, DirichletBC)
        total = _face_form(self.grid, u, v, faces, dirichlet)
        if cross is not None:
            total += _corner_form(self.grid, u, v, cross)
        return total


def _is_diagonal(d: DiffusionSpec, grid: Grid) -> bool:
    probe = np.stack([0.37 * np.asarray(grid.extents), 0.61 * np.asarray(grid.extents)])
    tensor = eval_diffusion(d, 0.31 * grid.t_final, 0.47 * grid.a_max, probe)
    off = tensor[..., 0, 1]
    return not np.any(off)


def _face_points(grid: Grid) -> list[np.ndarray]:
    """Coordinates of face centers, one array of shape (*faces, dim) per axis."""
    n, dim = grid.n_x, grid.dim
    out = []
    for axis in range(dim):
        coords = []
        for ax in range(dim):
            if ax == axis:
                coords.append(np.arange(n + 1) * grid.dx[ax])
            else:
                coords.append(grid.centers[ax])
        mesh = np.meshgrid(*coords, indexing="ij")
        out.append(np.stack(mesh, axis=-1))
    return out


def _corner_points(grid: Grid) -> np.ndarray:
    n = grid.n_x
    coords = [np.arange(n + 1) * grid.dx[ax] for ax in range(2)]
    mesh = np.meshgrid(*coords, indexing="ij")
    return np.stack(mesh, axis=-1)


def _face_deltas(grid: Grid, u: np.ndarray, axis: int, dirichlet: bool) -> np.ndarray:
    """Differences across faces along one axis; ghost faces per Dirichlet."""
    n = grid.n_x
    shape = list(u.shape)
    shape[axis] = n + 1
    delta = np.zeros(shape)
    inner = [slice(None)] * u.ndim
    lo = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    inner[axis] = slice(1, n)
    delta[tuple(inner)] = np.diff(u, axis=axis)
    if dirichlet:
        lo[axis] = slice(0, 1)
        hi[axis] = slice(n, n + 1)
        first = [slice(None)] * u.ndim
        last = [slice(None)] * u.ndim
        first[axis] = slice(0, 1)
        last[axis] = slice(n - 1, n)
        delta[tuple(lo)] = 2.0 * u[tuple(first)]
        delta[tuple(hi)] = -2.0 * u[tuple(last)]
    return delta


def _diag_divergence(grid: Grid, u: np.ndarray, faces, dirichlet: bool) -> np.ndarray:
    out = np.zeros_like(u)
    for axis in range(grid.dim):
        delta = _face_deltas(grid, u, axis, dirichlet)
        flux = faces[axis] * delta / grid.dx[axis]
        out += np.diff(flux, axis=axis) / grid.dx[axis]
    return out


def _subtract_boundary_flux(grid: Grid, out: np.ndarray, g: np.ndarray) -> None:
    flat = out.reshape(-1)
    np.subtract.at(flat, grid.boundary_cells, g * grid.boundary_area / grid.cell_volume)


def _face_form(grid: Grid, u: np.ndarray, v: np.ndarray, faces, dirichlet: bool) -> float:
    total = 0.0
    for axis in range(grid.dim):
        du = _face_deltas(grid, u, axis, dirichlet)
        dv = du if v is u else _face_deltas(grid, v, axis, dirichlet)
        w = np.ones(grid.n_x + 1)
        if dirichlet:
            w[0] = w[-1] = 0.5  # half-weighted ghost faces close the parts formula
        else:
            w[0] = w[-1] = 0.0
        shape = [1] * u.ndim
        shape[axis] = grid.n_x + 1
        contrib = faces[axis] * du * dv * w.reshape(shape)
        total += float(np.sum(contrib)) * grid.cell_volume / grid.dx[axis] ** 2
    return total


def _extend_odd(u: np.ndarray) -> np.ndarray:
    """Odd (Dirichlet) ghost ring around a 2D slice."""
    n0, n1 = u.shape
    ext = np.zeros((n0 + 2, n1 + 2))
    ext[1:-1, 1:-1] = u
    ext[0, :] = -ext[1, :]
    ext[-1, :] = -ext[-2, :]
    ext[:, 0] = -ext[:, 1]
    ext[:, -1] = -ext[:, -2]
    return ext


def _fold_odd(ext: np.ndarray) -> np.ndarray:
    """Adjoint of the odd extension: fold ghost contributions back."""
    ext = ext.copy()
    ext[:, 1] -= ext[:, 0]
    ext[:, -2] -= ext[:, -1]
    ext[1, 1:-1] -= ext[0, 1:-1]
    ext[-2, 1:-1] -= ext[-1, 1:-1]
    return ext[1:-1, 1:-1]


def _corner_gradients(grid: Grid, ext: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g0 = (ext[1:, :-1] - ext[:-1, :-1] + ext[1:, 1:] - ext[:-1, 1:]) / (2 * grid.dx[0])
    g1 = (ext[:-1, 1:] - ext[:-1, :-1] + ext[1:, 1:] - ext[1:, :-1]) / (2 * grid.dx[1])
    return g0, g1


def _corner_weights(n: int) -> np.ndarray:
    w = np.ones((n + 1, n + 1))
    w[0, :] *= 0.5
    w[-1, :] *= 0.5
    w[:, 0] *= 0.5
    w[:, -1] *= 0.5
    return w


def _corner_form(grid: Grid, u: np.ndarray, v: np.ndarray, cross: np.ndarray) -> float:
    eu = _extend_odd(u)
    ev = eu if v is u else _extend_odd(v)
    gu0, gu1 = _corner_gradients(grid, eu)
    gv0, gv1 = _corner_gradients(grid, ev)
    w = _corner_weights(grid.n_x)
    return float(np.sum(w * cross * (gu0 * gv1 + gu1 * gv0))) * grid.cell_volume


def _cross_divergence(grid: Grid, u: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Variational derivative of the corner cross form (times -1/volume)."""
    ext = _extend_odd(u)
    g0, g1 = _corner_gradients(grid, ext)
    w = _corner_weights(grid.n_x)
    p = w * cross * g1  # pairs with the axis-0 gradient of the test slice
    q = w * cross * g0
    acc = np.zeros((grid.n_x + 2, grid.n_x + 2))
    s0 = p / (2 * grid.dx[0])
    acc[1:, :-1] += s0
    acc[1:, 1:] += s0
    acc[:-1, :-1] -= s0
    acc[:-1, 1:] -= s0
    s1 = q / (2 * grid.dx[1])
    acc[:-1, 1:] += s1
    acc[1:, 1:] += s1
    acc[:-1, :-1] -= s1
    acc[1:, :-1] -= s1
    return -_fold_odd(acc)


def apply_A(f: Field, d: DiffusionSpec, bc: BC) -> Field:
    """Apply the diffusion operator at every (t, a) node."""
    ws = OperatorWorkspace(f.grid, d, bc)
    return apply_A_with(ws, f)


def apply_A_with(ws: OperatorWorkspace, f: Field) -> Field:
    g = f.grid
    out = np.empty_like(f.values)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            out[i, j] = ws.apply_slice(f.values[i, j], i, j)
    return Field(g, out, TraceFlags())


def apply_transport(f: Field, stencil: Literal["forward", "centered"] = "forward") -> Field:
    """Diagonal difference along characteristics; zero where undefined.

    Forward uses nodes (i, j) -> (i+1, j+1); centered averages the two
    diagonal neighbors.  Values at nodes lacking the needed neighbors are
    set to zero — callers integrate against data vanishing there.
    """
    g = f.grid
    v = f.values
    out = np.zeros_like(v)
    if stencil == "forward":
        out[:-1, :-1] = (v[1:, 1:] - v[:-1, :-1]) / g.step
    elif stencil == "centered":
        out[1:-1, 1:-1] = (v[2:, 2:] - v[:-2, :-2]) / (2.0 * g.step)
    else:
        raise ValueError(f"unknown stencil {stencil!r}")
    return Field(g, out, TraceFlags())


def gradient(f: Field, bc: BC | None = None) -> np.ndarray:
    """Cell-averaged face-difference gradient, shape node_shape + (dim,) + cells.

    With Dirichlet ghosts a constant slice shows a large boundary-layer
    gradient in the cells next to the wall; that is the honest picture of
    the ghost convention, not an artifact to be smoothed away.
    """
    g = f.grid
    dirichlet = bc is None or isinstance(bc, DirichletBC)
    out = np.empty(g.node_shape + (g.dim,) + g.spatial_shape)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            u = f.values[i, j]
            for axis in range(g.dim):
                delta = _face_deltas(g, u, axis, dirichlet)
                lo = [slice(None)] * u.ndim
                hi = [slice(None)] * u.ndim
                lo[axis] = slice(0, g.n_x)
                hi[axis] = slice(1, g.n_x + 1)
                out[i, j, axis] = 0.5 * (delta[tuple(lo)] + delta[tuple(hi)]) / g.dx[axis]
    return out


def grad_norm_sq_profile(f: Field, bc: BC) -> np.ndarray:
    """Per-(t, a)-node squared gradient seminorm from face differences.

    Dirichlet includes the half-weighted ghost faces (matching the parts
    formula); Robin counts interior faces only.
    """
    g = f.grid
    dirichlet = isinstance(bc, DirichletBC)
    out = np.zeros(g.node_shape)
    w = np.ones(g.n_x + 1)
    if dirichlet:
        w[0] = w[-1] = 0.5
    else:
        w[0] = w[-1] = 0.0
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            u = f.values[i, j]
            total = 0.0
            for axis in range(g.dim):
                delta = _face_deltas(g, u, axis, dirichlet)
                shape = [1] * u.ndim
                shape[axis] = g.n_x + 1
                total += float(np.sum(delta * delta * w.reshape(shape))) / g.dx[axis] ** 2
            out[i, j] = total * g.cell_volume
    return out


def boundary_flux_gap(
    f: Field, d: DiffusionSpec, g_flux: BoundaryField
) -> float:
    """Worst gap between -d grad(f).n (one-sided interior) and prescribed flux.

    The interior difference sits half a cell from the wall, so the gap is
    O(dx) even for consistent data; callers compare against a step-scaled
    tolerance.
    """
    g = f.grid
    worst = 0.0
    inward = _inward_neighbors(g)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            u = f.values[i, j].reshape(-1)
            t, a = g.t_nodes[i], g.a_nodes[j]
            bpts = _boundary_face_points(g)
            tensor = eval_diffusion(d, t, a, bpts)
            dnn = tensor[np.arange(g.n_boundary_faces), g.boundary_axis, g.boundary_axis]
            # boundary cell sits nearer the wall than its inward neighbor on
            # every side, so this difference is already outward oriented
            du = u[g.boundary_cells] - u[inward]
            flux = -dnn * du / np.asarray(g.dx)[g.boundary_axis]
            worst = max(worst, float(np.max(np.abs(flux - g_flux.values[i, j]))))
    return worst


def boundary_curvature_scale(f: Field, d: DiffusionSpec) -> float:
    """Leading consistency error of the one-sided flux: max d |delta2 u| / dx.

    The one-sided difference reads the gradient half a cell inside the
    wall, so it is off by d * dx * u'' at first order; this returns the
    discrete estimate of that term for tolerance construction.
    """
    g = f.grid
    inward = _inward_neighbors(g)
    offs = inward - g.boundary_cells
    inward2 = inward + offs
    dx_b = np.asarray(g.dx)[g.boundary_axis]
    worst = 0.0
    bpts = _boundary_face_points(g)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            u = f.values[i, j].reshape(-1)
            tensor = eval_diffusion(d, g.t_nodes[i], g.a_nodes[j], bpts)
            dnn = tensor[np.arange(g.n_boundary_faces), g.boundary_axis, g.boundary_axis]
            delta2 = u[g.boundary_cells] - 2.0 * u[inward] + u[inward2]
            worst = max(worst, float(np.max(dnn * np.abs(delta2) / dx_b)))
    return worst


def _inward_neighbors(grid: Grid) -> np.ndarray:
    stride = np.ones(grid.dim, dtype=np.intp)
    if grid.dim == 2:
        stride = np.array([grid.n_x, 1], dtype=np.intp)
    offs = np.where(grid.boundary_side == 1, -stride[grid.boundary_axis], stride[grid.boundary_axis])
    return grid.boundary_cells + offs


def _boundary_face_points(grid: Grid) -> np.ndarray:
    pts = np.empty((grid.n_boundary_faces, grid.dim))
    if grid.dim == 1:
        pts[:, 0] = np.where(grid.boundary_side == 1, grid.extents[0], 0.0)
    else:
        along = grid.boundary_cells  # flat index; recover per-axis centers
        i0, i1 = np.divmod(along, grid.n_x)
        centers = (np.stack([grid.centers[0][i0], grid.centers[1][i1]], axis=1)).copy()
        wall = np.where(grid.boundary_side == 1, np.asarray(grid.extents)[grid.boundary_axis], 0.0)
        centers[np.arange(grid.n_boundary_faces), grid.boundary_axis] = wall
        pts[:] = centers
    return pts


@dataclass(frozen=True)
class IdentityReport:
    """Two-sided identity check with a scale-guarded relative residual."""

    lhs: float
    rhs: float
    residual: float


def _require_zero_trace(z: Field) -> None:
    fl = z.flags
    if not (fl.zero_t_ends and fl.zero_a_ends and fl.zero_spatial_boundary):
        raise TraceFlagMissing(
            "identity checks need zero time-age end slices and zero spatial trace"
        )


def check_green_identity(z: Field, d: DiffusionSpec) -> IdentityReport:
    """Drift-diffusion pairing against the coefficient-drift gradient form.

    Checks that -2 <dz/ds, A z> over the cylinder equals minus the gradient
    form weighted by the diagonal drift of the face diffusivities.  For a
    tensor constant in (t, a) both sides telescope to zero exactly; for
    drifting tensors the residual shrinks with the step.
    """
    _require_zero_trace(z)
    g = z.grid
    ws = OperatorWorkspace(g, d, DirichletBC())
    dz = apply_transport(z, "centered")
    wta = g.ta_weights()

    lhs_acc = 0.0
    cs_acc = 0.0
    rhs_acc = 0.0
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            az = ws.apply_slice(z.values[i, j], i, j)
            t_term = dz.values[i, j]
            lhs_acc += wta[i, j] * float(np.sum(t_term * az))
            cs_acc += wta[i, j] * float(
                np.sqrt(np.sum(t_term * t_term)) * np.sqrt(np.sum(az * az))
            )
            if 1 <= i <= g.n_t - 1 and 1 <= j <= g.n_a - 1:
                fwd, cross_f = ws.face_coeffs(i + 1, j + 1)
                bwd, cross_b = ws.face_coeffs(i - 1, j - 1)
                drift_faces = tuple(
                    (ff - fb) / (2.0 * g.step) for ff, fb in zip(fwd, bwd)
                )
                rhs_term = _face_form(g, z.values[i, j], z.values[i, j], drift_faces, True)
                if cross_f is not None or cross_b is not None:
                    cf = cross_f if cross_f is not None else np.zeros_like(cross_b)
                    cb = cross_b if cross_b is not None else np.zeros_like(cross_f)
                    rhs_term += _corner_form(
                        g, z.values[i, j], z.values[i, j], (cf - cb) / (2.0 * g.step)
                    )
                rhs_acc += wta[i, j] * rhs_term
    scale = g.cell_volume * g.step * g.step
    lhs = -2.0 * lhs_acc * scale
    rhs = -rhs_acc * g.step * g.step
    guard = 2.0 * cs_acc * scale + 1e-300
    residual = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + guard)
    return IdentityReport(lhs=lhs, rhs=rhs, residual=residual)


def check_transport_identity(z: Field, w) -> IdentityReport:
    """Pairing of the drift against the signed reciprocal weight.

    With the weight ramp lam(t, a) strictly negative and drifting at rate
    2, the pairing (4m/k) <z / lam, dz/ds> equals (4m/k) ||z / lam||^2 for
    fields vanishing on the time-age end slices.  ``w`` provides m, k, eta.
    """
    _require_zero_trace(z)
    g = z.grid
    lam = lambda_ramp(g, w.eta)
    dz = apply_transport(z, "centered")
    wta = g.ta_weights()
    inv = 1.0 / lam
    space_pair = np.sum(z.values * dz.values, axis=tuple(range(2, z.values.ndim)))
    space_sq = np.sum(z.values * z.values, axis=tuple(range(2, z.values.ndim)))
    space_abs = np.sum(np.abs(z.values * dz.values), axis=tuple(range(2, z.values.ndim)))
    factor = 4.0 * w.m / w.k
    vol = g.cell_volume * g.step * g.step
    lhs = factor * float(np.sum(wta * inv * space_pair)) * vol
    rhs = factor * float(np.sum(wta * inv * inv * space_sq)) * vol
    guard = factor * float(np.sum(wta * np.abs(inv) * space_abs)) * vol + 1e-300
    residual = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + guard)
    return IdentityReport(lhs=lhs, rhs=rhs, residual=residual)
