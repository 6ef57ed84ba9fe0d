import numpy as np
import pytest

from agepde.errors import TraceFlagMissing
from agepde.grid import BoundaryField, Field, TraceFlags, build_grid, lambda_ramp
from agepde.model import DiffusionSpec, isotropic_diffusion, sin_drift_diffusion
from agepde.operators import (
    DirichletBC,
    OperatorWorkspace,
    RobinBC,
    apply_A,
    apply_transport,
    boundary_curvature_scale,
    boundary_flux_gap,
    check_green_identity,
    check_transport_identity,
    grad_norm_sq_profile,
    gradient,
)
from agepde.carleman.weights import WeightSpec


def const_tensor(matrix):
    m = np.asarray(matrix, dtype=float)
    dim = m.shape[0]
    eigs = np.linalg.eigvalsh(m)
    return DiffusionSpec(
        evaluate=lambda t, a, x: np.broadcast_to(m, x.shape[:-1] + (dim, dim)),
        dim=dim,
        c_lower=float(eigs[0]),
        c_upper=float(eigs[-1]),
        m_bar=0.0,
        constant_in_ta=True,
    )


def smooth_zero_trace_field(n_char, n_x):
    # t(T-t) a(A-a) sin(pi x): vanishes exactly on all four end slices
    g = build_grid(0.5, 0.5, [1.0], n_x, n_char=n_char)
    t = g.t_nodes[:, None, None]
    a = g.a_nodes[None, :, None]
    x = g.centers[0][None, None, :]
    vals = t * (0.5 - t) * a * (0.5 - a) * np.sin(np.pi * x) * 64.0
    return Field(g, vals, TraceFlags(True, True, True))


def test_parts_formula_exact_dirichlet_1d():
    g = build_grid(0.25, 0.25, [1.0], 8, n_char=2)
    ws = OperatorWorkspace(g, isotropic_diffusion(1.0, 1), DirichletBC())
    rng = np.random.default_rng(1)
    u = rng.normal(size=8)
    v = rng.normal(size=8)
    pairing = float(np.sum(ws.apply_slice(u, 0, 0) * v)) * g.cell_volume
    energy = ws.energy_slice(u, v, 0, 0)
    assert abs(pairing + energy) <= 1e-12 * (abs(pairing) + abs(energy))


def test_parts_formula_exact_dirichlet_2d_cross():
    g = build_grid(0.25, 0.25, [1.0, 1.0], 6, n_char=2)
    d = const_tensor([[1.0, 0.3], [0.3, 1.0]])
    ws = OperatorWorkspace(g, d, DirichletBC())
    rng = np.random.default_rng(2)
    u = rng.normal(size=(6, 6))
    v = rng.normal(size=(6, 6))
    pairing = float(np.sum(ws.apply_slice(u, 0, 0) * v)) * g.cell_volume
    energy = ws.energy_slice(u, v, 0, 0)
    assert abs(pairing + energy) <= 1e-12 * (abs(pairing) + abs(energy))


def test_apply_A_symmetric_with_cross_terms():
    g = build_grid(0.25, 0.25, [1.0, 1.0], 6, n_char=2)
    ws = OperatorWorkspace(g, const_tensor([[1.0, 0.3], [0.3, 1.0]]), DirichletBC())
    rng = np.random.default_rng(3)
    u = rng.normal(size=(6, 6))
    v = rng.normal(size=(6, 6))
    uv = float(np.sum(ws.apply_slice(u, 0, 0) * v))
    vu = float(np.sum(u * ws.apply_slice(v, 0, 0)))
    assert abs(uv - vu) <= 1e-12 * (abs(uv) + abs(vu))


@pytest.mark.parametrize("dim", [1, 2])
def test_apply_A_negative_semidefinite(dim):
    extents = [1.0] * dim
    g = build_grid(0.25, 0.25, extents, 6, n_char=2)
    if dim == 2:
        d = const_tensor([[1.0, 0.3], [0.3, 1.0]])
    else:
        d = isotropic_diffusion(0.8, 1)
    ws = OperatorWorkspace(g, d, DirichletBC())
    rng = np.random.default_rng(4)
    for _ in range(20):
        u = rng.normal(size=g.spatial_shape)
        assert float(np.sum(ws.apply_slice(u, 0, 0) * u)) <= 1e-12


def test_apply_A_matches_sine_eigenfunction():
    errs = []
    for n in (32, 128):
        g = build_grid(0.25, 0.25, [1.0], n, n_char=2)
        x = g.centers[0]
        f = Field(g, np.broadcast_to(np.sin(np.pi * x), g.node_shape + (n,)).copy())
        out = apply_A(f, isotropic_diffusion(1.0, 1), DirichletBC())
        errs.append(np.max(np.abs(out.values[0, 0] + np.pi**2 * np.sin(np.pi * x))))
    assert errs[0] <= 1e-2
    assert errs[1] <= errs[0] / 12.0  # second order: 4x refinement -> ~16x


def test_robin_zero_flux_annihilates_constants():
    g = build_grid(0.25, 0.25, [1.0], 8, n_char=2)
    flux = BoundaryField(g, np.zeros(g.node_shape + (g.n_boundary_faces,)))
    f = Field(g, np.full(g.node_shape + (8,), 3.0))
    out = apply_A(f, isotropic_diffusion(1.0, 1), RobinBC(flux=flux))
    assert np.max(np.abs(out.values)) == 0.0


def test_robin_with_cross_diffusion_unsupported():
    g = build_grid(0.25, 0.25, [1.0, 1.0], 6, n_char=2)
    flux = BoundaryField(g, np.zeros(g.node_shape + (g.n_boundary_faces,)))
    with pytest.raises(NotImplementedError):
        OperatorWorkspace(g, const_tensor([[1.0, 0.3], [0.3, 1.0]]), RobinBC(flux=flux))


def test_robin_bc_requires_exactly_one_route():
    g = build_grid(0.25, 0.25, [1.0], 4, n_char=2)
    with pytest.raises(ValueError):
        RobinBC()


def test_transport_kills_characteristic_patterns():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=8)
    t = g.t_nodes[:, None, None]
    a = g.a_nodes[None, :, None]
    f = Field(g, np.broadcast_to(np.exp(t - a), (g.n_t + 1, g.n_a + 1, 4)).copy())
    out = apply_transport(f, "forward")
    assert np.max(np.abs(out.values)) == 0.0


def test_transport_forward_of_ramp_is_exactly_two():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=8)
    lam = lambda_ramp(g, 0.05)
    f = Field(g, np.broadcast_to(lam[:, :, None], g.node_shape + (4,)).copy())
    out = apply_transport(f, "forward")
    assert np.all(out.values[:-1, :-1] == 2.0)
    assert np.all(out.values[-1] == 0.0)
    assert np.all(out.values[:, -1] == 0.0)


def test_transport_centered_rate_on_smooth_field():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=8)
    t = g.t_nodes[:, None, None]
    a = g.a_nodes[None, :, None]
    f = Field(g, np.broadcast_to(t + 3.0 * a, (g.n_t + 1, g.n_a + 1, 4)).copy())
    out = apply_transport(f, "centered")
    np.testing.assert_allclose(out.values[1:-1, 1:-1], 4.0, rtol=1e-13)


def test_transport_rejects_unknown_stencil():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=4)
    f = Field(g, np.zeros(g.node_shape + (4,)))
    with pytest.raises(ValueError):
        apply_transport(f, "upwind")


def test_green_identity_constant_tensor_near_machine():
    z = smooth_zero_trace_field(16, 32)
    rep = check_green_identity(z, isotropic_diffusion(1.0, 1))
    assert rep.residual <= 1e-12


def test_green_identity_drift_residual_shrinks():
    d = sin_drift_diffusion(1, 1.0, 0.1)
    coarse = check_green_identity(smooth_zero_trace_field(8, 16), d)
    fine = check_green_identity(smooth_zero_trace_field(16, 32), d)
    assert fine.residual <= 1e-2
    # halving the step should shrink the residual at first order or better
    assert coarse.residual / fine.residual >= 1.87


def test_transport_identity_residual_shrinks():
    w = WeightSpec(m=8, k=1.0, eta=0.05)
    coarse = check_transport_identity(smooth_zero_trace_field(8, 16), w)
    fine = check_transport_identity(smooth_zero_trace_field(16, 32), w)
    assert fine.residual <= 2e-2
    assert coarse.residual / fine.residual >= 1.87


def test_identity_checks_need_trace_flags():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=4)
    f = Field(g, np.zeros(g.node_shape + (4,)))
    with pytest.raises(TraceFlagMissing):
        check_green_identity(f, isotropic_diffusion(1.0, 1))
    with pytest.raises(TraceFlagMissing):
        check_transport_identity(f, WeightSpec(m=8, k=1.0, eta=0.05))


def test_boundary_flux_gap_outward_orientation():
    # u = x has zero curvature, so the one-sided read is exact: the
    # outward-normal flux -d du/dn is +1 at the left wall, -1 at the right
    g = build_grid(0.25, 0.25, [1.0], 8, n_char=2)
    d = isotropic_diffusion(1.0, 1)
    f = Field(g, np.broadcast_to(g.centers[0], g.node_shape + (8,)).copy())
    outward = np.where(g.boundary_side == 1, -1.0, 1.0)
    table = BoundaryField(
        g, np.broadcast_to(outward, g.node_shape + (g.n_boundary_faces,)).copy()
    )
    assert boundary_flux_gap(f, d, table) == 0.0
    flipped = BoundaryField(
        g, np.broadcast_to(-outward, g.node_shape + (g.n_boundary_faces,)).copy()
    )
    assert boundary_flux_gap(f, d, flipped) == 2.0


def test_boundary_curvature_scale_quadratic_oracle():
    # second difference of x^2 is exactly 2 dx^2, so the scale is 2 d dx
    g = build_grid(0.25, 0.25, [1.0], 8, n_char=2)
    x = g.centers[0]
    f = Field(g, np.broadcast_to(x * x, g.node_shape + (8,)).copy())
    assert boundary_curvature_scale(f, isotropic_diffusion(1.0, 1)) == 0.25


def test_grad_norm_sq_profile_linear_field():
    g = build_grid(0.25, 0.25, [1.0], 8, n_char=2)
    f = Field(g, np.broadcast_to(g.centers[0], g.node_shape + (8,)).copy())
    flux = BoundaryField(g, np.zeros(g.node_shape + (g.n_boundary_faces,)))
    robin = grad_norm_sq_profile(f, RobinBC(flux=flux))
    # interior faces only: 7 unit-slope faces of cell volume 1/8
    np.testing.assert_allclose(robin, 7.0 * g.cell_volume, rtol=1e-13)
    dirichlet = grad_norm_sq_profile(f, DirichletBC())
    # ghost faces see the jump to zero wall data: 1/8 * (0.5*1 + 7 + 0.5*15^2)
    np.testing.assert_allclose(dirichlet, 15.0, rtol=1e-13)


def test_gradient_shape_and_interior_slope():
    g = build_grid(0.25, 0.25, [1.0], 16, n_char=2)
    f = Field(g, np.broadcast_to(g.centers[0], g.node_shape + (16,)).copy())
    grad = gradient(f, RobinBC(flux=BoundaryField(g, np.zeros(g.node_shape + (g.n_boundary_faces,)))))
    assert grad.shape == g.node_shape + (1,) + g.spatial_shape
    np.testing.assert_allclose(grad[0, 0, 0, 1:-1], 1.0, rtol=1e-13)
