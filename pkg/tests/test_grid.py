import numpy as np
import pytest

from agepde.errors import InvalidDimension, NonIntegerStepRatio, RectOffGrid
from agepde.grid import (
    Field,
    TraceFlags,
    build_grid,
    lambda_ramp,
    norm_q,
    rect_indices,
    restrict,
    ta_norm_sq,
)


def test_build_grid_basic_layout():
    g = build_grid(0.5, 0.25, [1.0], 8, step=0.125)
    assert g.step == 0.125
    assert g.n_t == 4
    assert g.n_a == 2
    assert g.node_shape == (5, 3)
    assert g.spatial_shape == (8,)
    np.testing.assert_allclose(g.t_nodes, [0.0, 0.125, 0.25, 0.375, 0.5])
    np.testing.assert_allclose(g.centers[0], (np.arange(8) + 0.5) / 8)
    assert g.cell_volume == 0.125
    assert g.domain_volume == 1.0


def test_build_grid_n_char_needs_equal_horizons():
    with pytest.raises(NonIntegerStepRatio):
        build_grid(0.5, 0.25, [1.0], 8, n_char=4)


def test_build_grid_step_keyword_matches_n_char():
    a = build_grid(0.5, 0.5, [1.0], 4, n_char=8)
    b = build_grid(0.5, 0.5, [1.0], 4, step=0.0625)
    assert a.step == b.step
    assert a.n_t == b.n_t


def test_build_grid_rejects_non_divisible_horizon():
    with pytest.raises(NonIntegerStepRatio):
        build_grid(0.5, 0.3, [1.0], 4, step=0.125)


def test_build_grid_rejects_dim_three():
    with pytest.raises(InvalidDimension):
        build_grid(1.0, 1.0, [1.0, 1.0, 1.0], 4, n_char=4)


def test_boundary_tables_1d():
    g = build_grid(1.0, 1.0, [2.0], 10, n_char=2)
    assert g.n_boundary_faces == 2
    assert g.boundary_measure == 2.0  # two endpoints, unit area each
    assert set(g.boundary_cells.tolist()) == {0, 9}


def test_boundary_tables_2d_measure():
    g = build_grid(1.0, 1.0, [2.0, 1.0], 8, n_char=2)
    assert g.n_boundary_faces == 4 * 8
    np.testing.assert_allclose(g.boundary_measure, 2 * (2.0 + 1.0))


def test_ta_weights_trapezoid_sum():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=5)
    w = g.ta_weights()
    # sum * step^2 is the measure of the (t, a) rectangle
    np.testing.assert_allclose(np.sum(w) * g.step**2, 1.0)


def test_norm_q_constant_field_is_cylinder_measure():
    g = build_grid(0.5, 1.0, [2.0], 6, step=0.125)
    f = Field(g, np.ones(g.node_shape + g.spatial_shape))
    np.testing.assert_allclose(norm_q(f), 0.5 * 1.0 * 2.0, rtol=1e-14)


def test_norm_q_separable_field_oracle():
    # squared norm of t * a over (0,1)^2 x (0,1); trapezoid applied to t^2
    # gives exactly 1/3 + h^2/6 per axis, so the oracle is that product
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=64)
    vals = np.broadcast_to(
        np.outer(g.t_nodes, g.a_nodes)[:, :, None], g.node_shape + g.spatial_shape
    )
    got = norm_q(Field(g, np.array(vals)))
    h = g.step
    np.testing.assert_allclose(got, (1.0 / 3.0 + h * h / 6.0) ** 2, rtol=1e-13)


def test_norm_q_rect_restriction():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    f = Field(g, np.ones(g.node_shape + g.spatial_shape))
    np.testing.assert_allclose(norm_q(f, rect=(0.25, 0.75, 0.0, 1.0)), 0.5, rtol=1e-14)


def test_norm_q_weight_is_squared():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=2)
    f = Field(g, np.ones(g.node_shape + g.spatial_shape))
    w = np.full(g.node_shape, 3.0)
    np.testing.assert_allclose(norm_q(f, weight=w), 9.0, rtol=1e-14)


def test_rect_indices_off_grid_rejected():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    with pytest.raises(RectOffGrid):
        rect_indices(g, (0.1, 0.75, 0.0, 1.0))


def test_restrict_zeroes_outside_rect():
    g = build_grid(1.0, 1.0, [1.0], 3, n_char=4)
    f = Field(g, np.random.default_rng(0).normal(size=g.node_shape + g.spatial_shape))
    sub = restrict(f, (0.25, 0.75, 0.25, 1.0))
    assert sub.values.shape == f.values.shape
    np.testing.assert_array_equal(sub.values[1:4, 1:5], f.values[1:4, 1:5])
    assert np.all(sub.values[0] == 0.0)
    assert np.all(sub.values[4] == 0.0)
    assert np.all(sub.values[:, 0] == 0.0)


def test_ta_norm_sq_matches_norm_on_spaceless_profile():
    g = build_grid(1.0, 1.0, [1.0], 5, n_char=8)
    rng = np.random.default_rng(3)
    prof = rng.normal(size=g.node_shape)
    f = Field(g, np.broadcast_to(prof[:, :, None], g.node_shape + (5,)).copy())
    np.testing.assert_allclose(
        ta_norm_sq(g, prof, (0.0, 1.0, 0.0, 1.0)), norm_q(f), rtol=1e-13
    )


def test_field_shape_validation():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    with pytest.raises(ValueError):
        Field(g, np.ones((2, 2, 4)))
    with pytest.raises(ValueError):
        Field(g, np.full(g.node_shape + g.spatial_shape, np.nan))


def test_field_trace_flags_enforced():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    vals = np.ones(g.node_shape + g.spatial_shape)
    with pytest.raises(ValueError):
        Field(g, vals, TraceFlags(zero_t_ends=True))
    vals[0] = 0.0
    vals[-1] = 0.0
    f = Field(g, vals, TraceFlags(zero_t_ends=True))
    assert f.flags.zero_t_ends


def test_field_values_frozen():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    f = Field(g, np.ones(g.node_shape + g.spatial_shape))
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 2.0


def test_lambda_ramp_range_and_sign():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    lam = lambda_ramp(g, 0.05)
    assert np.all(lam < 0.0)
    assert lam[0, 0] == -2.05
    np.testing.assert_allclose(lam[-1, -1], -0.05, atol=1e-15)


def test_lambda_ramp_raises_for_zero_eta():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=4)
    with pytest.raises(ValueError):
        lambda_ramp(g, 0.0)


def test_lambda_ramp_diagonal_difference_is_two_steps():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=8)
    lam = lambda_ramp(g, 0.0625)
    diff = lam[1:, 1:] - lam[:-1, :-1]
    assert np.all(diff == 2.0 * g.step)  # dyadic data, exact
