import numpy as np
import pytest

from agepde.carleman.weights import (
    CutoffSpec,
    WeightSpec,
    make_cutoff,
    smoothstep,
    weight_field,
)
from agepde.errors import BreakpointOffGrid
from agepde.grid import build_grid


@pytest.mark.parametrize("order", [2, 3, 4, 5])
def test_smoothstep_midpoint_is_half(order):
    assert smoothstep(0.5, order) == 0.5


def test_smoothstep_quintic_oracle_at_quarter():
    # 6 x^5 - 15 x^4 + 10 x^3 at x = 1/4, all dyadic arithmetic
    assert smoothstep(0.25, 2) == 0.103515625


def test_smoothstep_saturates_exactly():
    x = np.array([-3.0, -0.0, 0.0, 1.0, 2.5])
    np.testing.assert_array_equal(smoothstep(x, 2), [0.0, 0.0, 0.0, 1.0, 1.0])


def test_smoothstep_monotone():
    x = np.linspace(-0.2, 1.2, 400)
    for order in (2, 3, 4):
        assert np.all(np.diff(smoothstep(x, order)) >= 0.0)


def test_smoothstep_point_symmetry():
    x = np.linspace(0.0, 1.0, 97)
    for order in (2, 3, 5):
        np.testing.assert_allclose(
            smoothstep(x, order) + smoothstep(1.0 - x, order), 1.0, atol=1e-12
        )


def test_weight_spec_validation():
    with pytest.raises(ValueError):
        WeightSpec(m=0.5, k=1.0, eta=0.05)
    with pytest.raises(ValueError):
        WeightSpec(m=8.0, k=0.0, eta=0.05)
    with pytest.raises(ValueError):
        WeightSpec(m=8.0, k=1.0, eta=0.0)


def test_weight_field_far_corner_oracle():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    base, strong = weight_field(WeightSpec(m=8.0, k=1.0, eta=0.05), g)
    # distance at the (0, 0) node is T + a_max + eta = 2.05
    assert base[0, 0] == 2.05**-8
    assert base[0, 0] == 0.003206041292238641
    assert strong[0, 0] == base[0, 0] / 2.05


def test_weight_field_terminal_corner_oracle():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    base, strong = weight_field(WeightSpec(m=8.0, k=1.0, eta=0.05), g)
    # at (T, a_max) only eta is left; the ramp sum carries rounding noise
    np.testing.assert_allclose(base[-1, -1], 0.05**-8, rtol=1e-12)
    np.testing.assert_allclose(strong[-1, -1], 0.05**-9, rtol=1e-12)


def test_weight_field_increases_toward_terminal_corner():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    base, strong = weight_field(WeightSpec(m=3.0, k=2.0, eta=0.1), g)
    assert np.all(np.diff(base, axis=0) > 0.0)
    assert np.all(np.diff(base, axis=1) > 0.0)
    # the strengthened weight dominates once dist < 1, i.e. near the corner
    assert strong[-1, -1] > base[-1, -1]
    assert strong[0, 0] < base[0, 0]


def test_cutoff_spec_validation():
    with pytest.raises(ValueError):
        CutoffSpec(t1=0.25, t2=0.25, a1=0.0, a2=0.25)
    with pytest.raises(ValueError):
        CutoffSpec(t1=0.0, t2=0.25, a1=0.0, a2=0.25, t3=0.5)
    with pytest.raises(ValueError):
        CutoffSpec(t1=0.0, t2=0.25, a1=0.0, a2=0.25, t3=0.125, a3=0.5)
    with pytest.raises(ValueError):
        CutoffSpec(t1=0.0, t2=0.25, a1=0.0, a2=0.25, order=1)


def test_kappa_saturation_regions():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.125, t2=0.375, a1=0.125, a2=0.375)
    kappa = make_cutoff(cut, "kappa", g)
    assert kappa.shape == g.node_shape
    # identically zero at and below the lower breakpoints
    assert np.all(kappa[:2, :] == 0.0)
    assert np.all(kappa[:, :2] == 0.0)
    # identically one at and above the upper breakpoints
    assert np.all(kappa[3:, 3:] == 1.0)
    # strictly between in the transition band
    assert 0.0 < kappa[2, 3] < 1.0


def test_terminal_chi_mirrors_kappa():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.125, t2=0.375, a1=0.125, a2=0.375)
    chi = make_cutoff(cut, "terminal_chi", g)
    assert np.all(chi[:4, :4] == 1.0)
    assert np.all(chi[-1, :] == 0.0)
    assert np.all(chi[:, -1] == 0.0)


def test_terminal_chi_needs_room_before_the_end():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.5, t2=1.0, a1=0.125, a2=0.375)
    with pytest.raises(ValueError):
        make_cutoff(cut, "terminal_chi", g)


def test_cutoff_breakpoints_must_sit_on_nodes():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.1, t2=0.375, a1=0.125, a2=0.375)
    with pytest.raises(BreakpointOffGrid):
        make_cutoff(cut, "kappa", g)


def test_cutoff_unknown_kind():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.125, t2=0.375, a1=0.125, a2=0.375)
    with pytest.raises(ValueError):
        make_cutoff(cut, "plateau", g)


def test_kappa_bar_is_alias_of_kappa():
    g = build_grid(1.0, 1.0, [1.0], 4, n_char=8)
    cut = CutoffSpec(t1=0.125, t2=0.375, a1=0.125, a2=0.375)
    np.testing.assert_array_equal(
        make_cutoff(cut, "kappa", g), make_cutoff(cut, "kappa_bar", g)
    )
