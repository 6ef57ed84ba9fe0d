import numpy as np
import pytest

from agepde.errors import MissingContext
from agepde.grid import Field, build_grid
from agepde.model import (
    SourceSpec,
    SurfaceSpec,
    age_space_integral,
    audit_assumptions,
    eval_diffusion,
    eval_source,
    eval_surface,
    isotropic_diffusion,
    sin_drift_diffusion,
)


def test_isotropic_diffusion_is_scaled_identity():
    d = isotropic_diffusion(0.7, 2)
    x = np.array([[0.3, 0.4], [0.9, 0.1]])
    out = eval_diffusion(d, 0.1, 0.2, x)
    assert out.shape == (2, 2, 2)
    np.testing.assert_array_equal(out[0], 0.7 * np.eye(2))
    assert d.c_lower == d.c_upper == 0.7
    assert d.m_bar == 0.0
    assert d.constant_in_ta


def test_sin_drift_diffusion_entries_and_bounds():
    d = sin_drift_diffusion(2, base=1.0, amplitude=0.1)
    x = np.zeros((1, 2))
    out = eval_diffusion(d, 0.3, 0.2, x)[0]
    assert out[0, 0] == 1.0 + 0.1 * np.sin(0.5)
    assert out[1, 1] == 1.0
    assert out[0, 1] == out[1, 0] == 0.0
    assert d.c_lower == 0.9
    assert d.c_upper == 1.1
    assert d.m_bar == pytest.approx(0.2)
    assert not d.constant_in_ta


def test_eval_diffusion_rejects_wrong_shape():
    from agepde.model import DiffusionSpec

    bad = DiffusionSpec(
        evaluate=lambda t, a, x: np.zeros(x.shape[:-1] + (3,)),
        dim=1,
        c_lower=1.0,
        c_upper=1.0,
        m_bar=0.0,
    )
    with pytest.raises(ValueError):
        eval_diffusion(bad, 0.0, 0.0, np.zeros((4, 1)))


def test_source_spec_validation():
    with pytest.raises(ValueError):
        SourceSpec("no_such_kind")
    with pytest.raises(ValueError):
        SourceSpec("zero", alpha=0.0)
    with pytest.raises(ValueError):
        SourceSpec("zero", alpha=1.5)


@pytest.mark.parametrize(
    "kind,params,u,expected",
    [
        ("zero", {}, 3.0, 0.0),
        ("linear_death", {"rate": 0.3}, 2.0, -0.6),
        ("logistic", {"r": 0.3, "cap": 5.0}, 2.0, 0.3 * 2.0 * (1.0 - 2.0 / 5.0)),
        ("von_bertalanffy", {"r": 1.0, "theta": 2.0}, 8.0, 2.0 * 4.0 - 8.0),
        ("arrhenius", {"a0": 0.1, "e_act": 2.0}, 4.0, 0.1 * np.exp(2.0)),
        ("holder_power", {"c": 2.0}, 4.0, -2.0 * 2.0),
    ],
)
def test_eval_source_pointwise_oracles(kind, params, u, expected):
    alpha = 0.5 if kind == "holder_power" else 1.0
    src = SourceSpec(kind, params, alpha=alpha)
    got = eval_source(src, 0.1, 0.2, np.array([0.5]), u)
    np.testing.assert_allclose(got, expected, rtol=1e-14, atol=1e-14)


def test_power_kinds_use_odd_extension():
    src = SourceSpec("holder_power", {"c": 1.0}, alpha=0.5)
    got = eval_source(src, 0.0, 0.0, np.array([0.5]), -4.0)
    # sign(-4)*|-4|^0.5 = -2, so F = -c * (-2) = +2
    np.testing.assert_allclose(got, 2.0, rtol=1e-14)
    vb = SourceSpec("von_bertalanffy", {"r": 1.0, "theta": 1.0})
    assert np.isfinite(eval_source(vb, 0.0, 0.0, np.array([0.5]), -1.0))


def test_eval_source_broadcasts_over_arrays():
    src = SourceSpec("linear_death", {"rate": 2.0})
    u = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(
        eval_source(src, 0.0, 0.0, np.zeros((2, 2, 1)), u), -2.0 * u
    )


def test_lotka_von_foerster_needs_context():
    src = SourceSpec("lotka_von_foerster")
    with pytest.raises(MissingContext):
        eval_source(src, 0.0, 0.0, np.array([0.5]), 1.0)


def test_lotka_von_foerster_uses_age_space_integral():
    g = build_grid(0.5, 0.5, [2.0], 8, n_char=4)
    ctx = Field(g, np.full(g.node_shape + g.spatial_shape, 3.0))
    src = SourceSpec("lotka_von_foerster")
    # integral of the constant 3 over age (0,0.5) and the interval (0,2)
    got = eval_source(src, 0.125, 0.0, np.array([0.5]), 2.0, context=ctx)
    np.testing.assert_allclose(got, -2.0 * 3.0 * 0.5 * 2.0, rtol=1e-14)


def test_age_space_integral_linear_profile_exact():
    g = build_grid(0.5, 0.5, [2.0], 8, n_char=4)
    vals = np.broadcast_to(
        g.a_nodes[None, :, None], (g.n_t + 1, g.n_a + 1, 8)
    ).copy()
    # trapezoid is exact on a profile linear in age
    assert age_space_integral(Field(g, vals), 0.125) == 0.25


def test_age_space_integral_rejects_off_node_time():
    g = build_grid(0.5, 0.5, [1.0], 4, n_char=4)
    f = Field(g, np.zeros(g.node_shape + g.spatial_shape))
    with pytest.raises(ValueError):
        age_space_integral(f, 0.1)


def test_surface_spec_validation():
    with pytest.raises(ValueError):
        SurfaceSpec("cubic")
    with pytest.raises(ValueError):
        SurfaceSpec("power", beta=0.0)


def test_eval_surface_oracles():
    assert eval_surface(SurfaceSpec("zero"), 5.0) == 0.0
    np.testing.assert_allclose(
        eval_surface(SurfaceSpec("linear", sigma=0.5), np.array([2.0, -4.0])),
        [1.0, -2.0],
    )
    got = eval_surface(SurfaceSpec("power", sigma=2.0, beta=0.5), -9.0)
    np.testing.assert_allclose(got, -6.0, rtol=1e-14)


def test_audit_passes_for_honest_declarations():
    d = isotropic_diffusion(0.7, 1)
    src = SourceSpec("holder_power", {"c": 1.0}, alpha=0.5, l_f=1.0)
    surf = SurfaceSpec("linear", sigma=0.5, l_s=0.5, m_bar=1.0)
    audit = audit_assumptions(d, src, surf)
    assert audit.all_passed
    assert audit.entry("ellipticity_floor").extremum == 0.7
    assert audit.entry("coefficient_drift").extremum == 0.0
    with pytest.raises(KeyError):
        audit.entry("no_such_entry")


def test_audit_flags_understated_holder_constant():
    d = isotropic_diffusion(0.7, 1)
    src = SourceSpec("holder_power", {"c": 1.0}, alpha=0.5, l_f=0.5)
    audit = audit_assumptions(d, src, SurfaceSpec("zero"))
    entry = audit.entry("source_holder")
    assert not entry.passed
    assert entry.extremum > 0.5
    assert not audit.all_passed


def test_audit_linear_death_ratio_is_rate():
    d = isotropic_diffusion(1.0, 1)
    src = SourceSpec("linear_death", {"rate": 0.3}, l_f=0.3)
    audit = audit_assumptions(d, src, SurfaceSpec("zero"))
    entry = audit.entry("source_holder")
    assert entry.passed
    np.testing.assert_allclose(entry.extremum, 0.3, rtol=1e-12)


def test_audit_flags_decreasing_surface_declared_monotone():
    d = isotropic_diffusion(1.0, 1)
    surf = SurfaceSpec("linear", sigma=-1.0, l_s=1.0, monotone=True)
    audit = audit_assumptions(d, SourceSpec("zero"), surf)
    assert not audit.entry("surface_monotone").passed


def test_audit_sin_drift_bounds_hold():
    d = sin_drift_diffusion(2, base=1.0, amplitude=0.1)
    audit = audit_assumptions(d, SourceSpec("zero"), SurfaceSpec("zero"))
    assert audit.all_passed
    assert audit.entry("coefficient_drift").extremum <= 0.2


def test_audit_is_deterministic_for_fixed_seed():
    d = isotropic_diffusion(0.7, 1)
    src = SourceSpec("holder_power", {"c": 1.0}, alpha=0.5, l_f=1.0)
    surf = SurfaceSpec("linear", sigma=0.5, l_s=0.5, m_bar=1.0)
    a = audit_assumptions(d, src, surf, seed=7)
    b = audit_assumptions(d, src, surf, seed=7)
    assert all(x.extremum == y.extremum for x, y in zip(a.entries, b.entries))
