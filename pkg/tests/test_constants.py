import math
from fractions import Fraction

import numpy as np
import pytest

from agepde.carleman.constants import (
    compute_constants_dirichlet,
    compute_constants_robin,
    horizon_choice,
)

ZERO_TRACE_PARAMS = {
    "c_lower": 1.0,
    "m_upper": 0.0,
    "k": 1.0,
    "m0": 8.0,
    "mu0": 0.2,
    "eta0": 0.05,
    "alpha": 1.0,
    "l_f": 1.0,
}

FLUX_PARAMS = {
    "c_lower": 1.0,
    "m_upper": 0.0,
    "m_flux": 0.5,
    "c0": 2.0,
    "k": 1.0,
    "m0": 16.0,
    "mu0": 0.1,
    "eta0": 0.05,
    "alpha": 1.0,
    "l_f": 1.0,
}


def test_zero_trace_reference_values():
    c = compute_constants_dirichlet(ZERO_TRACE_PARAMS)
    assert c.grad_coeff_ref == 0.34375
    assert c.energy_coeff == 0.203125
    # m defaults to m0, so both gradient coefficients coincide
    assert c.grad_coeff == c.grad_coeff_ref


def test_zero_trace_values_reproduce_through_other_factoring():
    # same rationals, summed term by term instead of factored: the exact
    # arithmetic contract says the float results agree bitwise
    c = compute_constants_dirichlet(ZERO_TRACE_PARAMS)
    h = Fraction("0.2") + Fraction("0.05")
    c2_alt = Fraction(1, 4 * 8) + h + h * h
    assert float(c2_alt) == c.grad_coeff_ref
    energy_alt = Fraction(1, 4 * 8) / 1 + c2_alt / 2
    assert float(energy_alt) == c.energy_coeff


def test_zero_trace_source_bound_holds_for_unit_lipschitz():
    c = compute_constants_dirichlet(ZERO_TRACE_PARAMS)
    assert c.source_bound.ok
    assert c.source_bound.slack == 0.25 - 0.203125
    tight = compute_constants_dirichlet(dict(ZERO_TRACE_PARAMS, l_f=2.0))
    assert not tight.source_bound.ok


def test_zero_trace_ellipticity_with_drifting_coefficients():
    c = compute_constants_dirichlet(dict(ZERO_TRACE_PARAMS, c_lower=0.9, m_upper=0.2))
    assert c.ellipticity_margin.ok
    assert c.ellipticity_margin.slack == 0.84375


def test_flux_reference_values():
    c = compute_constants_robin(FLUX_PARAMS)
    assert c.field_coeff_ref == 63.954375
    assert c.dual_coeff_ref == 5.3
    assert c.energy_coeff == 5.3194171626257
    assert c.field_coeff_positive.ok
    assert c.ellipticity_margin.ok
    assert c.absorption_half.ok
    # the energy coefficient dwarfs the cap 1/(8 alpha l_f^2) here
    assert not c.source_bound.ok


def test_flux_values_reproduce_through_other_factoring():
    c = compute_constants_robin(FLUX_PARAMS)
    h = Fraction("0.1") + Fraction("0.05")
    k3_alt = Fraction(64) - 2 * Fraction("0.5") * 2 * h * h - Fraction("0.05") ** 2 / 4
    k4_alt = Fraction(1, 2) + 32 * h
    assert float(k3_alt) == c.field_coeff_ref
    assert float(k4_alt) == c.dual_coeff_ref
    ratio = k4_alt / k3_alt
    c4_alt = 2 * max(ratio + h * h / 2, 16 * ratio * 2)
    assert float(1 / k3_alt + c4_alt) == c.energy_coeff


def test_flux_degenerate_field_coefficient_disables_everything():
    c = compute_constants_robin(dict(FLUX_PARAMS, m0=1.0, m_flux=20.0, mu0=1.0))
    assert not c.field_coeff_positive.ok
    assert c.field_coeff_positive.slack < 0.0
    assert c.energy_coeff is None
    assert c.grad_coeff is None
    assert c.grad_coeff_ref is None
    assert not c.ellipticity_margin.ok
    assert not c.absorption_half.ok
    assert not c.source_bound.ok


def test_horizon_choice_closed_form():
    got = horizon_choice(0.5, 8.0, 1.0, 0.05)
    assert got == 0.05 ** (8.0 / 9.0) * 2.0 ** (1.0 / 18.0) - 0.05
    assert got == 0.02248577412429456


def test_horizon_choice_linear_exponent():
    # exponent 1 drops the eta factor entirely: sqrt(2) - eta
    got = horizon_choice(1.0, 8.0, 1.0, 0.05)
    np.testing.assert_allclose(got, math.sqrt(2.0) - 0.05, rtol=1e-15)


def test_horizon_choice_caps_eta_at_one():
    assert horizon_choice(1.0, 8.0, 1.0, 7.0) == horizon_choice(1.0, 8.0, 1.0, 1.0)


def test_horizon_choice_rejects_bad_exponent():
    with pytest.raises(ValueError):
        horizon_choice(0.0, 8.0, 1.0, 0.05)
    with pytest.raises(ValueError):
        horizon_choice(1.5, 8.0, 1.0, 0.05)


def test_flux_sublinear_surface_tightens_the_horizon():
    c = compute_constants_robin(dict(FLUX_PARAMS, beta=0.5, l_s=1.0))
    expected = min(
        horizon_choice(1.0, 16.0, 1.0, 0.05), horizon_choice(0.5, 16.0, 1.0, 0.05)
    )
    assert c.max_horizon == expected


def test_reports_carry_their_inputs():
    c = compute_constants_dirichlet(ZERO_TRACE_PARAMS)
    assert c.params == ZERO_TRACE_PARAMS
    r = compute_constants_robin(FLUX_PARAMS)
    assert r.params == FLUX_PARAMS
