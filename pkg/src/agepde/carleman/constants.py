"""Closed-form coefficient combinations behind the weighted estimates.

Every coefficient here is a rational function of the model constants, so
the arithmetic runs in exact rationals (inputs are snapped to the nearest
small-denominator rational within 1e-12, which recovers the decimal
parameters people actually type) and converts to float once at the end.
Re-deriving a value through any algebraically equivalent factoring then
reproduces it bitwise, which is the reproducibility contract the tests
pin down.

Naming: coefficients are named for their role, not their symbol.

* grad_coeff multiplies the gradient seminorm when lower-order terms are
  absorbed; grad_coeff_ref is its value at the reference exponent m0.
* field_coeff / dual_coeff (Robin) weight the zero-order field term and
  the boundary dual term; *_ref again at m0.
* energy_coeff converts the weighted defect norm into the energy bound.
* max_horizon is the largest T + a_max the small-horizon uniqueness
  argument tolerates for the given nonlinearity exponent.

Each side condition is reported as a Condition (boolean plus the
evaluated slack), never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "Condition",
    "DirichletConstants",
    "RobinConstants",
    "compute_constants_dirichlet",
    "compute_constants_robin",
    "horizon_choice",
]

_SNAP_DEN = 10**12


def _rat(x: float) -> Fraction:
    return Fraction(x).limit_denominator(_SNAP_DEN)


@dataclass(frozen=True)
class Condition:
    """A checked side condition: ok iff slack >= 0."""

    ok: bool
    slack: float


@dataclass(frozen=True)
class DirichletConstants:
    grad_coeff: float
    grad_coeff_ref: float
    energy_coeff: float
    ellipticity_margin: Condition
    source_bound: Condition
    max_horizon: float
    params: dict


@dataclass(frozen=True)
class RobinConstants:
    field_coeff: float
    dual_coeff: float
    field_coeff_ref: float
    dual_coeff_ref: float
    grad_coeff: float | None
    grad_coeff_ref: float | None
    energy_coeff: float | None
    field_coeff_positive: Condition
    ellipticity_margin: Condition
    absorption_half: Condition
    source_bound: Condition
    max_horizon: float
    params: dict


def horizon_choice(exponent: float, m: float, k: float, eta0: float) -> float:
    """Largest admissible horizon for a nonlinearity of the given exponent.

    With eta = min(1, eta0) and A = m(1/exponent - 1)/k the choice is
    eta^(A/(A+1)) * 2^(1/(2A+2)) - eta; it makes the weight-product
    expression checked elsewhere equal 2 exactly.
    """
    if not 0.0 < exponent <= 1.0:
        raise ValueError("exponent must lie in (0, 1]")
    eta = min(1.0, eta0)
    a = m * (1.0 / exponent - 1.0) / k
    return math.exp(
        math.log(eta) * a / (a + 1.0) + math.log(2.0) / (2.0 * a + 2.0)
    ) - eta


def _grad_coeff(c_lower: Fraction, k: Fraction, m: Fraction, horizon: Fraction) -> Fraction:
    # horizon here is mu + eta, the weighted-distance scale at the far corner
    return (2 / c_lower) * (k / (8 * m) + horizon / 2 + horizon * horizon / 2)


def compute_constants_dirichlet(params: dict) -> DirichletConstants:
    """Coefficient report for the zero-trace estimates.

    params: c_lower, m_upper (coefficient drift bound), k, m0, mu0, eta0,
    alpha, l_f, and optionally m (defaults to m0).
    """
    c_lower = _rat(params["c_lower"])
    m_upper = _rat(params.get("m_upper", 0.0))
    k = _rat(params["k"])
    m0 = _rat(params["m0"])
    mu0 = _rat(params["mu0"])
    eta0 = _rat(params["eta0"])
    m = _rat(params.get("m", params["m0"]))
    alpha = float(params.get("alpha", 1.0))
    l_f = float(params.get("l_f", 0.0))

    horizon = mu0 + eta0
    c1 = _grad_coeff(c_lower, k, m, horizon)
    c2 = _grad_coeff(c_lower, k, m0, horizon)
    energy = k / (4 * m0) + c2 * (Fraction(1, 2) + k * m_upper / (4 * m0))

    drift_load = 2 * (horizon * m_upper / 2 + k * m_upper / (8 * m0))
    ellipticity = Condition(drift_load <= c_lower, float(c_lower - drift_load))
    if l_f > 0.0:
        source_cap = 1.0 / (4.0 * alpha * l_f * l_f)
    else:
        source_cap = math.inf
    source = Condition(float(energy) <= source_cap, source_cap - float(energy))

    return DirichletConstants(
        grad_coeff=float(c1),
        grad_coeff_ref=float(c2),
        energy_coeff=float(energy),
        ellipticity_margin=ellipticity,
        source_bound=source,
        max_horizon=horizon_choice(alpha, float(m), float(k), float(eta0)),
        params=dict(params),
    )


def _field_coeff(k: Fraction, m: Fraction, m_flux: Fraction, c0: Fraction,
                 horizon: Fraction, eta: Fraction) -> Fraction:
    return 4 * m / k - 2 * m_flux * c0 * horizon * horizon - eta * eta / 4


def _dual_coeff(k: Fraction, m: Fraction, horizon: Fraction) -> Fraction:
    return Fraction(1, 2) + (2 * m / k) * horizon


def compute_constants_robin(params: dict) -> RobinConstants:
    """Coefficient report for the flux-coupled estimates.

    params: c_lower, m_upper, m_flux (boundary drift bound), c0 (trace
    constant), k, m0, mu0, eta0, alpha, l_f, beta, l_s, optional m.
    """
    c_lower = _rat(params["c_lower"])
    m_upper = _rat(params.get("m_upper", 0.0))
    m_flux = _rat(params.get("m_flux", 0.0))
    c0 = _rat(params["c0"])
    k = _rat(params["k"])
    m0 = _rat(params["m0"])
    mu0 = _rat(params["mu0"])
    eta0 = _rat(params["eta0"])
    m = _rat(params.get("m", params["m0"]))
    alpha = float(params.get("alpha", 1.0))
    l_f = float(params.get("l_f", 0.0))
    beta = float(params.get("beta", 1.0))
    l_s = float(params.get("l_s", 0.0))

    horizon = mu0 + eta0  # T + a_max + eta at the reference choice
    k1 = _field_coeff(k, m, m_flux, c0, horizon, eta0)
    k2 = _dual_coeff(k, m, horizon)
    k3 = _field_coeff(k, m0, m_flux, c0, horizon, eta0)
    k4 = _dual_coeff(k, m0, horizon)

    positive = Condition(k3 > 0, float(k3))
    boundary_load = m_upper + 2 * c0 * m_flux + Fraction(1, 4)
    if k3 > 0:
        ratio = k4 / k3
        ell_lhs = 2 * ratio * boundary_load
        ellipticity = Condition(ell_lhs <= c_lower, float(c_lower - ell_lhs))
        half_lhs = boundary_load / k3
        half = Condition(half_lhs <= Fraction(1, 2), float(Fraction(1, 2) - half_lhs))
        c3 = (2 / c_lower) * max(k2 / k1 + horizon * horizon / 2, 16 * (k2 / k1) * c0) \
            if k1 > 0 else None
        c4 = (2 / c_lower) * max(ratio + horizon * horizon / 2, 16 * ratio * c0)
        energy = 1 / k3 + c4
    else:
        ellipticity = Condition(False, -math.inf)
        half = Condition(False, -math.inf)
        c3 = c4 = energy = None

    caps = []
    if l_f > 0.0:
        caps.append(1.0 / (alpha * l_f * l_f))
    if l_s > 0.0:
        caps.append(1.0 / (float(c0) * beta * l_s * l_s))
        caps.append(1.0 / (beta * l_s * l_s))
    source_cap = min(caps) / 8.0 if caps else math.inf
    if energy is None:
        source = Condition(False, -math.inf)
    else:
        source = Condition(float(energy) <= source_cap, source_cap - float(energy))

    branches = [horizon_choice(alpha, float(m), float(k), float(eta0))]
    if beta < 1.0:
        branches.append(horizon_choice(beta, float(m), float(k), float(eta0)))
    return RobinConstants(
        field_coeff=float(k1),
        dual_coeff=float(k2),
        field_coeff_ref=float(k3),
        dual_coeff_ref=float(k4),
        grad_coeff=None if c3 is None else float(c3),
        grad_coeff_ref=None if c4 is None else float(c4),
        energy_coeff=None if energy is None else float(energy),
        field_coeff_positive=positive,
        ellipticity_margin=ellipticity,
        absorption_half=half,
        source_bound=source,
        max_horizon=min(branches),
        params=dict(params),
    )
