"""Quadrature verification of the weighted lower bounds and decay limits.

Each verifier assembles both sides of one inequality with the package's
fixed quadrature (trapezoid in time-age, midpoint in space) and reports
the margin LHS - RHS against a step-scaled tolerance.  Margins may dip
below zero by discretization error only; the tolerance
10 * (step + dx^2) * scale(LHS) matches the truncation order of the
stencils, since the underlying discrete identities are exact.

The interaction functional for flux-coupled runs follows its two-term
closed form.  Linear surface laws are routed through the sublinear
machinery with exponent 1 - 1e-6 inside the powers; the prefactor keeps
the true exponent, so the term that carries a (1 - beta) factor drops out
exactly instead of producing inf * 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FluxMismatch, PreconditionViolated
from ..grid import (
    BoundaryField,
    Field,
    Grid,
    TraceFlags,
    norm_boundary,
    norm_q,
    ta_norm_sq,
)
from ..model import DiffusionSpec, SurfaceSpec
from ..operators import (
    BC,
    DirichletBC,
    OperatorWorkspace,
    RobinBC,
    apply_transport,
    boundary_curvature_scale,
    boundary_flux_gap,
    grad_norm_sq_profile,
    gradient,
)
from .constants import DirichletConstants, RobinConstants, horizon_choice
from .weights import CutoffSpec, WeightSpec, make_cutoff, weight_field

__all__ = [
    "VerificationReport",
    "DecayRow",
    "DecayTable",
    "verify_dirichlet_estimates",
    "verify_robin_estimates",
    "corner_decay",
    "check_elementary_inequality",
    "check_weight_product_identity",
]

_C_TOL = 10.0


@dataclass(frozen=True)
class VerificationReport:
    """One checked inequality: pass iff margin >= -tol."""

    id: str
    lhs: float
    rhs: float
    margin: float
    tol: float
    passed: bool
    params: dict

    def as_json_dict(self) -> dict:
        def plain(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (int, np.integer)):
                return int(v)
            if isinstance(v, (float, np.floating)):
                return float(v)
            if isinstance(v, (tuple, list)):
                return [plain(x) for x in v]
            if isinstance(v, dict):
                return {k: plain(x) for k, x in v.items()}
            return v

        return {
            "id": self.id,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "tol": float(self.tol),
            "pass": bool(self.passed),
            "params": plain(self.params),
        }


def _make_report(rid: str, lhs: float, rhs: float, tol: float, params: dict) -> VerificationReport:
    margin = lhs - rhs
    return VerificationReport(rid, lhs, rhs, margin, tol, margin >= -tol, params)


def _step_tol(grid: Grid, scale: float) -> float:
    dx2 = max(grid.dx) ** 2
    return _C_TOL * (grid.step + dx2) * abs(scale)


def _weighted_grad_sq(f: Field, bc: BC, omega: np.ndarray) -> float:
    g = f.grid
    profile = grad_norm_sq_profile(f, bc)
    wta = g.ta_weights()
    return float(np.sum(wta * omega * omega * profile) * g.step * g.step)


def _defect_field(f: Field, ws: OperatorWorkspace) -> Field:
    """A f - (f_t + f_a) with the centered diagonal drift stencil."""
    g = f.grid
    drift = apply_transport(f, "centered")
    out = np.empty_like(f.values)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            out[i, j] = ws.apply_slice(f.values[i, j], i, j) - drift.values[i, j]
    return Field(g, out)


def _trace_table(f: Field) -> BoundaryField:
    g = f.grid
    flat = f.values.reshape(g.node_shape + (-1,))
    return BoundaryField(g, np.ascontiguousarray(flat[..., g.boundary_cells]))


def verify_dirichlet_estimates(
    v: Field, d: DiffusionSpec, w: WeightSpec, consts: DirichletConstants
) -> list[VerificationReport]:
    """Margins of the two zero-trace lower bounds for one field.

    The first report checks that the weighted defect norm dominates the
    strengthened field norm minus the drift-weighted gradient norm; the
    second that energy_coeff times the defect norm controls field plus
    half gradient.  Preconditions for the absorbed form (drift margin,
    m >= m0, horizon cap) are enforced up front.
    """
    fl = v.flags
    if not (fl.zero_t_ends and fl.zero_a_ends and fl.zero_spatial_boundary):
        raise PreconditionViolated("field must carry all three zero-trace flags")
    if not consts.ellipticity_margin.ok:
        raise PreconditionViolated("ellipticity margin condition failed")
    m0 = float(consts.params["m0"])
    mu0 = float(consts.params["mu0"])
    if w.m < m0 * (1.0 - 1e-12):
        raise PreconditionViolated(f"m={w.m} below the reference exponent m0={m0}")
    g = v.grid
    if g.t_final + g.a_max > mu0 * (1.0 + 1e-12) + 1e-15:
        raise PreconditionViolated("horizon T + a_max exceeds the admissible mu0")

    m_upper = float(consts.params.get("m_upper", d.m_bar))
    omega, omega1 = weight_field(w, g)
    ws = OperatorWorkspace(g, d, DirichletBC())
    defect = _defect_field(v, ws)
    lhs = norm_q(defect, weight=omega)
    field_term = norm_q(v, weight=omega1)
    grad_term = _weighted_grad_sq(v, DirichletBC(), omega)

    params = {
        "m": w.m, "k": w.k, "eta": w.eta, "m0": m0, "mu0": mu0,
        "m_upper": m_upper, "step": g.step, "dx": max(g.dx), "bc": "dirichlet",
    }
    rhs1 = (4.0 * w.m / w.k) * field_term - m_upper * grad_term
    rep1 = _make_report("dirichlet_lower_bound", lhs, rhs1, _step_tol(g, lhs), params)

    lhs2 = consts.energy_coeff * lhs
    rhs2 = field_term + 0.5 * grad_term
    rep2 = _make_report("dirichlet_absorbed", lhs2, rhs2, _step_tol(g, lhs2), params)
    return [rep1, rep2]


def _interaction_term(
    grid: Grid,
    omega: np.ndarray,
    trace_norm_sq: float,
    rect: tuple[float, float, float, float],
    m: float,
    k: float,
    eta: float,
    beta: float,
    l_s: float,
) -> float:
    """Two-term interaction functional for sublinear surface coupling.

    trace_norm_sq is the squared weighted boundary norm of the field; the
    rectangle norms involve the weight alone.
    """
    t1, t2, a1, a2 = rect
    area = (t2 - t1) * (a2 - a1)
    rect_sq = ta_norm_sq(grid, omega, rect)
    beta_exp = beta if beta < 1.0 else 1.0 - 1e-6
    two_mk = 2.0 * m / k
    term1 = (
        beta
        * l_s**2
        * eta ** (two_mk * (1.0 - 1.0 / beta_exp) + 2.0)
        * rect_sq ** ((beta_exp - 1.0) / beta_exp)
        * area ** (1.0 / beta_exp - 1.0)
        * trace_norm_sq
    )
    if beta >= 1.0:
        term2 = 0.0  # the (1 - beta) factor kills this term before its prefactor blows up
    else:
        term2 = (
            (m / (k * eta ** (beta + 1.0))) ** (2.0 / (1.0 - beta))
            * (1.0 - beta)
            * grid.boundary_measure
            * l_s**2
            * grid.t_final
            * grid.a_max
            * rect_sq
            / area
        )
    return term1 + term2


def verify_robin_estimates(
    w_field: Field,
    g_flux: BoundaryField,
    d: DiffusionSpec,
    surface: SurfaceSpec,
    wt: WeightSpec,
    consts: RobinConstants,
    cutoffs: CutoffSpec,
) -> list[VerificationReport]:
    """Margins of the two flux-coupled lower bounds for one field.

    The field needs zero time-age end slices and a flux table consistent
    with its own one-sided boundary gradient; the interior equation is
    never used.  The interaction functional is added on the weak side of
    both inequalities per its closed form over the cutoff rectangle.
    """
    fl = w_field.flags
    if not (fl.zero_t_ends and fl.zero_a_ends):
        raise PreconditionViolated("field must vanish on the time and age end slices")
    for name, cond in (
        ("field coefficient positivity", consts.field_coeff_positive),
        ("ellipticity margin", consts.ellipticity_margin),
        ("absorption half-bound", consts.absorption_half),
    ):
        if not cond.ok:
            raise PreconditionViolated(f"{name} condition failed")
    m0 = float(consts.params["m0"])
    mu0 = float(consts.params["mu0"])
    if wt.m < m0 * (1.0 - 1e-12):
        raise PreconditionViolated(f"m={wt.m} below the reference exponent m0={m0}")
    g = w_field.grid
    if g.t_final + g.a_max > mu0 * (1.0 + 1e-12) + 1e-15:
        raise PreconditionViolated("horizon T + a_max exceeds the admissible mu0")

    grad = gradient(w_field, RobinBC(flux=g_flux))
    grad_scale = float(np.max(np.abs(grad))) if grad.size else 0.0
    flux_scale = d.c_upper * grad_scale + float(np.max(np.abs(g_flux.values))) + 1e-300
    gap = boundary_flux_gap(w_field, d, g_flux)
    # the one-sided reading is off by d dx u'' at first order even for a
    # perfectly consistent pair, so that term enters the tolerance directly
    flux_tol = _C_TOL * (
        (g.step + max(g.dx)) * flux_scale + boundary_curvature_scale(w_field, d)
    )
    if gap > flux_tol:
        raise FluxMismatch(
            f"boundary flux differs from the field's gradient by {gap:.3g} "
            f"(tolerance {flux_tol:.3g})"
        )

    m_upper = float(consts.params.get("m_upper", d.m_bar))
    m_flux = float(consts.params.get("m_flux", surface.m_bar))
    c0 = float(consts.params["c0"])
    l_s = surface.l_s if surface.l_s > 0.0 else abs(surface.sigma)
    omega, omega1 = weight_field(wt, g)
    ws = OperatorWorkspace(g, d, RobinBC(flux=g_flux))
    defect = _defect_field(w_field, ws)
    lhs = norm_q(defect, weight=omega)

    field_term = norm_q(w_field, weight=omega1)
    grad_term = _weighted_grad_sq(w_field, RobinBC(flux=g_flux), omega)
    trace = _trace_table(w_field)
    trace_w = norm_boundary(trace, weight=omega)
    trace_w1 = norm_boundary(trace, weight=omega1)
    rect = (cutoffs.t1, cutoffs.t2, cutoffs.a1, cutoffs.a2)
    interaction = _interaction_term(
        g, omega, trace_w, rect, wt.m, wt.k, wt.eta, surface.beta, l_s
    )

    params = {
        "m": wt.m, "k": wt.k, "eta": wt.eta, "m0": m0, "mu0": mu0,
        "m_upper": m_upper, "m_flux": m_flux, "c0": c0,
        "beta": surface.beta, "l_s": l_s, "step": g.step, "dx": max(g.dx),
        "bc": "robin", "interaction": interaction,
    }
    rhs1 = (
        (4.0 * wt.m / wt.k) * field_term
        - m_upper * grad_term
        - 2.0 * m_flux * trace_w
        - (wt.eta**2 / (4.0 * c0)) * trace_w1
        - 16.0 * c0 * interaction
    )
    rep1 = _make_report("robin_lower_bound", lhs, rhs1, _step_tol(g, lhs), params)

    if consts.energy_coeff is None:
        raise PreconditionViolated("energy coefficient unavailable (field coefficient <= 0)")
    lhs2 = consts.energy_coeff * (lhs + interaction)
    rhs2 = field_term + 0.5 * grad_term
    rep2 = _make_report("robin_absorbed", lhs2, rhs2, _step_tol(g, lhs2), params)
    return [rep1, rep2]


@dataclass(frozen=True)
class DecayRow:
    m: float
    bound: float
    corner_norm: float
    passed: bool


@dataclass(frozen=True)
class DecayTable:
    rows: list[DecayRow]
    fitted_slope: float
    expected_slope: float
    corner_norm: float
    params: dict


def corner_decay(
    w_field: Field,
    cut: CutoffSpec,
    d: DiffusionSpec,
    consts,
    source_consts: dict,
    m_sweep,
    bc: BC | None = None,
) -> DecayTable:
    """Exponential-in-m bound on the corner norm of a difference field.

    For each m the certified bound is a fixed data functional times
    ratio^(-2m/k) with ratio > 1 built from the cutoff geometry, so the
    log-bound is affine in m; the fitted slope is reported next to its
    closed form -(2/k) ln(ratio).  The corner norm itself does not depend
    on m: one number checked against the whole family.
    """
    if cut.t3 is None:
        raise PreconditionViolated("decay study needs the inner breakpoints (t3, a3)")
    ms = [float(m) for m in m_sweep]
    if len(ms) < 2 or any(b <= a for a, b in zip(ms, ms[1:])):
        raise PreconditionViolated("m sweep must be strictly increasing, length >= 2")
    energy = consts.energy_coeff
    if energy is None:
        raise PreconditionViolated("energy coefficient unavailable")
    k = float(consts.params["k"])
    eta = float(consts.params["eta0"])
    l_f = float(source_consts["l_f"])

    g = w_field.grid
    kappa = make_cutoff(cut, "kappa", g)
    shape = g.node_shape + (1,) * g.dim
    killed = kappa.reshape(shape) * w_field.values
    # the estimate needs the killed field in the zero-trace class; the lower
    # cutoff handles t = 0 and a = 0, the field itself must die at the far ends
    for sl in (killed[0], killed[-1], killed[:, 0], killed[:, -1]):
        if np.max(np.abs(sl)) != 0.0:
            raise PreconditionViolated(
                "cutoff difference field must vanish on all four end slices"
            )
    v = Field(g, killed, TraceFlags(True, True, w_field.flags.zero_spatial_boundary))
    ws = OperatorWorkspace(g, d, bc if bc is not None else DirichletBC())
    drift = apply_transport(v, "forward")
    defect = np.empty_like(v.values)
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            defect[i, j] = ws.apply_slice(v.values[i, j], i, j) - drift.values[i, j]
    defect_field = Field(g, defect)
    rect = (cut.t1, cut.t2, cut.a1, cut.a2)
    data_norm = norm_q(defect_field, rect=rect)
    data_term = data_norm + g.t_final * g.a_max * g.domain_volume * l_f**2

    dist2 = g.t_final + g.a_max + eta - cut.t2 - cut.a2
    dist3 = g.t_final + g.a_max + eta - cut.t3 - cut.a3
    ratio = dist2 / dist3
    corner = norm_q(w_field, rect=(cut.t3, g.t_final, cut.a3, g.a_max))

    rows = []
    for m in ms:
        bound = 2.0 * energy * dist3**2 * data_term * ratio ** (-2.0 * m / k)
        rows.append(DecayRow(m, bound, corner, corner <= bound))
    expected = -(2.0 / k) * math.log(ratio)
    if data_term > 0.0:
        slope = float(np.polyfit(ms, [math.log(r.bound) for r in rows], 1)[0])
    else:
        slope = float("nan")
    return DecayTable(
        rows=rows,
        fitted_slope=slope,
        expected_slope=expected,
        corner_norm=corner,
        params={
            "k": k, "eta": eta, "l_f": l_f, "ratio": ratio,
            "data_norm": data_norm, "energy_coeff": energy,
            "rect": rect, "t3": cut.t3, "a3": cut.a3,
        },
    )


def check_elementary_inequality(n_samples: int = 100_000, seed: int = 0) -> VerificationReport:
    """Sampled audit of the concavity bound X^a <= a g^(a-1) X + (1-a) g^a.

    Samples X and g log-uniformly over twelve decades and a over (0, 1];
    also drives the exact-equality families (X = g, a = 1, X = 0) and
    records the worst tangency gap in params.
    """
    rng = np.random.default_rng(seed)
    x = 10.0 ** rng.uniform(-6.0, 6.0, n_samples)
    gam = 10.0 ** rng.uniform(-6.0, 6.0, n_samples)
    a = rng.uniform(0.0, 1.0, n_samples)
    a = np.maximum(a, 1e-9)
    n_edge = max(n_samples // 100, 10)
    x = np.concatenate([x, np.zeros(n_edge), gam[:n_edge]])
    gam = np.concatenate([gam, gam[:n_edge], gam[:n_edge]])
    a = np.concatenate([a, a[:n_edge], np.ones(n_edge)])

    lhs = x**a
    rhs = a * gam ** (a - 1.0) * x + (1.0 - a) * gam**a
    scale = np.maximum(np.maximum(lhs, rhs), 1e-300)
    worst = float(np.max((lhs - rhs) / scale))

    tang = gam[:n_edge]
    ta = a[:n_edge]
    t_lhs = tang**ta
    t_rhs = ta * tang ** (ta - 1.0) * tang + (1.0 - ta) * tang**ta
    tangency_gap = float(np.max(np.abs(t_lhs - t_rhs) / np.maximum(t_lhs, 1e-300)))

    tol = 1e-12
    return VerificationReport(
        id="elementary_power_bound",
        lhs=worst,
        rhs=0.0,
        margin=-max(worst, 0.0),
        tol=tol,
        passed=worst <= tol,
        params={"n_samples": n_samples, "seed": seed, "tangency_gap": tangency_gap},
    )


def check_weight_product_identity(
    exponent: float, m: float, k: float, eta0: float
) -> VerificationReport:
    """The horizon choice makes a specific weight product equal 2 exactly.

    Evaluated in log space so large exponents cancel before any power is
    formed; the residual is pure rounding.
    """
    eta = min(1.0, eta0)
    mu = horizon_choice(exponent, m, k, eta0)
    two_mk = 2.0 * m / k
    p1 = two_mk * (1.0 / exponent - 1.0) + 2.0
    p2 = two_mk * (1.0 - 1.0 / exponent)
    value = math.exp(p1 * math.log(mu + eta) + p2 * math.log(eta))
    tol = 1e-10 * 2.0
    return VerificationReport(
        id="weight_product",
        lhs=value,
        rhs=2.0,
        margin=-abs(value - 2.0),
        tol=tol,
        passed=abs(value - 2.0) <= tol,
        params={"exponent": exponent, "m": m, "k": k, "eta0": eta0, "max_horizon": mu},
    )
