"""Problem data: diffusion tensors, reaction terms, surface reactions, audits.

Specs pair an evaluator with the declared structural constants (ellipticity
window, transport-derivative bound, Hoelder data, surface monotonicity).
``audit_assumptions`` samples the evaluators and reports how the realized
extrema compare with the declarations; a miss is a finding in the report,
never an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import MissingContext
from .grid import Field, Grid

__all__ = [
    "DiffusionSpec",
    "SourceSpec",
    "SurfaceSpec",
    "AuditEntry",
    "AssumptionAudit",
    "eval_diffusion",
    "eval_source",
    "eval_surface",
    "audit_assumptions",
    "isotropic_diffusion",
    "sin_drift_diffusion",
]

SOURCE_KINDS = (
    "zero",
    "linear_death",
    "logistic",
    "von_bertalanffy",
    "arrhenius",
    "holder_power",
    "lotka_von_foerster",
)

SURFACE_KINDS = ("zero", "linear", "power")


@dataclass(frozen=True)
class DiffusionSpec:
    """Symmetric diffusion tensor d(t, a, x) with its declared bounds.

    Attributes:
        evaluate: callable (t, a, x) -> tensor; ``x`` has shape (..., dim)
            and the result (..., dim, dim), symmetric.
        dim: spatial dimension the evaluator expects.
        c_lower: declared uniform ellipticity floor.
        c_upper: declared ellipticity ceiling.
        m_bar: declared bound on |d_t d_ij| + |d_a d_ij|.
        constant_in_ta: True when the tensor does not depend on (t, a);
            lets operators cache one assembly for the whole cylinder.
    """

    evaluate: Callable[[float, float, np.ndarray], np.ndarray]
    dim: int
    c_lower: float
    c_upper: float
    m_bar: float
    constant_in_ta: bool = False


def eval_diffusion(d: DiffusionSpec, t: float, a: float, x: np.ndarray) -> np.ndarray:
    """Evaluate the tensor at points x of shape (..., dim)."""
    out = np.asarray(d.evaluate(t, a, np.asarray(x, dtype=float)), dtype=float)
    if out.shape[-2:] != (d.dim, d.dim):
        raise ValueError(f"diffusion evaluator returned shape {out.shape}")
    return out


def isotropic_diffusion(value: float, dim: int) -> DiffusionSpec:
    """Constant scalar tensor value * identity."""

    eye = np.eye(dim)

    def evaluate(t, a, x):
        return np.broadcast_to(value * eye, x.shape[:-1] + (dim, dim))

    return DiffusionSpec(
        evaluate=evaluate,
        dim=dim,
        c_lower=value,
        c_upper=value,
        m_bar=0.0,
        constant_in_ta=True,
    )


def sin_drift_diffusion(dim: int, base: float = 1.0, amplitude: float = 0.1) -> DiffusionSpec:
    """Diagonal tensor whose first entry drifts like base + amplitude*sin(t+a).

    The transport derivative of the first entry is 2*amplitude*cos(t+a), so
    the declared drift bound is 2*amplitude.
    """

    def evaluate(t, a, x):
        out = np.zeros(x.shape[:-1] + (dim, dim))
        out[..., 0, 0] = base + amplitude * math.sin(t + a)
        for i in range(1, dim):
            out[..., i, i] = base
        return out

    return DiffusionSpec(
        evaluate=evaluate,
        dim=dim,
        c_lower=base - amplitude,
        c_upper=base + amplitude,
        m_bar=2.0 * amplitude,
        constant_in_ta=False,
    )


@dataclass(frozen=True)
class SourceSpec:
    """Reaction term F with declared Hoelder data (alpha, l_f).

    Kinds and parameters:
        zero:               F = 0
        linear_death:       F = -rate * u                      params: rate
        logistic:           F = r * u * (1 - u / cap)          params: r, cap
        von_bertalanffy:    F = r * (theta * u^(2/3) - u)      params: r, theta
        arrhenius:          F = a0 * exp(u / e_act)            params: a0, e_act
        holder_power:       F = -c * sign(u) |u|^alpha         params: c
        lotka_von_foerster: F = -u * integral of the context
                            over age and space at the current time slice

    Power laws use the odd extension sign(u)|u|^p so difference fields with
    transient negative values stay evaluable.
    """

    kind: str
    params: dict = dc_field(default_factory=dict)
    alpha: float = 1.0
    l_f: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


def _odd_power(u: np.ndarray, p: float) -> np.ndarray:
    return np.sign(u) * np.abs(u) ** p


def age_space_integral(context: Field, t: float) -> float:
    """Trapezoid-in-age, midpoint-in-space integral of a field at time t."""
    g = context.grid
    i = round(t / g.step)
    if not (0 <= i <= g.n_t) or abs(t - i * g.step) > 1e-9 * max(g.step, abs(t)):
        raise ValueError(f"t={t} is not a time node")
    wa = np.ones(g.n_a + 1)
    wa[0] = wa[-1] = 0.5
    slab = np.sum(context.values[i], axis=tuple(range(1, context.values.ndim - 1)))
    return float(np.sum(wa * slab) * g.cell_volume * g.step)


def eval_source(
    src: SourceSpec,
    t: float,
    a: float,
    x: np.ndarray,
    u: np.ndarray | float,
    context: Field | None = None,
) -> np.ndarray | float:
    """Evaluate F at (t, a, x, u); broadcasts over array-valued u."""
    u = np.asarray(u, dtype=float)
    kind, p = src.kind, src.params
    if kind == "zero":
        return np.zeros_like(u)
    if kind == "linear_death":
        return -p["rate"] * u
    if kind == "logistic":
        return p["r"] * u * (1.0 - u / p["cap"])
    if kind == "von_bertalanffy":
        return p["r"] * (p["theta"] * _odd_power(u, 2.0 / 3.0) - u)
    if kind == "arrhenius":
        return p["a0"] * np.exp(u / p["e_act"])
    if kind == "holder_power":
        return -p["c"] * _odd_power(u, src.alpha)
    if kind == "lotka_von_foerster":
        if context is None:
            raise MissingContext("lotka_von_foerster needs the population field")
        return -u * age_space_integral(context, t)
    raise AssertionError(kind)


@dataclass(frozen=True)
class SurfaceSpec:
    """Boundary reaction S with declared monotonicity and Hoelder data.

    Kinds: zero; linear (S = sigma*u, beta = 1); power
    (S = sigma * sign(u)|u|^beta).  ``m_bar`` bounds the drift pairing of
    S-differences against the state difference on the boundary.
    """

    kind: str
    sigma: float = 0.0
    beta: float = 1.0
    l_s: float = 0.0
    m_bar: float = 0.0
    monotone: bool = True

    def __post_init__(self) -> None:
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")


def eval_surface(s: SurfaceSpec, u: np.ndarray | float) -> np.ndarray | float:
    u = np.asarray(u, dtype=float)
    if s.kind == "zero":
        return np.zeros_like(u)
    if s.kind == "linear":
        return s.sigma * u
    if s.kind == "power":
        return s.sigma * _odd_power(u, s.beta)
    raise AssertionError(s.kind)


@dataclass(frozen=True)
class AuditEntry:
    """One audited assumption: realized extremum against the declared bound."""

    name: str
    extremum: float
    bound: float
    passed: bool
    witness: tuple | None = None
    note: str = ""


@dataclass(frozen=True)
class AssumptionAudit:
    """Sampled consistency report for the declared model constants."""

    entries: tuple[AuditEntry, ...]
    seed: int
    n_samples: int

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> AuditEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def audit_assumptions(
    d: DiffusionSpec,
    src: SourceSpec,
    surf: SurfaceSpec,
    n_samples: int = 200,
    seed: int = 0,
    grid: Grid | None = None,
    u_range: tuple[float, float] = (0.0, 10.0),
) -> AssumptionAudit:
    """Sample the model and compare realized constants with declarations.

    Deterministic for a fixed seed.  Ellipticity and the drift bound are
    sampled at random cylinder points; the Hoelder ratios over nonnegative
    state pairs in ``u_range`` (population densities are nonnegative, and
    the declared constants refer to that range); the surface drift pairing
    on smooth synthetic boundary trajectories with unit-bounded frequency.
    Failures are recorded with the worst sample, not raised.
    """
    rng = np.random.default_rng(seed)
    t_hi = grid.t_final if grid is not None else 1.0
    a_hi = grid.a_max if grid is not None else 1.0
    extents = grid.extents if grid is not None else (1.0,) * d.dim

    entries = []
    entries.extend(_audit_ellipticity(d, rng, n_samples, t_hi, a_hi, extents))
    entries.append(_audit_drift(d, rng, n_samples, t_hi, a_hi, extents))
    entries.append(_audit_source_holder(d, src, rng, n_samples, t_hi, a_hi, extents, u_range))
    entries.append(_audit_surface_drift(surf, rng, max(20, n_samples // 10)))
    entries.append(_audit_surface_monotone(surf, rng, n_samples, u_range))
    entries.append(_audit_surface_holder(surf, rng, n_samples, u_range))
    return AssumptionAudit(entries=tuple(entries), seed=seed, n_samples=n_samples)


def _cylinder_samples(rng, n, t_hi, a_hi, extents):
    t = rng.uniform(0.0, t_hi, n)
    a = rng.uniform(0.0, a_hi, n)
    x = rng.uniform(0.0, 1.0, (n, len(extents))) * np.asarray(extents)
    return t, a, x


def _audit_ellipticity(d, rng, n, t_hi, a_hi, extents):
    t, a, x = _cylinder_samples(rng, n, t_hi, a_hi, extents)
    xi = rng.normal(size=(n, d.dim))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    lo, hi, asym = np.inf, -np.inf, 0.0
    wit_lo = wit_hi = None
    for k in range(n):
        tensor = eval_diffusion(d, t[k], a[k], x[k])
        asym = max(asym, float(np.max(np.abs(tensor - tensor.T))))
        q = float(xi[k] @ tensor @ xi[k])
        if q < lo:
            lo, wit_lo = q, (t[k], a[k], tuple(x[k]))
        if q > hi:
            hi, wit_hi = q, (t[k], a[k], tuple(x[k]))
    tol = 1e-12 * max(1.0, abs(d.c_upper))
    return [
        AuditEntry("ellipticity_floor", lo, d.c_lower, lo >= d.c_lower - tol, wit_lo),
        AuditEntry("ellipticity_ceiling", hi, d.c_upper, hi <= d.c_upper + tol, wit_hi),
        AuditEntry("tensor_symmetry", asym, 0.0, asym <= 1e-12, None),
    ]


def _audit_drift(d, rng, n, t_hi, a_hi, extents):
    t, a, x = _cylinder_samples(rng, n, t_hi, a_hi, extents)
    h = 1e-5 * max(t_hi, a_hi)
    worst, wit = 0.0, None
    for k in range(n):
        dt = (eval_diffusion(d, t[k] + h, a[k], x[k]) - eval_diffusion(d, t[k] - h, a[k], x[k])) / (2 * h)
        da = (eval_diffusion(d, t[k], a[k] + h, x[k]) - eval_diffusion(d, t[k], a[k] - h, x[k])) / (2 * h)
        m = float(np.max(np.abs(dt) + np.abs(da)))
        if m > worst:
            worst, wit = m, (t[k], a[k], tuple(x[k]))
    # central differences of a smooth entry carry O(h^2) truncation
    bound = d.m_bar + 1e-8 + 100.0 * h * h
    return AuditEntry("coefficient_drift", worst, d.m_bar, worst <= bound, wit)


def _audit_source_holder(d, src, rng, n, t_hi, a_hi, extents, u_range):
    if src.kind == "zero":
        return AuditEntry("source_holder", 0.0, src.l_f, True, None)
    if src.kind == "lotka_von_foerster":
        # nonlocal: no pointwise ratio exists; bounded-context linearity only
        return AuditEntry(
            "source_holder", 0.0, src.l_f, True, None,
            note="nonlocal kind audited as linear in u for bounded context",
        )
    t, a, x = _cylinder_samples(rng, n, t_hi, a_hi, extents)
    lo, hi = u_range
    u1 = rng.uniform(lo, hi, n)
    u2 = rng.uniform(lo, hi, n)
    worst, wit = 0.0, None
    for k in range(n):
        du = abs(u1[k] - u2[k])
        if du < 1e-12:
            continue
        f1 = float(eval_source(src, t[k], a[k], x[k], u1[k]))
        f2 = float(eval_source(src, t[k], a[k], x[k], u2[k]))
        ratio = abs(f1 - f2) / du**src.alpha
        if ratio > worst:
            worst, wit = ratio, (u1[k], u2[k])
    tol = 1e-9 * max(1.0, src.l_f)
    return AuditEntry("source_holder", worst, src.l_f, worst <= src.l_f + tol, wit)


def _audit_surface_drift(surf, rng, n_pairs):
    """Drift pairing of S-differences along smooth boundary trajectories.

    Trajectories are offset sinusoids with frequency <= 1 and oscillation
    kept below half the pair offset, so the state difference never crosses
    zero; the pairing ratio is then finite and the declared bound is a
    statement about this trajectory class.
    """
    if surf.kind == "zero":
        return AuditEntry("surface_drift", 0.0, surf.m_bar, True, None)
    worst, wit = -np.inf, None
    s_grid = np.linspace(0.0, 1.0, 33)
    h = 1e-5
    for _ in range(n_pairs):
        base1 = rng.uniform(1.0, 3.0)
        offset = rng.uniform(0.5, 1.5)
        amp = rng.uniform(0.0, 0.4) * offset
        om1, om2 = rng.uniform(0.1, 1.0, 2)
        ph1, ph2 = rng.uniform(0.0, 2 * np.pi, 2)

        def u1(s):
            return base1 + offset + 0.5 * amp * np.sin(om1 * s + ph1)

        def u2(s):
            return base1 + 0.5 * amp * np.sin(om2 * s + ph2)

        for s in s_grid:
            du = u1(s) - u2(s)
            dplus = eval_surface(surf, u1(s + h)) - eval_surface(surf, u2(s + h))
            dminus = eval_surface(surf, u1(s - h)) - eval_surface(surf, u2(s - h))
            ratio = float((dplus - dminus) / (2 * h) * du / du**2)
            if ratio > worst:
                worst, wit = ratio, (float(u1(s)), float(u2(s)), float(s))
    tol = 1e-6 * max(1.0, abs(surf.m_bar))
    return AuditEntry("surface_drift", worst, surf.m_bar, worst <= surf.m_bar + tol, wit)


def _audit_surface_monotone(surf, rng, n, u_range):
    if surf.kind == "zero":
        return AuditEntry("surface_monotone", 0.0, 0.0, True, None)
    lo, hi = u_range
    a = rng.uniform(lo, hi, n)
    b = a + rng.uniform(1e-6, hi - lo, n)
    worst, wit = np.inf, None
    for k in range(n):
        gap = float(eval_surface(surf, b[k])) - float(eval_surface(surf, a[k]))
        if gap < worst:
            worst, wit = gap, (a[k], b[k])
    passed = (not surf.monotone) or worst >= -1e-12
    return AuditEntry("surface_monotone", worst, 0.0, passed, wit)


def _audit_surface_holder(surf, rng, n, u_range):
    if surf.kind == "zero":
        return AuditEntry("surface_holder", 0.0, surf.l_s, True, None)
    lo, hi = u_range
    u1 = rng.uniform(lo, hi, n)
    u2 = rng.uniform(lo, hi, n)
    worst, wit = 0.0, None
    for k in range(n):
        du = abs(u1[k] - u2[k])
        if du < 1e-12:
            continue
        ratio = abs(float(eval_surface(surf, u1[k])) - float(eval_surface(surf, u2[k]))) / du**surf.beta
        if ratio > worst:
            worst, wit = ratio, (u1[k], u2[k])
    tol = 1e-9 * max(1.0, surf.l_s)
    return AuditEntry("surface_holder", worst, surf.l_s, worst <= surf.l_s + tol, wit)
