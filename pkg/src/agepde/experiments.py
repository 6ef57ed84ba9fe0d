"""End-to-end studies emitting the delimited artifacts.

Every runner is deterministic given its arguments and seed: corpora come
from seeded generators, sweeps merge in parameter order regardless of the
thread pool (capped by AGEPDE_THREADS), and CSV writers round-trip floats
through repr.  Schemas:

* decay:         m,bound,corner_norm,pass
* amplification: j,tau,predicted,measured
* convergence:   level,h_x,h_s,error,order_x,order_s
* suite:         JSON array of verification reports (+ CSV mirror)

The manufactured-solution study refines the characteristic step and the
mesh together (step ~ dx^2), so a single error sequence yields both
orders: order 2 against dx and order 1 against the step.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryField, Field, Grid, TraceFlags, build_grid, norm_q
from .model import (
    SourceSpec,
    SurfaceSpec,
    audit_assumptions,
    eval_surface,
    isotropic_diffusion,
    sin_drift_diffusion,
)
from .operators import check_green_identity, check_transport_identity
from .solver import (
    CoupledScenario,
    Scenario,
    solve_backward_naive,
    solve_coupled,
    solve_diagonal_forward,
    solve_forward,
)
from .carleman import (
    CutoffSpec,
    DecayTable,
    VerificationReport,
    WeightSpec,
    check_elementary_inequality,
    check_weight_product_identity,
    compute_constants_dirichlet,
    compute_constants_robin,
    corner_decay,
    estimate_trace_constant,
    make_cutoff,
    verify_dirichlet_estimates,
    verify_robin_estimates,
)

__all__ = [
    "ConvergenceRow",
    "AmplificationRow",
    "SuiteResult",
    "UniquenessResult",
    "EpidemicResult",
    "TraceResult",
    "run_mms",
    "run_uniqueness_decay",
    "run_backward_amplification",
    "run_carleman_suite",
    "run_epidemic_demo",
    "run_trace_study",
    "make_corpus_field",
]


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("AGEPDE_THREADS", "")
    try:
        cap = int(env) if env else 4
    except ValueError:
        cap = 4
    return max(1, min(cap, n_tasks))


# ---------------------------------------------------------------------------
# manufactured-solution convergence


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    h_x: float
    h_s: float
    error: float
    order_x: float | None
    order_s: float | None


def _manufactured(dim: int):
    """Exact solution e^(-t-a) * prod sin(pi x_i) and its forcing."""

    def exact(t: float, a: float, xmesh: tuple) -> np.ndarray:
        out = math.exp(-t - a) * np.sin(np.pi * xmesh[0])
        for ax in range(1, dim):
            out = out * np.sin(np.pi * xmesh[ax])
        return out

    def forcing(t: float, a: float, xmesh: tuple) -> np.ndarray:
        return (-2.0 + dim * np.pi**2) * exact(t, a, xmesh)

    return exact, forcing


def run_mms(levels: int = 3, dim: int = 1, flat: bool = False) -> list[ConvergenceRow]:
    """Nested-refinement error study against the manufactured solution.

    ``flat`` switches to a space-independent solution with zero-flux
    walls, isolating the characteristic truncation (order about 1).
    """
    rows: list[ConvergenceRow] = []
    errors: list[float] = []
    for lev in range(levels):
        n_char = 4 * 4**lev
        n_x = 8 * 2**lev
        g = build_grid(0.5, 0.5, [1.0] * dim, n_x, n_char=n_char)
        xmesh = tuple(np.meshgrid(*g.centers, indexing="ij"))
        if flat:
            def exact(t, a, _xm):
                return math.exp(-t - a) * np.ones(g.spatial_shape)

            def forcing(t, a, _xm):
                return -2.0 * exact(t, a, _xm)

            bc = "robin"
            surface = SurfaceSpec("zero")
        else:
            exact, forcing = _manufactured(dim)
            bc = "dirichlet"
            surface = None
        initial = np.stack([exact(0.0, a, xmesh) for a in g.a_nodes])
        inflow = np.stack([exact(t, 0.0, xmesh) for t in g.t_nodes])
        scn = Scenario(
            grid=g,
            diffusion=isotropic_diffusion(1.0, dim),
            source=SourceSpec("zero"),
            bc=bc,
            surface=surface,
            initial=initial,
            inflow=inflow,
            forcing=forcing,
        )
        rep = solve_forward(scn)
        ref = np.empty_like(rep.u.values)
        for i, t in enumerate(g.t_nodes):
            for j, a in enumerate(g.a_nodes):
                ref[i, j] = exact(t, a, xmesh)
        err = math.sqrt(norm_q(Field(g, rep.u.values - ref)))
        errors.append(err)
        if lev == 0:
            ox = osd = None
        else:
            decrease = math.log(errors[lev - 1] / err) if err > 0 else float("nan")
            ox = decrease / math.log(2.0)
            osd = decrease / math.log(4.0)
        rows.append(ConvergenceRow(lev, max(g.dx), g.step, err, ox, osd))
    return rows


# ---------------------------------------------------------------------------
# backward amplification


@dataclass(frozen=True)
class AmplificationRow:
    j: int
    tau: float
    predicted: float
    measured: float


def run_backward_amplification(
    j_sweep=(1, 2, 4),
    tau: float = 0.05,
    n_steps: int = 64,
    n_x: int = 24,
    d_value: float = 1.0,
    eps: float = 1e-6,
) -> list[AmplificationRow]:
    """Mode-wise growth of the naive backward march on one characteristic.

    The march is linear, so the response to a terminal perturbation
    eps * phi_j equals the march applied to the bare perturbation; that
    form is used because it keeps the noise floor at eps-relative
    rounding.  Reversing a full solution instead amplifies solver noise
    by the top grid mode's factor, which buries the projection -- the
    instability the demo is about.  For the same reason the eps = 0
    roundtrip baseline (forward then backward, factor near 1) only reads
    cleanly on grids coarse enough that the top-mode factor stays below
    the reciprocal noise floor; n_x = 16 with 64 steps is such a grid.
    Predictions are the continuum factors exp(d (j pi / L)^2 tau).
    """
    g = build_grid(tau, tau, [1.0], n_x, n_char=n_steps)
    x = g.centers[0]
    modes = {j: np.sin(j * np.pi * x) for j in j_sweep}
    scn = Scenario(
        grid=g, diffusion=isotropic_diffusion(d_value, 1), source=SourceSpec("zero")
    )
    rows = []
    for j in j_sweep:
        phi = modes[j]
        denom = float(phi @ phi)
        predicted = math.exp(d_value * (j * np.pi) ** 2 * tau)
        if eps == 0.0:
            initial = np.zeros(n_x)
            for jj in j_sweep:
                initial += modes[jj] / jj
            forward = solve_diagonal_forward(scn, initial)
            back = solve_backward_naive(scn, forward[-1])
            recovered = float(back.history[0] @ phi) / denom
            seeded = float(initial @ phi) / denom
            measured = abs(recovered / seeded)
        else:
            back = solve_backward_naive(scn, eps * phi)
            if back.overflow_step is not None:
                measured = math.inf
            else:
                measured = abs(float(back.history[0] @ phi) / denom) / eps
        rows.append(AmplificationRow(j, tau, predicted, measured))
    return rows


# ---------------------------------------------------------------------------
# randomized corpus for the estimate suite


def make_corpus_field(
    grid: Grid, seed: int, cut: CutoffSpec, n_bumps: tuple[int, int] = (3, 6)
) -> Field:
    """Seeded sum of separable smooth bumps, cut off at all four edges.

    Each bump is a Gaussian profile in t and in a times a low sine mode
    in each spatial axis; the four-edge cutoff enforces the zero-trace
    flags exactly.
    """
    rng = np.random.default_rng(seed)
    nb = int(rng.integers(n_bumps[0], n_bumps[1] + 1))
    t = grid.t_nodes
    a = grid.a_nodes
    total = np.zeros(grid.node_shape + grid.spatial_shape)
    for _ in range(nb):
        amp = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
        tc = rng.uniform(0.2, 0.9) * grid.t_final
        ac = rng.uniform(0.2, 0.9) * grid.a_max
        st = rng.uniform(0.15, 0.4) * grid.t_final
        sa = rng.uniform(0.15, 0.4) * grid.a_max
        gt = np.exp(-(((t - tc) / st) ** 2))
        ga = np.exp(-(((a - ac) / sa) ** 2))
        phi = np.ones(grid.spatial_shape)
        for ax in range(grid.dim):
            mode = int(rng.integers(1, 4))
            axis_shape = [1] * grid.dim
            axis_shape[ax] = grid.n_x
            phi = phi * np.sin(
                mode * np.pi * grid.centers[ax] / grid.extents[ax]
            ).reshape(axis_shape)
        profile = np.outer(gt, ga).reshape(grid.node_shape + (1,) * grid.dim)
        total += amp * profile * phi
    edge = make_cutoff(cut, "kappa", grid) * make_cutoff(cut, "terminal_chi", grid)
    total *= edge.reshape(grid.node_shape + (1,) * grid.dim)
    return Field(grid, total, TraceFlags(True, True, True))


@dataclass(frozen=True)
class SuiteResult:
    reports: list[VerificationReport]
    passed: bool
    failed_ids: list[str]


def _identity_reports(grid_levels) -> list[VerificationReport]:
    """Green and transport identity residuals across a refinement ladder."""
    out = []
    for lev, (n_char, n_x) in enumerate(grid_levels):
        g = build_grid(0.5, 0.5, [1.0], n_x, n_char=n_char)
        cut = CutoffSpec(t1=0.125, t2=0.25, a1=0.125, a2=0.25)
        z = make_corpus_field(g, seed=17, cut=cut)
        for d, did in (
            (isotropic_diffusion(1.0, 1), "const"),
            (sin_drift_diffusion(1, base=1.0, amplitude=0.1), "drift"),
        ):
            rep = check_green_identity(z, d)
            tol = 1e-10 if did == "const" else 10.0 * (g.step + max(g.dx) ** 2)
            out.append(
                VerificationReport(
                    id="green_identity",
                    lhs=rep.lhs,
                    rhs=rep.rhs,
                    margin=-rep.residual,
                    tol=tol,
                    passed=rep.residual <= tol,
                    params={"level": lev, "coefficients": did, "step": g.step},
                )
            )
        w = WeightSpec(m=8.0, k=1.0, eta=0.0625)
        rep = check_transport_identity(z, w)
        tol = 10.0 * (g.step + max(g.dx) ** 2)
        out.append(
            VerificationReport(
                id="transport_identity",
                lhs=rep.lhs,
                rhs=rep.rhs,
                margin=-rep.residual,
                tol=tol,
                passed=rep.residual <= tol,
                params={"level": lev, "step": g.step, "m": w.m, "eta": w.eta},
            )
        )
    return out


def _audit_reports(seed: int) -> list[VerificationReport]:
    combos = [
        ("identity", isotropic_diffusion(1.0, 1)),
        ("sin_drift", sin_drift_diffusion(1, base=1.0, amplitude=0.1)),
    ]
    src = SourceSpec("holder_power", {"c": 1.0}, alpha=0.5, l_f=1.5)
    surf = SurfaceSpec("linear", sigma=0.5, l_s=0.5, m_bar=1.0)
    out = []
    for name, d in combos:
        audit = audit_assumptions(d, src, surf, n_samples=200, seed=seed)
        for e in audit.entries:
            out.append(
                VerificationReport(
                    id=f"audit_{e.name}",
                    lhs=e.bound,
                    rhs=e.extremum,
                    margin=e.bound - e.extremum,
                    tol=0.0,
                    passed=e.passed,
                    params={"coefficients": name, "note": e.note or ""},
                )
            )
    return out


def dirichlet_suite_params() -> dict:
    return {
        "c_lower": 1.0, "m_upper": 0.0, "k": 1.0, "m0": 8.0,
        "mu0": 0.2, "eta0": 0.05, "alpha": 1.0, "l_f": 1.0,
    }


def robin_suite_params() -> dict:
    return {
        "c_lower": 1.0, "m_upper": 0.0, "m_flux": 1.0, "c0": 2.5,
        "k": 1.0, "m0": 16.0, "mu0": 0.05, "eta0": 0.025,
        "alpha": 1.0, "l_f": 1.0, "beta": 1.0, "l_s": 2.0,
    }


def _dirichlet_margin_reports(
    seed: int, corpus: int, m_sweep, drift: bool
) -> list[VerificationReport]:
    g = build_grid(0.1, 0.1, [1.0], 40, n_char=16)
    cut = CutoffSpec(t1=0.025, t2=0.05, a1=0.025, a2=0.05)
    params = dirichlet_suite_params()
    if drift:
        d = sin_drift_diffusion(1, base=1.0, amplitude=0.1)
        params = dict(params, c_lower=0.9, m_upper=0.2)
    else:
        d = isotropic_diffusion(1.0, 1)
    fields = [make_corpus_field(g, seed + 100 * i, cut) for i in range(corpus)]

    def one(task):
        idx, m = task
        consts = compute_constants_dirichlet(dict(params, m=m))
        w = WeightSpec(m=m, k=params["k"], eta=params["eta0"])
        reps = verify_dirichlet_estimates(fields[idx], d, w, consts)
        out = []
        for r in reps:
            p = dict(r.params, field=idx, drift=drift)
            out.append(VerificationReport(r.id, r.lhs, r.rhs, r.margin, r.tol, r.passed, p))
        return out

    tasks = [(i, float(m)) for i in range(len(fields)) for m in m_sweep]
    with ThreadPoolExecutor(max_workers=_worker_count(len(tasks))) as ex:
        chunks = list(ex.map(one, tasks))
    return [r for chunk in chunks for r in chunk]


def _robin_difference(sigma: float):
    """Two flux-coupled forward solves differing in their data."""
    g = build_grid(0.025, 0.025, [1.0], 32, n_char=8)
    x = g.centers[0]
    surface = SurfaceSpec(
        "linear", sigma=sigma, l_s=abs(sigma), m_bar=1.0 if sigma else 0.0
    )
    base = 0.5 + 0.2 * np.sin(np.pi * x)
    bump = 0.1 * np.sin(2.0 * np.pi * x) + 0.05
    ages = np.exp(-g.a_nodes)[:, None]
    times = np.exp(-0.5 * g.t_nodes)[:, None]
    mk = lambda prof: Scenario(
        grid=g,
        diffusion=isotropic_diffusion(1.0, 1),
        source=SourceSpec("zero"),
        bc="robin",
        surface=surface,
        initial=ages * prof,
        inflow=times * prof,
    )
    u1 = solve_forward(mk(base)).u
    u2 = solve_forward(mk(base + bump)).u
    cut = CutoffSpec(t1=0.00625, t2=0.0125, a1=0.00625, a2=0.0125)
    edge = make_cutoff(cut, "kappa", g) * make_cutoff(cut, "terminal_chi", g)
    diff = u1.values - u2.values
    w = Field(g, edge[:, :, None] * diff, TraceFlags(True, True, False))
    tr1 = u1.values.reshape(g.node_shape + (-1,))[..., g.boundary_cells]
    tr2 = u2.values.reshape(g.node_shape + (-1,))[..., g.boundary_cells]
    flux = edge[:, :, None] * (
        np.asarray(eval_surface(surface, tr1)) - np.asarray(eval_surface(surface, tr2))
    )
    return w, BoundaryField(g, flux), surface, cut


def _robin_margin_reports(m_sweep, sigmas) -> list[VerificationReport]:
    params = robin_suite_params()
    d = isotropic_diffusion(1.0, 1)
    out = []
    for sigma in sigmas:
        w, g_flux, surface, cut = _robin_difference(sigma)
        p_sigma = dict(params, l_s=abs(sigma), m_flux=1.0 if sigma else 0.0)
        for m in m_sweep:
            consts = compute_constants_robin(dict(p_sigma, m=float(m)))
            wt = WeightSpec(m=float(m), k=p_sigma["k"], eta=p_sigma["eta0"])
            reps = verify_robin_estimates(w, g_flux, d, surface, wt, consts, cut)
            for r in reps:
                p = dict(r.params, sigma=sigma)
                out.append(VerificationReport(r.id, r.lhs, r.rhs, r.margin, r.tol, r.passed, p))
    return out


def run_carleman_suite(
    seed: int = 0,
    corpus: int = 20,
    m_sweep=(8.0, 16.0, 32.0),
    robin_m_sweep=(16.0, 32.0, 64.0),
    sigmas=(0.0, 0.5, 2.0),
    n_product_tuples: int = 100,
    corrupt: str | None = None,
) -> SuiteResult:
    """Full verification sweep: audits, scalar checks, both margin families.

    ``corrupt`` negates the left side of every report whose id matches,
    a fault-injection hook proving the suite actually fails on a broken
    inequality.
    """
    reports: list[VerificationReport] = []
    reports.extend(_audit_reports(seed))
    reports.append(check_elementary_inequality(100_000, seed))
    rng = np.random.default_rng(seed)
    for _ in range(n_product_tuples):
        q = float(rng.uniform(0.05, 0.95))
        m = float(10.0 ** rng.uniform(0.0, 1.8))
        k = float(rng.uniform(0.5, 4.0))
        eta0 = float(10.0 ** rng.uniform(-2.0, 0.3))
        reports.append(check_weight_product_identity(q, m, k, eta0))
    reports.extend(_identity_reports([(8, 8), (16, 16), (32, 32)]))
    reports.extend(_dirichlet_margin_reports(seed, corpus, m_sweep, drift=False))
    reports.extend(_dirichlet_margin_reports(seed, corpus, m_sweep, drift=True))
    reports.extend(_robin_margin_reports(robin_m_sweep, sigmas))

    if corrupt is not None:
        reports = [
            VerificationReport(
                r.id, -r.lhs, r.rhs, -r.lhs - r.rhs, r.tol, -r.lhs - r.rhs >= -r.tol,
                r.params,
            )
            if r.id == corrupt
            else r
            for r in reports
        ]
    failed = sorted({r.id for r in reports if not r.passed})
    return SuiteResult(reports=reports, passed=not failed, failed_ids=failed)


# ---------------------------------------------------------------------------
# uniqueness decay


@dataclass(frozen=True)
class UniquenessResult:
    table: DecayTable
    defect_ratio: float
    params: dict


def run_uniqueness_decay(
    seed: int = 0,
    delta: float = 1e-4,
    m_sweep=(8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0),
    identical: bool = False,
) -> UniquenessResult:
    """Corner-norm decay for a pair of solves differing in inflow only.

    With ``identical`` the two inflows coincide and the corner norms are
    exactly zero: the discrete uniqueness statement.  Otherwise the
    second inflow is a delta-sized perturbation and the corner norm is
    checked against the certified bound for every m.
    """
    g = build_grid(0.1, 0.1, [1.0], 32, n_char=16)
    x = g.centers[0]
    alpha, holder_c = 0.5, 1.0
    l_f = 1.5  # sharp odd-power constant is 2^(1-alpha) ~ 1.414, declared with slack
    src = SourceSpec("holder_power", {"c": holder_c}, alpha=alpha, l_f=l_f)
    base_profile = 0.5 + 0.2 * np.sin(np.pi * x)
    initial = np.exp(-g.a_nodes)[:, None] * base_profile
    inflow1 = np.exp(-0.5 * g.t_nodes)[:, None] * base_profile
    perturb = 0.0 if identical else delta
    inflow2 = inflow1 + perturb * np.sin(np.pi * g.t_nodes / g.t_final)[:, None] * np.sin(
        2.0 * np.pi * x
    )
    d = isotropic_diffusion(1.0, 1)
    mk = lambda infl: Scenario(
        grid=g, diffusion=d, source=src, bc="dirichlet", initial=initial, inflow=infl
    )
    u1 = solve_forward(mk(inflow1)).u
    u2 = solve_forward(mk(inflow2)).u

    cut = CutoffSpec(
        t1=0.025, t2=0.05, a1=0.025, a2=0.05, t3=0.075, a3=0.075
    )
    chi = make_cutoff(cut, "terminal_chi", g)
    diff = u1.values - u2.values
    # nonzero on the a = 0 slice (the inflows differ); the decay check kills
    # that edge with its own lower cutoff
    w = Field(g, chi[:, :, None] * diff)
    consts = compute_constants_dirichlet(dict(dirichlet_suite_params(), alpha=alpha, l_f=l_f))
    table = corner_decay(w, cut, d, consts, {"alpha": alpha, "l_f": l_f}, m_sweep)

    from .operators import DirichletBC, OperatorWorkspace, apply_transport

    ws = OperatorWorkspace(g, d, DirichletBC())
    drift = apply_transport(w, "forward")
    worst = 0.0
    for i in range(g.n_t + 1):
        for j in range(g.n_a + 1):
            defect = ws.apply_slice(w.values[i, j], i, j) - drift.values[i, j]
            mask = np.abs(w.values[i, j]) > 1e-12
            if np.any(mask):
                ratio = np.abs(defect[mask]) / np.abs(w.values[i, j][mask]) ** alpha
                worst = max(worst, float(np.max(ratio)))
    return UniquenessResult(
        table=table,
        defect_ratio=worst,
        params={"seed": seed, "delta": perturb, "alpha": alpha, "l_f": l_f},
    )


# ---------------------------------------------------------------------------
# epidemic demo


@dataclass(frozen=True)
class EpidemicResult:
    times: np.ndarray
    susceptible: np.ndarray
    infected: np.ndarray
    min_value: float


def run_epidemic_demo(
    chi: float = 1.0,
    recovery: float = 0.2,
    n_char: int = 16,
    n_x: int = 16,
) -> EpidemicResult:
    """Two-species renewal demo with transfer coupling and zero-flux walls."""
    g = build_grid(0.5, 0.5, [1.0], n_x, n_char=n_char)
    x = g.centers[0]
    ages = np.exp(-2.0 * g.a_nodes)[:, None]
    susceptible0 = ages * (1.0 + 0.2 * np.sin(np.pi * x))
    infected0 = 0.05 * ages * np.exp(-(((x - 0.5) / 0.15) ** 2))
    kernel = np.exp(-(((g.a_nodes - 0.2) / 0.1) ** 2))
    scn = CoupledScenario(
        grid=g,
        diffusion=isotropic_diffusion(0.05, 1),
        chi=chi,
        recovery=recovery,
        initial_1=susceptible0,
        initial_2=infected0,
        birth_kernel=kernel,
        bc="robin",
    )
    rep = solve_coupled(scn)
    wa = np.ones(g.n_a + 1)
    wa[0] = wa[-1] = 0.5
    def totals(vals):
        slab = np.sum(vals, axis=tuple(range(2, vals.ndim)))  # over cells
        return np.sum(wa * slab, axis=1) * g.cell_volume * g.step
    s_tot = totals(rep.u1.values)
    i_tot = totals(rep.u2.values)
    min_value = float(min(rep.u1.values.min(), rep.u2.values.min()))
    return EpidemicResult(
        times=g.t_nodes.copy(),
        susceptible=s_tot,
        infected=i_tot,
        min_value=min_value,
    )


# ---------------------------------------------------------------------------
# trace-constant study


@dataclass(frozen=True)
class TraceResult:
    rows: list[tuple[int, float]]
    relative_change: float


def run_trace_study(dim: int = 2, n_x_list=(12, 16, 24)) -> TraceResult:
    rows = []
    for n_x in n_x_list:
        g = build_grid(1.0, 1.0, [1.0] * dim, n_x, n_char=2)
        rows.append((n_x, estimate_trace_constant(g)))
    c_last, c_prev = rows[-1][1], rows[-2][1]
    return TraceResult(rows=rows, relative_change=abs(c_last - c_prev) / c_last)
