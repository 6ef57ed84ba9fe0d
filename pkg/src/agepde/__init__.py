"""Numerical laboratory for a backward age-structured reaction-diffusion problem.

The package couples a characteristic-aligned forward solver with a
verification engine for the weighted lower-bound estimates that certify
backward uniqueness, plus the experiment drivers and a CLI around both.
"""

from .grid import (
    BoundaryField,
    Field,
    Grid,
    TraceFlags,
    build_grid,
    lambda_ramp,
    norm_boundary,
    norm_q,
    restrict,
    ta_norm_sq,
)
from .model import (
    AssumptionAudit,
    DiffusionSpec,
    SourceSpec,
    SurfaceSpec,
    audit_assumptions,
    eval_diffusion,
    eval_source,
    eval_surface,
    isotropic_diffusion,
    sin_drift_diffusion,
)
from .operators import (
    DirichletBC,
    IdentityReport,
    OperatorWorkspace,
    RobinBC,
    apply_A,
    apply_transport,
    check_green_identity,
    check_transport_identity,
    gradient,
)
from .solver import (
    BackwardReport,
    CoupledScenario,
    Scenario,
    SolveReport,
    solve_backward_naive,
    solve_coupled,
    solve_diagonal_forward,
    solve_forward,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryField",
    "Field",
    "Grid",
    "TraceFlags",
    "build_grid",
    "lambda_ramp",
    "norm_boundary",
    "norm_q",
    "restrict",
    "ta_norm_sq",
    "AssumptionAudit",
    "DiffusionSpec",
    "SourceSpec",
    "SurfaceSpec",
    "audit_assumptions",
    "eval_diffusion",
    "eval_source",
    "eval_surface",
    "isotropic_diffusion",
    "sin_drift_diffusion",
    "DirichletBC",
    "IdentityReport",
    "OperatorWorkspace",
    "RobinBC",
    "apply_A",
    "apply_transport",
    "check_green_identity",
    "check_transport_identity",
    "gradient",
    "BackwardReport",
    "CoupledScenario",
    "Scenario",
    "SolveReport",
    "solve_backward_naive",
    "solve_coupled",
    "solve_diagonal_forward",
    "solve_forward",
    "__version__",
]
