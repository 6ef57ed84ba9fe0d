"""Weighted-estimate verification: weights, constants, margins, decay."""

from .constants import (
    Condition,
    DirichletConstants,
    RobinConstants,
    compute_constants_dirichlet,
    compute_constants_robin,
    horizon_choice,
)
from .trace import estimate_trace_constant
from .verify import (
    DecayRow,
    DecayTable,
    VerificationReport,
    check_elementary_inequality,
    check_weight_product_identity,
    corner_decay,
    verify_dirichlet_estimates,
    verify_robin_estimates,
)
from .weights import CutoffSpec, WeightSpec, make_cutoff, smoothstep, weight_field

__all__ = [
    "Condition",
    "DirichletConstants",
    "RobinConstants",
    "compute_constants_dirichlet",
    "compute_constants_robin",
    "horizon_choice",
    "estimate_trace_constant",
    "DecayRow",
    "DecayTable",
    "VerificationReport",
    "check_elementary_inequality",
    "check_weight_product_identity",
    "corner_decay",
    "verify_dirichlet_estimates",
    "verify_robin_estimates",
    "CutoffSpec",
    "WeightSpec",
    "make_cutoff",
    "smoothstep",
    "weight_field",
]
