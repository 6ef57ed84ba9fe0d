import math

import numpy as np
import pytest

from agepde.carleman.trace import estimate_trace_constant
from agepde.errors import PowerIterationStalled
from agepde.grid import build_grid


def interval_grid(n_x):
    return build_grid(0.1, 0.1, [1.0], n_x, n_char=2)


def square_grid(n_x):
    return build_grid(0.1, 0.1, [1.0, 1.0], n_x, n_char=2)


def test_interval_constant_approaches_closed_form_from_below():
    # extremizer of boundary mass against H1 energy on (0, 1) gives
    # (e + 1) / (e - 1); the discrete interior-face form underestimates it
    target = (math.e + 1.0) / (math.e - 1.0)
    vals = [estimate_trace_constant(interval_grid(n)) for n in (16, 32, 64)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v < target for v in vals)
    assert abs(vals[-1] - target) / target <= 0.01


def test_interval_constant_dominates_measure_ratio():
    # the constant function alone realizes |boundary| / |domain| = 2
    for n in (8, 16, 48):
        assert estimate_trace_constant(interval_grid(n)) >= 2.0


def test_square_constant_dominates_measure_ratio():
    vals = [estimate_trace_constant(square_grid(n)) for n in (8, 12)]
    assert all(v >= 4.0 for v in vals)
    assert vals[1] > vals[0]


def test_estimate_is_deterministic():
    a = estimate_trace_constant(interval_grid(32))
    b = estimate_trace_constant(interval_grid(32))
    assert a == b


def test_impossible_budget_raises():
    with pytest.raises(PowerIterationStalled):
        estimate_trace_constant(interval_grid(16), rel_tol=1e-15, max_iter=1)
