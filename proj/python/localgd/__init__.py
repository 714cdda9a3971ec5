"""Local gradient descent simulator with bound checks."""

import json as _json

from ._localgd import (
    ArgumentError,
    CheckReport,
    DivergenceError,
    ObjectiveSuite,
    ParseError,
    PreconditionError,
    ReferenceSolution,
    SparseDataset,
    TrajectoryRecord,
    check_all,
    corollary_bound,
    load_libsvm,
    logistic_suite,
    parse_libsvm,
    quadratic_suite,
    run_local_gd,
    serialize_libsvm,
    solve_reference,
    synthetic_suite,
    theorem1_bound,
)
from ._localgd import plan as _plan


def plan(epsilon, L, sigma2, r0sq, gamma=None):
    """Communication plan as a dict (continuous and rounded values)."""
    return _json.loads(_plan(epsilon, L, sigma2, r0sq, gamma))
