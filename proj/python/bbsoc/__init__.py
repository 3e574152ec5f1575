"""Bang-bang and singular optimal control by multiple-domain LGR collocation."""

import json

from ._core import (
    BbsocError,
    builtin_problems,
    differentiation_matrix,
    jump_coefficients,
    lgr_rule,
    minmod,
    trajectory_csv,
)
from . import _core

__all__ = [
    "BbsocError",
    "builtin_problems",
    "differentiation_matrix",
    "jump_coefficients",
    "lgr_rule",
    "minmod",
    "solve",
    "solve_text",
    "trajectory_csv",
    "verify",
]


def solve(problem, **options):
    """Solve a built-in problem or a problem file and return the report as a dict.

    Options: nlp_tol, nlp_max_iterations, mesh_tol, eta, mu, epsilon, sigma,
    max_iterations, initial_intervals, initial_order, detect_structure.
    """
    return json.loads(_core.solve_json(str(problem), **options))


def solve_text(text, **options):
    """Solve a problem given as problem-file JSON text."""
    if not isinstance(text, str):
        text = json.dumps(text)
    return json.loads(_core.solve_problem_text_json(text, **options))


def verify(problem):
    """Acceptance checks of a built-in benchmark as a list of dicts."""
    return [
        {"name": name, "passed": passed, "detail": detail}
        for name, passed, detail in _core.verify(problem)
    ]
