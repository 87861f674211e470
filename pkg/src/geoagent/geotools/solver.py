"""Mini-DSL solver: linear equations in one unknown, and box centroids.

Two program forms are accepted:

    solve_linear(a, b)        -> {"x": -b/a}   solving a*x + b = 0
    centroid(x1, y1, x2, y2)  -> {"cx": (x1+x2)/2, "cy": (y1+y2)/2}

Deliberately not a symbolic-algebra engine; the corpus only needs these
two forms.
"""

from __future__ import annotations

import re


class SolverError(Exception):
    code = "SolverError"


class SolverParseError(SolverError):
    code = "ParseError"


class SingularEquation(SolverError):
    code = "SingularEquation"


_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_SOLVE_RE = re.compile(
    rf"^\s*solve_linear\s*\(\s*({_NUMBER})\s*,\s*({_NUMBER})\s*\)\s*$"
)
_CENTROID_RE = re.compile(
    rf"^\s*centroid\s*\(\s*({_NUMBER})\s*,\s*({_NUMBER})\s*,"
    rf"\s*({_NUMBER})\s*,\s*({_NUMBER})\s*\)\s*$"
)


def solver_eval(program: str) -> dict[str, float]:
    """Evaluate a solver program.

    Raises:
        SolverParseError: Program matches neither DSL form.
        SingularEquation: solve_linear with a = 0.
    """
    match = _SOLVE_RE.match(program or "")
    if match:
        a = float(match.group(1))
        b = float(match.group(2))
        if a == 0.0:
            raise SingularEquation(f"a=0 in solve_linear({a}, {b})")
        return {"x": -b / a}

    match = _CENTROID_RE.match(program or "")
    if match:
        x1, y1, x2, y2 = (float(match.group(i)) for i in range(1, 5))
        return {"cx": (x1 + x2) / 2.0, "cy": (y1 + y2) / 2.0}

    raise SolverParseError(
        "program must be solve_linear(a, b) or centroid(x1, y1, x2, y2)"
    )
