"""LP relaxation solving with interchangeable engines.

Two engines satisfy the same contract (optimal vertex solution within the
shared tolerances, deterministic for a fixed input):

  * "simplex" — the in-repo dense bounded-variable simplex
  * "highs"   — scipy.optimize.linprog's dual simplex, used for problem
                sizes the dense tableau cannot handle

"auto" picks highs when the problem is large and scipy is importable,
the in-repo simplex otherwise. Both are exercised against each other in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .milp import MilpProblem, SENSE_EQ, SENSE_GE, SENSE_LE
from . import simplex as _simplex

LP_OPTIMAL = _simplex.LP_OPTIMAL
LP_INFEASIBLE = _simplex.LP_INFEASIBLE
LP_UNBOUNDED = _simplex.LP_UNBOUNDED
LP_NUMERICAL = _simplex.LP_NUMERICAL

# Beyond this many tableau cells the dense engine is impractical.
_SIMPLEX_CELL_LIMIT = 20_000_000


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None
    objective: float | None


class PreparedLp:
    """A problem pre-shaped for repeated relaxation solves.

    Branch-and-bound reuses one PreparedLp across all nodes, passing only
    per-node bound arrays.
    """

    def __init__(self, prob: MilpProblem, engine: str = "auto"):
        self.prob = prob
        self.engine = resolve_engine(prob, engine)
        self._scipy_parts = None
        if self.engine == "highs":
            self._scipy_parts = _build_scipy_parts(prob)

    def solve(self, lower: np.ndarray, upper: np.ndarray) -> LpResult:
        if self.engine == "highs":
            return _solve_highs(self._scipy_parts, self.prob.objective, lower, upper)
        return _solve_simplex_engine(self.prob, lower, upper)


def resolve_engine(prob: MilpProblem, engine: str) -> str:
    if engine not in ("auto", "simplex", "highs"):
        raise ValueError(f"unknown LP engine {engine!r}")
    if engine != "auto":
        return engine
    cells = prob.num_rows * (prob.num_columns + prob.num_rows)
    if cells > _SIMPLEX_CELL_LIMIT:
        return "highs"
    try:
        import scipy.optimize  # noqa: F401
    except ImportError:  # pragma: no cover - scipy is a hard dep in practice
        return "simplex"
    return "highs"


def solve_lp(
    prob: MilpProblem,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    engine: str = "auto",
) -> LpResult:
    """Solve the LP relaxation (integrality dropped) of an assembled problem.

    `lower`/`upper` override the problem's bound arrays, which is how
    branch-and-bound fixes binaries along a branch.
    """
    lo = prob.lower if lower is None else lower
    up = prob.upper if upper is None else upper
    return PreparedLp(prob, engine).solve(lo, up)


def _solve_simplex_engine(prob: MilpProblem, lower, upper) -> LpResult:
    result = _simplex.solve_simplex(
        objective=prob.objective,
        row_coefs=[row.coefs for row in prob.rows],
        senses=[row.sense for row in prob.rows],
        rhs=np.array([row.rhs for row in prob.rows]),
        lower=np.asarray(lower, dtype=float),
        upper=np.asarray(upper, dtype=float),
    )
    return LpResult(result.status, result.x, result.objective)


def _build_scipy_parts(prob: MilpProblem):
    import scipy.sparse as sp

    ub_rows, ub_rhs = [], []
    eq_rows, eq_rhs = [], []
    for row in prob.rows:
        if row.sense == SENSE_EQ:
            eq_rows.append(row)
            eq_rhs.append(row.rhs)
        elif row.sense == SENSE_LE:
            ub_rows.append((row, 1.0))
            ub_rhs.append(row.rhs)
        elif row.sense == SENSE_GE:
            ub_rows.append((row, -1.0))
            ub_rhs.append(-row.rhs)
        else:  # pragma: no cover - senses validated at assembly
            raise ValueError(f"unknown sense {row.sense!r}")

    def matrix(rows_with_sign, signed):
        data, indices, indptr = [], [], [0]
        for item in rows_with_sign:
            row, sign = item if signed else (item, 1.0)
            for col, coef in row.coefs:
                data.append(sign * coef)
                indices.append(col)
            indptr.append(len(data))
        return sp.csr_matrix(
            (data, indices, indptr),
            shape=(len(rows_with_sign), prob.num_columns),
        )

    A_ub = matrix(ub_rows, signed=True) if ub_rows else None
    A_eq = matrix(eq_rows, signed=False) if eq_rows else None
    return (
        A_ub,
        np.array(ub_rhs) if ub_rhs else None,
        A_eq,
        np.array(eq_rhs) if eq_rhs else None,
    )


def _solve_highs(parts, objective, lower, upper) -> LpResult:
    from scipy.optimize import linprog

    A_ub, b_ub, A_eq, b_eq = parts
    res = linprog(
        c=objective,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=np.column_stack([lower, upper]),
        method="highs-ds",
        options={"presolve": True},
    )
    if res.status == 0:
        return LpResult(LP_OPTIMAL, np.asarray(res.x, dtype=float), float(res.fun))
    if res.status == 2:
        return LpResult(LP_INFEASIBLE, None, None)
    if res.status == 3:
        return LpResult(LP_UNBOUNDED, None, None)
    return LpResult(LP_NUMERICAL, None, None)
