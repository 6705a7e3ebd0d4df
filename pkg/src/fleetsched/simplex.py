"""Self-contained bounded-variable primal simplex.

Dense two-phase implementation working directly on general rows
(<=, =, >=) and finite-or-infinite variable bounds. Pivoting is
deterministic: Dantzig's rule with lowest-index tie-breaking, switching to
Bland's rule when the objective stalls long enough to suggest cycling.
A solve whose final solution fails the feasibility check is retried once
under Bland's rule from the start before reporting numerical failure.

Intended for desk-size relaxations (a few thousand columns); larger
problems should go through the HiGHS-backed engine instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .milp import SENSE_EQ, SENSE_GE, SENSE_LE

LP_OPTIMAL = "optimal"
LP_INFEASIBLE = "infeasible"
LP_UNBOUNDED = "unbounded"
LP_NUMERICAL = "numerical-failure"

FEAS_TOL = 1e-7
COST_TOL = 1e-9

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


def solve_simplex(
    objective: np.ndarray,
    row_coefs: list[tuple[tuple[int, float], ...]],
    senses: list[str],
    rhs: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    max_iterations: int | None = None,
) -> SimplexResult:
    """Minimize objective @ x subject to the rows and bounds.

    Returns a basic (vertex) solution. Statuses: optimal, infeasible,
    unbounded, numerical-failure.
    """
    iterations = 0
    for force_bland in (False, True):
        result = _solve_once(
            objective, row_coefs, senses, rhs, lower, upper,
            max_iterations, force_bland,
        )
        iterations += result.iterations
        if result.status in (LP_INFEASIBLE, LP_UNBOUNDED):
            return SimplexResult(result.status, None, None, iterations)
        if result.status == LP_OPTIMAL and _feasible(
            result.x, row_coefs, senses, rhs, lower, upper
        ):
            return SimplexResult(LP_OPTIMAL, result.x, result.objective, iterations)
    return SimplexResult(LP_NUMERICAL, None, None, iterations)


def _feasible(x, row_coefs, senses, rhs, lower, upper) -> bool:
    if x is None:
        return False
    if np.any(x < lower - FEAS_TOL) or np.any(x > upper + FEAS_TOL):
        return False
    for coefs, sense, b in zip(row_coefs, senses, rhs):
        lhs = sum(coef * x[col] for col, coef in coefs)
        if sense == SENSE_LE and lhs > b + FEAS_TOL:
            return False
        if sense == SENSE_GE and lhs < b - FEAS_TOL:
            return False
        if sense == SENSE_EQ and abs(lhs - b) > FEAS_TOL:
            return False
    return True


@dataclass
class _State:
    tableau: np.ndarray  # B^-1 A, dense m x total
    beta: np.ndarray     # current values of the basic variables
    basis: np.ndarray    # variable sitting in each tableau row
    x: np.ndarray        # values of nonbasic variables (basic entries stale)
    lo: np.ndarray
    up: np.ndarray
    status: np.ndarray
    iterations: int
    max_iterations: int
    bland: bool

    def current_x(self) -> np.ndarray:
        out = self.x.copy()
        out[self.basis] = self.beta
        return out


def _solve_once(
    objective, row_coefs, senses, rhs, lower, upper, max_iterations, force_bland
) -> SimplexResult:
    n = objective.shape[0]
    m = len(row_coefs)

    num_slack = sum(1 for s in senses if s != SENSE_EQ)
    total = n + num_slack + m
    art_start = n + num_slack

    A = np.zeros((m, total))
    for i, coefs in enumerate(row_coefs):
        for col, coef in coefs:
            A[i, col] += coef

    lo = np.zeros(total)
    up = np.full(total, np.inf)
    lo[:n] = lower
    up[:n] = upper

    slack_pos = n
    for i, sense in enumerate(senses):
        if sense == SENSE_LE:
            A[i, slack_pos] = 1.0
            slack_pos += 1
        elif sense == SENSE_GE:
            A[i, slack_pos] = -1.0
            slack_pos += 1

    x = np.zeros(total)
    status = np.full(total, _AT_LOWER, dtype=np.int8)
    for j in range(art_start):
        if np.isfinite(lo[j]):
            x[j] = lo[j]
            status[j] = _AT_LOWER
        elif np.isfinite(up[j]):
            x[j] = up[j]
            status[j] = _AT_UPPER
        else:
            x[j] = 0.0
            status[j] = _AT_LOWER  # free variable parked at zero

    residual = np.asarray(rhs, dtype=float) - A[:, :art_start] @ x[:art_start]
    for i in range(m):
        col = art_start + i
        A[i, col] = 1.0 if residual[i] >= 0 else -1.0
        x[col] = abs(residual[i])
        status[col] = _BASIC

    tableau = A.copy()
    for i in range(m):
        if A[i, art_start + i] < 0:
            tableau[i, :] *= -1.0
    basis = np.arange(art_start, art_start + m)
    beta = x[basis].copy()

    if max_iterations is None:
        max_iterations = 200 * (m + n) + 10_000

    state = _State(
        tableau=tableau, beta=beta, basis=basis, x=x, lo=lo, up=up,
        status=status, iterations=0, max_iterations=max_iterations,
        bland=force_bland,
    )

    phase1_cost = np.zeros(total)
    phase1_cost[art_start:] = 1.0
    outcome = _optimize(state, phase1_cost, allow_unbounded=False)
    if outcome == LP_NUMERICAL:
        return SimplexResult(LP_NUMERICAL, None, None, state.iterations)
    phase1_value = float(phase1_cost[state.basis] @ state.beta)
    if phase1_value > FEAS_TOL:
        return SimplexResult(LP_INFEASIBLE, None, None, state.iterations)

    # Pin artificials at zero; degenerate basic ones may remain in the basis
    # but the fixed bounds keep them from moving.
    state.lo[art_start:] = 0.0
    state.up[art_start:] = 0.0
    for j in range(art_start, total):
        if state.status[j] != _BASIC:
            state.x[j] = 0.0

    phase2_cost = np.zeros(total)
    phase2_cost[:n] = objective
    state.bland = force_bland
    outcome = _optimize(state, phase2_cost, allow_unbounded=True)
    if outcome == LP_NUMERICAL:
        return SimplexResult(LP_NUMERICAL, None, None, state.iterations)
    if outcome == LP_UNBOUNDED:
        return SimplexResult(LP_UNBOUNDED, None, None, state.iterations)

    solution = state.current_x()[:n].copy()
    value = float(objective @ solution)
    return SimplexResult(LP_OPTIMAL, solution, value, state.iterations)


def _optimize(state: _State, cost: np.ndarray, allow_unbounded: bool) -> str:
    stall = 0
    initial_bland = state.bland
    best_objective = np.inf

    while True:
        if state.iterations >= state.max_iterations:
            return LP_NUMERICAL
        state.iterations += 1

        y = cost[state.basis] @ state.tableau
        reduced = cost - y
        entering, direction = _pick_entering(state, reduced)
        if entering is None:
            return LP_OPTIMAL

        step, leaving_row, bound_flip = _ratio_test(state, entering, direction)
        if step is None:
            return LP_UNBOUNDED if allow_unbounded else LP_NUMERICAL

        objective_now = float(cost[state.basis] @ state.beta)
        _apply_pivot(state, entering, direction, step, leaving_row, bound_flip)

        if objective_now < best_objective - 1e-12:
            stall = 0
            state.bland = initial_bland
            best_objective = objective_now
        else:
            stall += 1
            if stall > 2 * (len(state.basis) + 50):
                state.bland = True


def _pick_entering(state: _State, reduced: np.ndarray) -> tuple[int | None, float]:
    """Entering column and movement direction (+1 upward, -1 downward)."""
    status, lo, up = state.status, state.lo, state.up
    candidate = (status != _BASIC) & (lo != up)

    can_increase = candidate & (
        (status == _AT_LOWER) | ~np.isfinite(up)
    )
    can_decrease = candidate & (
        (status == _AT_UPPER) | ~np.isfinite(lo)
    )
    improve_up = can_increase & (reduced < -COST_TOL)
    improve_down = can_decrease & (reduced > COST_TOL)
    eligible = improve_up | improve_down
    if not eligible.any():
        return None, 0.0

    if state.bland:
        j = int(np.flatnonzero(eligible)[0])
    else:
        score = np.where(eligible, -np.abs(reduced), np.inf)
        j = int(np.argmin(score))  # argmin takes the lowest index on ties
    direction = 1.0 if improve_up[j] else -1.0
    return j, direction


def _ratio_test(
    state: _State, entering: int, direction: float
) -> tuple[float | None, int | None, bool]:
    """Largest feasible step; returns (step, leaving_row, bound_flip)."""
    column = state.tableau[:, entering] * direction
    beta, basis = state.beta, state.basis
    lo_b = state.lo[basis]
    up_b = state.up[basis]

    dec = column > FEAS_TOL
    inc = column < -FEAS_TOL
    steps = np.full(len(beta), np.inf)
    with np.errstate(invalid="ignore", divide="ignore"):
        dec_steps = (beta - lo_b) / np.where(dec, column, 1.0)
        inc_steps = (up_b - beta) / np.where(inc, -column, 1.0)
    steps[dec & np.isfinite(lo_b)] = dec_steps[dec & np.isfinite(lo_b)]
    steps[inc & np.isfinite(up_b)] = inc_steps[inc & np.isfinite(up_b)]
    steps = np.maximum(steps, 0.0)

    leaving_row: int | None = None
    best_step = np.inf
    if steps.size:
        row = int(np.argmin(steps))
        if np.isfinite(steps[row]):
            best_step = float(steps[row])
            leaving_row = row
            if state.bland:
                # Bland: lowest basic variable index among the blocking rows.
                ties = np.flatnonzero(steps <= best_step + 1e-12)
                leaving_row = int(min(ties, key=lambda r: basis[r]))
            else:
                # Largest pivot magnitude among ties, then lowest row index.
                ties = np.flatnonzero(steps <= best_step + 1e-12)
                best_pivot = 0.0
                for r in ties:
                    if abs(column[r]) > best_pivot + 1e-12:
                        best_pivot = abs(column[r])
                        leaving_row = int(r)
            best_step = float(steps[leaving_row])

    span = state.up[entering] - state.lo[entering]
    if np.isfinite(span) and span < best_step - 1e-12:
        return float(span), None, True

    if not np.isfinite(best_step):
        return None, None, False
    return best_step, leaving_row, False


def _apply_pivot(
    state: _State,
    entering: int,
    direction: float,
    step: float,
    leaving_row: int | None,
    bound_flip: bool,
) -> None:
    column = state.tableau[:, entering]
    state.beta -= direction * step * column

    if bound_flip or leaving_row is None:
        if direction > 0:
            state.x[entering] = state.up[entering]
            state.status[entering] = _AT_UPPER
        else:
            state.x[entering] = state.lo[entering]
            state.status[entering] = _AT_LOWER
        return

    leaving = state.basis[leaving_row]
    pivot = column[leaving_row]
    entering_value = state.x[entering] + direction * step

    # The leaving variable lands on the bound that blocked the move.
    if direction * pivot > 0:
        state.x[leaving] = state.lo[leaving]
        state.status[leaving] = _AT_LOWER
    else:
        state.x[leaving] = state.up[leaving]
        state.status[leaving] = _AT_UPPER

    state.basis[leaving_row] = entering
    state.status[entering] = _BASIC
    state.beta[leaving_row] = entering_value

    prow = state.tableau[leaving_row, :] / pivot
    state.tableau[leaving_row, :] = prow
    col = state.tableau[:, entering].copy()
    col[leaving_row] = 0.0
    state.tableau -= np.outer(col, prow)
