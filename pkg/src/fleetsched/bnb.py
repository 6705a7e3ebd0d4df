"""Deterministic branch-and-bound over the LP relaxation.

Branches only on binary columns by pinning a column's bounds to 0 or 1.
Node selection (best-bound or depth-first) and branch-variable selection
(most-fractional or first-fractional, ties to the lowest column index) are
fully deterministic, so a fixed problem and config always reproduce the
same incumbent and objective.

An optional polisher callback lets callers replace a freshly found
integral incumbent with an exact-arithmetic equivalent before it is
accepted; the fleet pipeline uses this to strip LP round-off from the
continuous energy and grid-purchase variables.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lp import LP_INFEASIBLE, LP_NUMERICAL, LP_OPTIMAL, LP_UNBOUNDED, PreparedLp
from .milp import MilpProblem, evaluate_rows

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE_GAP = "feasible-gap"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_LIMIT = "limit-hit"

INTEGRALITY_TOL = 1e-7
_PRUNE_TOL = 1e-9

ProgressCallback = Callable[[int, float | None, float, float], None]
Polisher = Callable[[np.ndarray], "np.ndarray | None"]


@dataclass
class SolveConfig:
    """Knobs for one branch-and-bound run."""

    abs_gap_tol: float = 1e-6
    rel_gap_tol: float = 0.0
    node_limit: int | None = None
    time_limit: float | None = None
    branch_rule: str = "most-fractional"
    node_order: str = "best-bound"
    lp_engine: str = "auto"
    progress_callback: ProgressCallback | None = None
    progress_every: int = 50

    def __post_init__(self) -> None:
        if self.abs_gap_tol < 0 or self.rel_gap_tol < 0:
            raise ValueError("gap tolerances must be nonnegative")
        if self.branch_rule not in ("most-fractional", "first-fractional"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if self.node_order not in ("best-bound", "depth-first"):
            raise ValueError(f"unknown node order {self.node_order!r}")


@dataclass
class MipResult:
    """Outcome of a branch-and-bound run (minimization)."""

    status: str
    values: np.ndarray | None
    objective: float | None
    bound: float
    gap: float | None
    nodes: int
    seconds: float


@dataclass
class _Node:
    parent: "_Node | None"
    fixed_col: int | None
    fixed_val: float | None
    bound: float  # LP bound inherited from the parent at creation
    depth: int
    seq: int

    def bound_arrays(self, root_lower, root_upper):
        lower = root_lower.copy()
        upper = root_upper.copy()
        node = self
        while node.fixed_col is not None:
            lower[node.fixed_col] = node.fixed_val
            upper[node.fixed_col] = node.fixed_val
            node = node.parent
        return lower, upper


class _OpenNodes:
    """Open-node pool with deterministic ordering and a live minimum bound.

    Best-bound breaks equal bounds toward the newest node, so plateaus of
    tied bounds are explored depth-first instead of breadth-first.
    """

    def __init__(self, order: str):
        self.order = order
        self.heap: list = []           # best-bound: (bound, -seq, node)
        self.stack: list = []          # depth-first
        self.bound_heap: list = []     # (bound, seq) mirror for min tracking
        self.closed: set[int] = set()

    def push(self, node: _Node) -> None:
        if self.order == "best-bound":
            heapq.heappush(self.heap, (node.bound, -node.seq, node))
        else:
            self.stack.append(node)
        heapq.heappush(self.bound_heap, (node.bound, node.seq))

    def pop(self) -> _Node:
        if self.order == "best-bound":
            _, _, node = heapq.heappop(self.heap)
        else:
            node = self.stack.pop()
        self.closed.add(node.seq)
        return node

    def __len__(self) -> int:
        return len(self.heap) if self.order == "best-bound" else len(self.stack)

    def min_bound(self) -> float | None:
        while self.bound_heap and self.bound_heap[0][1] in self.closed:
            heapq.heappop(self.bound_heap)
        return self.bound_heap[0][0] if self.bound_heap else None


def warm_start_check(
    prob: MilpProblem, values: np.ndarray, tol: float = INTEGRALITY_TOL
) -> bool:
    """True iff `values` satisfies bounds, rows and integrality within tol."""
    values = np.asarray(values, dtype=float)
    if values.shape != (prob.num_columns,):
        raise ValueError(
            f"warm start has {values.shape} values, problem has "
            f"{prob.num_columns} columns"
        )
    if np.any(values < prob.lower - tol) or np.any(values > prob.upper + tol):
        return False
    binaries = values[prob.is_binary]
    if binaries.size and np.max(np.abs(binaries - np.round(binaries))) > tol:
        return False
    return not evaluate_rows(prob, values, tol=tol)


def branch_and_bound(
    prob: MilpProblem,
    config: SolveConfig | None = None,
    warm_start: np.ndarray | None = None,
    polisher: Polisher | None = None,
) -> MipResult:
    """Solve the MILP exactly (to the configured gap) by branch-and-bound."""
    cfg = config or SolveConfig()
    start = time.perf_counter()

    incumbent: np.ndarray | None = None
    incumbent_obj = np.inf
    if warm_start is not None and warm_start_check(prob, warm_start):
        candidate = np.asarray(warm_start, dtype=float).copy()
        candidate[prob.is_binary] = np.round(candidate[prob.is_binary])
        if polisher is not None:
            polished = polisher(candidate)
            if polished is not None:
                candidate = polished
        incumbent = candidate
        incumbent_obj = float(prob.objective @ candidate)

    lp = PreparedLp(prob, cfg.lp_engine)
    binary_cols = np.flatnonzero(prob.is_binary)

    seq = 0
    root = _Node(parent=None, fixed_col=None, fixed_val=None,
                 bound=-np.inf, depth=0, seq=seq)
    open_nodes = _OpenNodes(cfg.node_order)
    open_nodes.push(root)

    nodes_explored = 0
    status: str | None = None

    def elapsed() -> float:
        return time.perf_counter() - start

    def current_bound() -> float:
        open_min = open_nodes.min_bound()
        if open_min is None:
            return incumbent_obj if incumbent is not None else np.inf
        return min(open_min, incumbent_obj)

    while len(open_nodes):
        if cfg.node_limit is not None and nodes_explored >= cfg.node_limit:
            status = STATUS_LIMIT
            break
        if cfg.time_limit is not None and elapsed() > cfg.time_limit:
            status = STATUS_LIMIT
            break

        node = open_nodes.pop()
        # A node queued before a better incumbent arrived may now be dead.
        if incumbent is not None and node.bound >= incumbent_obj - _PRUNE_TOL:
            continue

        lower, upper = node.bound_arrays(prob.lower, prob.upper)
        nodes_explored += 1
        result = lp.solve(lower, upper)

        if cfg.progress_callback and nodes_explored % cfg.progress_every == 0:
            cfg.progress_callback(
                nodes_explored,
                None if incumbent is None else incumbent_obj,
                current_bound(),
                elapsed(),
            )

        if result.status == LP_INFEASIBLE:
            continue
        if result.status == LP_UNBOUNDED:
            if node.depth == 0:
                return MipResult(STATUS_UNBOUNDED, None, None, -np.inf,
                                 None, nodes_explored, elapsed())
            continue
        if result.status == LP_NUMERICAL:
            raise RuntimeError(
                f"LP engine reported numerical failure at node {node.seq}"
            )
        assert result.status == LP_OPTIMAL

        lp_obj = result.objective
        if incumbent is not None and lp_obj >= incumbent_obj - _PRUNE_TOL:
            continue

        x = result.x
        frac = np.abs(x[binary_cols] - np.round(x[binary_cols]))
        if frac.size == 0 or float(frac.max()) <= INTEGRALITY_TOL:
            candidate = x.copy()
            candidate[binary_cols] = np.round(candidate[binary_cols])
            if polisher is not None:
                polished = polisher(candidate)
                if polished is not None:
                    candidate = polished
            cand_obj = float(prob.objective @ candidate)
            if cand_obj < incumbent_obj:
                incumbent = candidate
                incumbent_obj = cand_obj
                if _gap_met(cfg, incumbent_obj, current_bound()):
                    status = _gap_status(cfg, incumbent_obj, current_bound())
                    break
            continue

        branch_col = _pick_branch_column(cfg.branch_rule, binary_cols, frac)

        # Children inherit this node's LP bound. The 1-branch is pushed
        # last so it comes off first under both node orders (newest wins
        # best-bound ties; the stack pops the last push).
        for value in (0.0, 1.0):
            seq += 1
            child = _Node(parent=node, fixed_col=int(branch_col),
                          fixed_val=value, bound=lp_obj,
                          depth=node.depth + 1, seq=seq)
            open_nodes.push(child)

        if incumbent is not None and _gap_met(cfg, incumbent_obj, current_bound()):
            status = _gap_status(cfg, incumbent_obj, current_bound())
            break

    seconds = elapsed()

    if status is None:
        # Tree exhausted.
        if incumbent is None:
            return MipResult(STATUS_INFEASIBLE, None, None, np.inf, None,
                             nodes_explored, seconds)
        status = STATUS_OPTIMAL
        bound = incumbent_obj
        gap = 0.0
    else:
        bound = current_bound()
        gap = None if incumbent is None else incumbent_obj - bound

    if status == STATUS_LIMIT and incumbent is None:
        return MipResult(STATUS_LIMIT, None, None, bound, None,
                         nodes_explored, seconds)

    if incumbent is not None and not warm_start_check(prob, incumbent):
        raise RuntimeError("incumbent failed the final feasibility check")

    return MipResult(
        status=status,
        values=incumbent,
        objective=None if incumbent is None else incumbent_obj,
        bound=bound,
        gap=gap,
        nodes=nodes_explored,
        seconds=seconds,
    )


def _gap_met(cfg: SolveConfig, incumbent_obj: float, bound: float) -> bool:
    gap = incumbent_obj - bound
    if gap <= cfg.abs_gap_tol:
        return True
    if cfg.rel_gap_tol > 0:
        return gap <= cfg.rel_gap_tol * max(abs(incumbent_obj), 1e-12)
    return False


def _gap_status(cfg: SolveConfig, incumbent_obj: float, bound: float) -> str:
    gap = incumbent_obj - bound
    if gap <= cfg.abs_gap_tol:
        return STATUS_OPTIMAL
    return STATUS_FEASIBLE_GAP


def _pick_branch_column(rule: str, binary_cols: np.ndarray, frac: np.ndarray) -> int:
    fractional = frac > INTEGRALITY_TOL
    if rule == "first-fractional":
        pos = int(np.flatnonzero(fractional)[0])
        return int(binary_cols[pos])
    # most-fractional: distance to the nearest integer, lowest index on ties
    score = np.where(fractional, frac, -np.inf)
    pos = int(np.argmax(score))
    return int(binary_cols[pos])
