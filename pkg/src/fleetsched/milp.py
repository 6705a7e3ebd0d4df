"""Sparse MILP assembly for the joint route-assignment / charging problem.

The decision variables, in column order:

    X[i,k,t]  binary, bus k serves trip i during step t
    Z[k,t]    binary, bus k is charging during step t
    Y[n,k,t]  binary, bus k occupies charger n during step t
    E[k,p]    continuous, energy of bus k at fencepost p = 0..T (kWh)
    V[t]      continuous, grid energy purchased during step t (kWh)
    S[t]      continuous, solar energy drawn during step t (kWh)

Within each kind, indices are ordered lexicographically in the tuple shown.
Each constraint row carries a tag naming the constraint family it encodes;
bound-level restrictions (energy limits, solar caps, fixed out-of-window X,
grid nonnegativity) are tagged the same way on the bound table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FleetInstance, price_vector

# Constraint-family tags. Families i/l and the grid/X fixings are expressed
# as variable bounds rather than rows.
TAG_EXCLUSIVITY = "1b"
TAG_COVERAGE = "1c"
TAG_CONTINUITY = "1d"
TAG_CHARGER_CAP = "1e"
TAG_CHARGER_COUPLING = "1f"
TAG_ENERGY_DYNAMICS = "1g"
TAG_POWER_BALANCE = "1h"
TAG_ENERGY_BOUNDS = "1i"
TAG_SOLAR_CAP = "1l"
TAG_E_INITIAL = "1m"
TAG_E_FINAL = "1n"
TAG_FIX_X = "fix-X-outside-window"
TAG_V_NONNEG = "V-nonneg"

SENSE_LE = "<="
SENSE_EQ = "="
SENSE_GE = ">="


@dataclass(frozen=True)
class VariableIndex:
    """Dense bijection between (kind, indices) and flat column numbers."""

    num_trips: int
    num_buses: int
    num_chargers: int
    num_steps: int

    @property
    def x_offset(self) -> int:
        return 0

    @property
    def z_offset(self) -> int:
        return self.num_trips * self.num_buses * self.num_steps

    @property
    def y_offset(self) -> int:
        return self.z_offset + self.num_buses * self.num_steps

    @property
    def e_offset(self) -> int:
        return self.y_offset + self.num_chargers * self.num_buses * self.num_steps

    @property
    def v_offset(self) -> int:
        return self.e_offset + self.num_buses * (self.num_steps + 1)

    @property
    def s_offset(self) -> int:
        return self.v_offset + self.num_steps

    @property
    def num_columns(self) -> int:
        return self.s_offset + self.num_steps

    @property
    def num_binary(self) -> int:
        """Binary columns occupy the prefix [0, e_offset)."""
        return self.e_offset

    def x(self, i: int, k: int, t: int) -> int:
        return (i * self.num_buses + k) * self.num_steps + t

    def z(self, k: int, t: int) -> int:
        return self.z_offset + k * self.num_steps + t

    def y(self, n: int, k: int, t: int) -> int:
        return self.y_offset + (n * self.num_buses + k) * self.num_steps + t

    def e(self, k: int, p: int) -> int:
        return self.e_offset + k * (self.num_steps + 1) + p

    def v(self, t: int) -> int:
        return self.v_offset + t

    def s(self, t: int) -> int:
        return self.s_offset + t

    def describe(self, col: int) -> str:
        """Human-readable name of a column, e.g. 'X[i=0,k=1,t=7]'."""
        T = self.num_steps
        if col < 0 or col >= self.num_columns:
            raise IndexError(f"column {col} outside 0..{self.num_columns - 1}")
        if col < self.z_offset:
            i, rem = divmod(col, self.num_buses * T)
            k, t = divmod(rem, T)
            return f"X[i={i},k={k},t={t}]"
        if col < self.y_offset:
            k, t = divmod(col - self.z_offset, T)
            return f"Z[k={k},t={t}]"
        if col < self.e_offset:
            n, rem = divmod(col - self.y_offset, self.num_buses * T)
            k, t = divmod(rem, T)
            return f"Y[n={n},k={k},t={t}]"
        if col < self.v_offset:
            k, p = divmod(col - self.e_offset, T + 1)
            return f"E[k={k},p={p}]"
        if col < self.s_offset:
            return f"V[t={col - self.v_offset}]"
        return f"S[t={col - self.s_offset}]"

    @classmethod
    def for_instance(cls, inst: FleetInstance) -> "VariableIndex":
        return cls(
            num_trips=len(inst.trips),
            num_buses=len(inst.buses),
            num_chargers=len(inst.chargers),
            num_steps=inst.grid.num_steps,
        )


@dataclass(frozen=True)
class Row:
    """One sparse constraint row: sum(coef * column) <sense> rhs."""

    tag: str
    name: str
    coefs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass
class MilpProblem:
    """Assembled objective, rows, bounds and integrality markers."""

    objective: np.ndarray
    rows: list[Row]
    lower: np.ndarray
    upper: np.ndarray
    is_binary: np.ndarray
    bound_tags: dict[int, str]
    index: VariableIndex

    @property
    def num_columns(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def row_counts_by_tag(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for row in self.rows:
            counts[row.tag] = counts.get(row.tag, 0) + 1
        return counts


def build_objective(inst: FleetInstance, idx: VariableIndex) -> np.ndarray:
    """Daily cost: price of each step applied to its grid purchase."""
    c = np.zeros(idx.num_columns)
    for t, price in enumerate(price_vector(inst)):
        c[idx.v(t)] = price
    return c


def build_exclusivity(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """Per bus and step: charging plus all trip-service indicators <= 1."""
    rows = []
    for k in range(idx.num_buses):
        for t in range(idx.num_steps):
            coefs = [(idx.z(k, t), 1.0)]
            coefs += [(idx.x(i, k, t), 1.0) for i in range(idx.num_trips)]
            rows.append(
                Row(
                    tag=TAG_EXCLUSIVITY,
                    name=f"1b[k={k},t={t}]",
                    coefs=tuple(coefs),
                    sense=SENSE_LE,
                    rhs=1.0,
                )
            )
    return rows


def build_coverage(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """Every trip-window step is served by exactly one bus, the same bus
    throughout the window."""
    rows = []
    for i, trip in enumerate(inst.trips):
        for t in range(trip.start_step, trip.end_step + 1):
            coefs = [(idx.x(i, k, t), 1.0) for k in range(idx.num_buses)]
            rows.append(
                Row(
                    tag=TAG_COVERAGE,
                    name=f"1c[i={i},t={t}]",
                    coefs=tuple(coefs),
                    sense=SENSE_EQ,
                    rhs=1.0,
                )
            )
    for i, trip in enumerate(inst.trips):
        for k in range(idx.num_buses):
            for t in range(trip.start_step, trip.end_step):
                rows.append(
                    Row(
                        tag=TAG_CONTINUITY,
                        name=f"1d[i={i},k={k},t={t}]",
                        coefs=((idx.x(i, k, t + 1), 1.0), (idx.x(i, k, t), -1.0)),
                        sense=SENSE_EQ,
                        rhs=0.0,
                    )
                )
    return rows


def fixed_x_columns(inst: FleetInstance, idx: VariableIndex) -> list[int]:
    """Columns X[i,k,t] with t outside trip i's window, pinned to zero."""
    cols = []
    for i, trip in enumerate(inst.trips):
        for k in range(idx.num_buses):
            for t in range(idx.num_steps):
                if not trip.covers(t):
                    cols.append(idx.x(i, k, t))
    return cols


def build_charger_rows(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """Charger capacity (one bus per charger-step) and the occupancy/charging
    coupling (a charging bus sits at exactly one charger)."""
    rows = []
    for n in range(idx.num_chargers):
        for t in range(idx.num_steps):
            coefs = [(idx.y(n, k, t), 1.0) for k in range(idx.num_buses)]
            rows.append(
                Row(
                    tag=TAG_CHARGER_CAP,
                    name=f"1e[n={n},t={t}]",
                    coefs=tuple(coefs),
                    sense=SENSE_LE,
                    rhs=1.0,
                )
            )
    for k in range(idx.num_buses):
        for t in range(idx.num_steps):
            coefs = [(idx.y(n, k, t), 1.0) for n in range(idx.num_chargers)]
            coefs.append((idx.z(k, t), -1.0))
            rows.append(
                Row(
                    tag=TAG_CHARGER_COUPLING,
                    name=f"1f[k={k},t={t}]",
                    coefs=tuple(coefs),
                    sense=SENSE_EQ,
                    rhs=0.0,
                )
            )
    return rows


def build_energy_dynamics(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """Battery bookkeeping: each step adds charged energy and removes the
    per-step draw of whichever trip the bus is serving."""
    rows = []
    for k in range(idx.num_buses):
        for t in range(idx.num_steps):
            coefs = [(idx.e(k, t + 1), 1.0), (idx.e(k, t), -1.0)]
            for n, charger in enumerate(inst.chargers):
                coefs.append((idx.y(n, k, t), -charger.energy_per_step))
            for i, trip in enumerate(inst.trips):
                if trip.energy_per_step != 0.0:
                    coefs.append((idx.x(i, k, t), trip.energy_per_step))
            rows.append(
                Row(
                    tag=TAG_ENERGY_DYNAMICS,
                    name=f"1g[k={k},t={t}]",
                    coefs=tuple(coefs),
                    sense=SENSE_EQ,
                    rhs=0.0,
                )
            )
    return rows


def build_power_balance(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """All charging energy in a step is sourced from grid purchase plus solar."""
    rows = []
    for t in range(idx.num_steps):
        coefs = []
        for n, charger in enumerate(inst.chargers):
            for k in range(idx.num_buses):
                coefs.append((idx.y(n, k, t), charger.energy_per_step))
        coefs.append((idx.v(t), -1.0))
        coefs.append((idx.s(t), -1.0))
        rows.append(
            Row(
                tag=TAG_POWER_BALANCE,
                name=f"1h[t={t}]",
                coefs=tuple(coefs),
                sense=SENSE_EQ,
                rhs=0.0,
            )
        )
    return rows


def build_boundary(inst: FleetInstance, idx: VariableIndex) -> list[Row]:
    """Day-repeatable energy: each bus starts and ends at its initial level."""
    rows = []
    for k, bus in enumerate(inst.buses):
        rows.append(
            Row(
                tag=TAG_E_INITIAL,
                name=f"1m[k={k}]",
                coefs=((idx.e(k, 0), 1.0),),
                sense=SENSE_EQ,
                rhs=bus.e_init,
            )
        )
    for k, bus in enumerate(inst.buses):
        rows.append(
            Row(
                tag=TAG_E_FINAL,
                name=f"1n[k={k}]",
                coefs=((idx.e(k, idx.num_steps), 1.0),),
                sense=SENSE_EQ,
                rhs=bus.e_init,
            )
        )
    return rows


def build_bounds(
    inst: FleetInstance, idx: VariableIndex
) -> tuple[np.ndarray, np.ndarray, dict[int, str]]:
    """Variable bounds: binaries in [0,1], battery limits on E, solar caps on
    S, nonnegative grid purchase, and out-of-window X pinned to zero."""
    n = idx.num_columns
    lower = np.zeros(n)
    upper = np.ones(n)
    tags: dict[int, str] = {}

    for k, bus in enumerate(inst.buses):
        for p in range(idx.num_steps + 1):
            col = idx.e(k, p)
            lower[col] = bus.e_min
            upper[col] = bus.e_max
            tags[col] = TAG_ENERGY_BOUNDS

    for t in range(idx.num_steps):
        col = idx.v(t)
        lower[col] = 0.0
        upper[col] = np.inf
        tags[col] = TAG_V_NONNEG

    for t in range(idx.num_steps):
        col = idx.s(t)
        lower[col] = 0.0
        upper[col] = inst.solar[t]
        tags[col] = TAG_SOLAR_CAP

    for col in fixed_x_columns(inst, idx):
        upper[col] = 0.0
        tags[col] = TAG_FIX_X

    return lower, upper, tags


def assemble(inst: FleetInstance) -> MilpProblem:
    """Assemble the full problem in a fixed, documented row order."""
    from .model import validate_instance

    defects = validate_instance(inst)
    if defects:
        raise ValueError(
            "instance has defects: " + "; ".join(defects[:5])
            + ("; ..." if len(defects) > 5 else "")
        )

    idx = VariableIndex.for_instance(inst)
    rows: list[Row] = []
    rows += build_exclusivity(inst, idx)
    rows += build_coverage(inst, idx)
    rows += build_charger_rows(inst, idx)
    rows += build_energy_dynamics(inst, idx)
    rows += build_power_balance(inst, idx)
    rows += build_boundary(inst, idx)

    lower, upper, bound_tags = build_bounds(inst, idx)
    is_binary = np.zeros(idx.num_columns, dtype=bool)
    is_binary[: idx.num_binary] = True

    return MilpProblem(
        objective=build_objective(inst, idx),
        rows=rows,
        lower=lower,
        upper=upper,
        is_binary=is_binary,
        bound_tags=bound_tags,
        index=idx,
    )


def debug_dump(prob: MilpProblem) -> str:
    """Human-readable listing: one line per row, then the tagged bounds."""
    idx = prob.index
    lines = []
    for row in prob.rows:
        terms = " + ".join(
            f"{coef:g}*{idx.describe(col)}" for col, coef in row.coefs
        )
        lines.append(f"{row.name}: {terms} {row.sense} {row.rhs:g}")
    for col in sorted(prob.bound_tags):
        tag = prob.bound_tags[col]
        lines.append(
            f"{tag}: {prob.lower[col]:g} <= {idx.describe(col)} <= "
            f"{prob.upper[col]:g}"
        )
    return "\n".join(lines) + "\n"


def evaluate_rows(
    prob: MilpProblem, values: np.ndarray, tol: float = 1e-7
) -> list[tuple[Row, float]]:
    """Rows violated by `values` beyond `tol`, with their activity."""
    violated = []
    for row in prob.rows:
        lhs = sum(coef * values[col] for col, coef in row.coefs)
        if row.sense == SENSE_LE and lhs > row.rhs + tol:
            violated.append((row, lhs))
        elif row.sense == SENSE_GE and lhs < row.rhs - tol:
            violated.append((row, lhs))
        elif row.sense == SENSE_EQ and abs(lhs - row.rhs) > tol:
            violated.append((row, lhs))
    return violated
