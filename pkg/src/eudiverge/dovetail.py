"""Budgeted enumeration of phi_0(k), phi_1(k), ... and the Busy-Beaver-style
lower bound ``B_T(x) = max{phi_n(k) : n <= x, phi_n halts on k within T}``.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import FunctionNotTotalWithinBudget, NoHaltingIndex
from .machine import BudgetExceeded, Halted, decode, run

__all__ = [
    "EvalTable",
    "BBRecord",
    "evaluate_index",
    "evaluate_range",
    "busy_beaver_lb",
    "busy_beaver_profile",
    "dominance_check",
]


@dataclass
class EvalTable:
    k: int
    budget: int
    rows: list = field(default_factory=list)  # [(n, EvalOutcome)], n = 0..n_max

    @property
    def n_max(self) -> int:
        return len(self.rows) - 1

    def outcome(self, n):
        return self.rows[n][1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "halted", "value", "steps"])
        for n, out in self.rows:
            if isinstance(out, Halted):
                w.writerow([n, 1, out.value, out.steps])
            else:
                w.writerow([n, 0, "", out.budget])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, k: int, budget: int) -> "EvalTable":
        rows = []
        for i, rec in enumerate(csv.DictReader(io.StringIO(text))):
            n = int(rec["n"])
            if n != i:
                raise ValueError(f"row {i}: expected index {i}, found {n}")
            if rec["halted"] == "1":
                rows.append((n, Halted(int(rec["value"]), int(rec["steps"]))))
            else:
                rows.append((n, BudgetExceeded(budget)))
        return cls(k, budget, rows)


@dataclass(frozen=True)
class BBRecord:
    x: int
    value: int
    argmax_index: int
    budget: int


def evaluate_index(n: int, k: int, budget: int):
    return run(decode(n), k, budget, loop_check=True)


def _evaluate_chunk(args):
    lo, hi, k, budget = args
    return [evaluate_index(n, k, budget) for n in range(lo, hi)]


def evaluate_range(k: int, n_max: int, budget: int, workers: int = 1) -> EvalTable:
    """Run every program ``n <= n_max`` on ``k`` with the same step budget.

    Non-halting programs caught by the interpreter's cycle check are
    reported as ``BudgetExceeded(budget)`` without spending the budget; the
    table is identical to running each one out.  With ``workers > 1`` the
    index range is split into chunks evaluated in separate processes and
    reassembled in index order.
    """
    if workers <= 1 or n_max < 1000:
        outcomes = _evaluate_chunk((0, n_max + 1, k, budget))
    else:
        size = -(-(n_max + 1) // (4 * workers))
        chunks = [
            (lo, min(lo + size, n_max + 1), k, budget)
            for lo in range(0, n_max + 1, size)
        ]
        with ProcessPoolExecutor(workers) as pool:
            outcomes = [o for part in pool.map(_evaluate_chunk, chunks) for o in part]
    return EvalTable(k, budget, list(enumerate(outcomes)))


def busy_beaver_lb(table: EvalTable, x: int) -> BBRecord:
    """Largest halted value among rows ``n <= x``; ties go to the least index."""
    if not 0 <= x <= table.n_max:
        raise ValueError(f"x={x} outside table range 0..{table.n_max}")
    best = None
    for n, out in table.rows[: x + 1]:
        if isinstance(out, Halted) and (best is None or out.value > best[0]):
            best = (out.value, n)
    if best is None:
        raise NoHaltingIndex(f"no index n <= {x} halted on k={table.k} within {table.budget} steps")
    return BBRecord(x=x, value=best[0], argmax_index=best[1], budget=table.budget)


def busy_beaver_profile(table: EvalTable, x_max: int = None) -> list:
    """``busy_beaver_lb(table, x)`` for every x up to ``x_max``, in one pass.

    Raises NoHaltingIndex for the leading x before the first halting row.
    """
    x_max = table.n_max if x_max is None else x_max
    records = []
    best = None
    for n, out in table.rows[: x_max + 1]:
        if isinstance(out, Halted) and (best is None or out.value > best[0]):
            best = (out.value, n)
        if best is None:
            raise NoHaltingIndex(f"no index n <= {n} halted on k={table.k}")
        records.append(BBRecord(n, best[0], best[1], table.budget))
    return records


def dominance_check(table: EvalTable, f, x_max: int) -> list:
    """Every ``x <= x_max`` where the table's B lower bound beats ``f(x)``.

    ``f`` is a program, run on ``x`` with the table budget.
    """
    crossings = []
    for rec in busy_beaver_profile(table, x_max):
        out = run(f, rec.x, table.budget, loop_check=True)
        if not isinstance(out, Halted):
            raise FunctionNotTotalWithinBudget(
                f"comparison program did not halt on x={rec.x} within {table.budget} steps"
            )
        if rec.value > out.value:
            crossings.append(rec.x)
    return crossings
