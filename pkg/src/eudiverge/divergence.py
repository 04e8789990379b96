"""Witness certificates for large terms of the expected-utility series,
exact partial sums of that series, and the tail-bound convergence check
for bounded utilities.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .dovetail import EvalTable, busy_beaver_profile, evaluate_range
from .errors import (
    BoundViolated,
    InconsistentCertificate,
    PreconditionViolated,
    SearchBudgetExceeded,
    SourceNotHaltedWithinBudget,
)
from .machine import Halted, decode, run
from .priors import (
    PRIOR_TOTAL,
    UtilitySpec,
    inverse_prior_lb,
    prior_lb,
    prior_tail,
    q_table,
)
from .smn import Evidence, synthesize_G

__all__ = [
    "WitnessCertificate",
    "WitnessRun",
    "witness_sequence",
    "certify_term",
    "verify_certificate",
    "SumRow",
    "PartialSumTrace",
    "partial_sums",
    "Checkpoint",
    "ConvergenceReport",
    "convergence_report",
    "rational_json",
]


def rational_json(q) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


def _opt_rational(q):
    return None if q is None else rational_json(q)


# -- witnesses -------------------------------------------------------------


@dataclass(frozen=True)
class WitnessCertificate:
    """One exhibited term ``p(G(u_j)) * U(phi_{G(u_j)}(k))`` of the series.

    The ``q_*`` fields and ``b_dominates_q`` record the link of the
    inequality chain that relies on B outgrowing q; at desk scale it is
    reported, not assumed.
    """

    j: int
    u_j: int
    g_index: int
    b_value: int
    output: int
    utility_value: Fraction
    utility_lb_value: Fraction
    prior_bound: Fraction
    term_magnitude: Fraction
    passes: bool
    q_j: Optional[int] = None
    q_u: Optional[int] = None

    @property
    def utility_chain_holds(self) -> bool:
        # |U(out)| >= |lb(out)| >= b_value
        return abs(self.utility_value) >= abs(self.utility_lb_value) >= self.b_value

    @property
    def q_chain_holds(self) -> Optional[bool]:
        # q(j) >= q(u_j) >= 1/prior(G(u_j))
        if self.q_j is None or self.q_u is None:
            return None
        return self.q_j >= self.q_u >= inverse_prior_lb(self.g_index)

    @property
    def b_dominates_q(self) -> Optional[bool]:
        return None if self.q_j is None else self.b_value >= self.q_j

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "u_j": self.u_j,
            "g_index": str(self.g_index),
            "b_value": self.b_value,
            "output": self.output,
            "utility_value": rational_json(self.utility_value),
            "utility_lb_value": rational_json(self.utility_lb_value),
            "prior_bound": rational_json(self.prior_bound),
            "term_magnitude": rational_json(self.term_magnitude),
            "passes": self.passes,
            "q_j": None if self.q_j is None else str(self.q_j),
            "q_u": None if self.q_u is None else str(self.q_u),
            "utility_chain_holds": self.utility_chain_holds,
            "q_chain_holds": self.q_chain_holds,
            "b_dominates_q": self.b_dominates_q,
        }

    @classmethod
    def from_json(cls, d) -> "WitnessCertificate":
        def frac(v):
            return Fraction(int(v["num"]), int(v["den"]))

        return cls(
            j=d["j"],
            u_j=d["u_j"],
            g_index=int(d["g_index"]),
            b_value=d["b_value"],
            output=d["output"],
            utility_value=frac(d["utility_value"]),
            utility_lb_value=frac(d["utility_lb_value"]),
            prior_bound=frac(d["prior_bound"]),
            term_magnitude=frac(d["term_magnitude"]),
            passes=d["passes"],
            q_j=None if d.get("q_j") is None else int(d["q_j"]),
            q_u=None if d.get("q_u") is None else int(d["q_u"]),
        )


@dataclass
class WitnessRun:
    k: int
    utility_label: str
    certificates: list = field(default_factory=list)
    absent: dict = field(default_factory=dict)  # j -> reason
    g_table: list = field(default_factory=list)  # G(y) or None, y = 0..j_max
    q_values: list = field(default_factory=list)

    @property
    def passing(self) -> list:
        return [c for c in self.certificates if c.passes]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "utility": self.utility_label,
            "certificates": [c.to_json() for c in self.certificates],
            "absent": [{"j": j, "reason": r} for j, r in sorted(self.absent.items())],
            "g_table": [None if g is None else str(g) for g in self.g_table],
            "q": [None if q is None else str(q) for q in self.q_values],
            "passing": len(self.passing),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["j", "u_j", "b_value", "output", "g_index_digits",
             "prior_bound_log2", "term_magnitude", "passes", "b_dominates_q"]
        )
        for c in self.certificates:
            w.writerow([
                c.j, c.u_j, c.b_value, c.output, len(str(c.g_index)),
                -(c.prior_bound.denominator.bit_length() - 1),
                _float_str(c.term_magnitude), int(c.passes), int(bool(c.b_dominates_q)),
            ])
        return buf.getvalue()


def _float_str(q):
    # a readable rendering for CSV summaries; JSON keeps the exact value
    if q == 0:
        return "0"
    num, den = q.numerator, q.denominator
    exp = len(str(num)) - len(str(den))
    mant = Fraction(num, den) / Fraction(10) ** exp
    while mant >= 10:
        mant /= 10
        exp += 1
    while mant < 1:
        mant *= 10
        exp -= 1
    return f"{float(mant):.6f}e{exp:+d}"


def witness_sequence(
    evidence: Evidence,
    k: int,
    utility_spec: UtilitySpec,
    j_max: int,
    eval_budget: int,
    search_budget: int,
    table: EvalTable = None,
) -> WitnessRun:
    """Certificates for ``j = 0..j_max`` along the hypotheses ``G(u_j)``.

    ``u_j`` is the least index attaining the B lower bound at ``j``, taken
    from ``table`` (evaluated here when not given).  Every field is
    recomputed from program runs; a ``j`` whose witness cannot be built is
    recorded in ``absent`` instead.
    """
    if utility_spec.bounded:
        raise PreconditionViolated(
            f"witness certificates need an unbounded utility, got {utility_spec.label}"
        )
    evidence.require_outside(k)
    if table is None:
        table = evaluate_range(k, j_max, eval_budget)
    if table.k != k:
        raise ValueError(f"table was built for k={table.k}, not {k}")
    if table.n_max < j_max:
        raise ValueError(f"table covers n <= {table.n_max}, need {j_max}")

    result = WitnessRun(k=k, utility_label=utility_spec.label)
    failures = {}
    for y in range(j_max + 1):
        try:
            g = synthesize_G(y, evidence, k, utility_spec, eval_budget, search_budget)
        except (SourceNotHaltedWithinBudget, SearchBudgetExceeded) as exc:
            g = None
            failures[y] = f"{type(exc).__name__}: {exc}"
        result.g_table.append(g)
    result.q_values = q_table(result.g_table)

    for rec in busy_beaver_profile(table, j_max):
        j, u = rec.x, rec.argmax_index
        g = result.g_table[u]
        if g is None:
            result.absent[j] = failures[u]
            continue
        out = run(decode(g), k, eval_budget, loop_check=True)
        if not isinstance(out, Halted):
            result.absent[j] = f"G({u}) did not halt on k={k} within {eval_budget} steps"
            continue
        u_val = utility_spec.U(out.value)
        prior = prior_lb(g)
        term = prior * abs(u_val)
        result.certificates.append(
            WitnessCertificate(
                j=j,
                u_j=u,
                g_index=g,
                b_value=rec.value,
                output=out.value,
                utility_value=u_val,
                utility_lb_value=utility_spec.lb(out.value),
                prior_bound=prior,
                term_magnitude=term,
                passes=term >= 1,
                q_j=result.q_values[j],
                q_u=result.q_values[u],
            )
        )
    return result


def certify_term(cert: WitnessCertificate, utility_spec: UtilitySpec, k: int, budget: int) -> bool:
    """``prior_bound * |U(output)| >= 1``, after re-running the witness.

    Raises InconsistentCertificate when the stored output, prior or term
    disagree with a fresh computation.
    """
    out = run(decode(cert.g_index), k, budget, loop_check=True)
    if not isinstance(out, Halted) or out.value != cert.output:
        raise InconsistentCertificate(
            f"j={cert.j}: re-running G(u_j) on k={k} gave {out}, certificate says {cert.output}"
        )
    if cert.prior_bound != prior_lb(cert.g_index):
        raise InconsistentCertificate(f"j={cert.j}: stored prior bound is not prior_lb(G(u_j))")
    term = cert.prior_bound * abs(utility_spec.U(out.value))
    if term != cert.term_magnitude:
        raise InconsistentCertificate(f"j={cert.j}: stored term magnitude does not match")
    return term >= 1


def verify_certificate(
    cert: WitnessCertificate,
    evidence: Evidence,
    k: int,
    utility_spec: UtilitySpec,
    eval_budget: int,
    search_budget: int,
) -> list:
    """Re-derive a certificate from raw programs and list every mismatch.

    Nothing stored is trusted: u_j is recomputed as the least index
    attaining the B lower bound over ``n <= j``, G(u_j) is re-synthesized,
    and the witness is checked against the evidence and re-run on ``k``.
    An empty list means the certificate is sound.
    """
    problems = []
    best = None
    for n in range(cert.j + 1):
        out = run(decode(n), k, eval_budget, loop_check=True)
        if isinstance(out, Halted) and (best is None or out.value > best[0]):
            best = (out.value, n)
    if best != (cert.b_value, cert.u_j):
        problems.append(f"B lower bound at j={cert.j} is {best}, certificate has {(cert.b_value, cert.u_j)}")
    g = synthesize_G(cert.u_j, evidence, k, utility_spec, eval_budget, search_budget)
    if g != cert.g_index:
        problems.append("g_index does not match a fresh synthesis of G(u_j)")
    witness = decode(cert.g_index)
    if evidence.agrees(witness, eval_budget) is not True:
        problems.append("witness program does not reproduce the evidence")
    try:
        if certify_term(cert, utility_spec, k, eval_budget) != cert.passes:
            problems.append("passes flag does not match the recomputed term")
    except InconsistentCertificate as exc:
        problems.append(str(exc))
    if not abs(utility_spec.U(cert.output)) >= abs(utility_spec.lb(cert.output)) >= cert.b_value:
        problems.append("utility chain |U(out)| >= |lb(out)| >= b_value fails")
    return problems


# -- partial sums ----------------------------------------------------------


@dataclass(frozen=True)
class SumRow:
    n: int
    prior: Fraction
    value: Optional[int]
    term: Optional[Fraction]
    running_sum: Fraction
    skipped: bool
    status: str  # ok | no_halt_on_k | evidence_mismatch | evidence_undecided


@dataclass
class PartialSumTrace:
    k: int
    utility_label: str
    budget: int
    rows: list = field(default_factory=list)

    @property
    def total(self) -> Fraction:
        return self.rows[-1].running_sum if self.rows else Fraction(0)

    def counts(self) -> dict:
        out = {}
        for r in self.rows:
            out[r.status] = out.get(r.status, 0) + 1
        return dict(sorted(out.items()))

    def sum_below(self, N) -> Fraction:
        """Exact sum of included terms with index ``n < N``."""
        return sum((r.term for r in self.rows if not r.skipped and r.n < N), Fraction(0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "prior", "value", "term", "running_sum", "skipped", "status"])
        for r in self.rows:
            w.writerow([
                r.n, str(r.prior), "" if r.value is None else r.value,
                "" if r.term is None else str(r.term), str(r.running_sum),
                int(r.skipped), r.status,
            ])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "utility": self.utility_label,
            "budget": self.budget,
            "counts": self.counts(),
            "total": rational_json(self.total),
            "rows": [
                {
                    "n": str(r.n),
                    "prior": rational_json(r.prior),
                    "value": r.value,
                    "term": _opt_rational(r.term),
                    "running_sum": rational_json(r.running_sum),
                    "skipped": r.skipped,
                    "status": r.status,
                }
                for r in self.rows
            ],
        }


def partial_sums(
    evidence: Evidence,
    k: int,
    utility_spec: UtilitySpec,
    n_max: int,
    budget: int,
    indices=None,
) -> PartialSumTrace:
    """Exact prefix of the expected-utility series with the prior lower bound.

    Index ``n`` contributes ``prior_lb(n) * U(phi_n(k))`` when phi_n halts on
    ``k`` and reproduces the evidence within ``budget``; otherwise the row
    is kept with ``skipped`` set.  ``indices`` replaces ``0..n_max`` with an
    explicit index list, e.g. one that includes witness indices.
    """
    evidence.require_outside(k)
    order = range(n_max + 1) if indices is None else indices
    trace = PartialSumTrace(k=k, utility_label=utility_spec.label, budget=budget)
    total = Fraction(0)
    for n in order:
        prog = decode(n)
        prior = prior_lb(n)
        out = run(prog, k, budget, loop_check=True)
        value = term = None
        if not isinstance(out, Halted):
            status = "no_halt_on_k"
        else:
            value = out.value
            agrees = evidence.agrees(prog, budget)
            if agrees is None:
                status = "evidence_undecided"
            elif not agrees:
                status = "evidence_mismatch"
            else:
                status = "ok"
                term = prior * utility_spec.U(value)
                total += term
        trace.rows.append(SumRow(n, prior, value, term, total, status != "ok", status))
    return trace


# -- convergence -----------------------------------------------------------


@dataclass(frozen=True)
class Checkpoint:
    N: int
    partial: Fraction  # included terms with n < N
    increment: Fraction  # observed change from N to the next checkpoint (or trace end)
    bound: Fraction  # sup_abs * prior_tail(N)

    @property
    def ok(self) -> bool:
        return abs(self.increment) <= self.bound


@dataclass
class ConvergenceReport:
    utility_label: str
    sup_abs: Fraction
    checkpoints: list
    max_abs_running_sum: Fraction
    running_sum_bound: Fraction

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checkpoints) and self.max_abs_running_sum <= self.running_sum_bound

    def to_json(self) -> dict:
        return {
            "utility": self.utility_label,
            "sup_abs": rational_json(self.sup_abs),
            "max_abs_running_sum": rational_json(self.max_abs_running_sum),
            "running_sum_bound": rational_json(self.running_sum_bound),
            "ok": self.ok,
            "checkpoints": [
                {
                    "N": c.N,
                    "partial": rational_json(c.partial),
                    "increment": rational_json(c.increment),
                    "bound": rational_json(c.bound),
                    "ok": c.ok,
                }
                for c in self.checkpoints
            ],
        }


def convergence_report(trace: PartialSumTrace, utility_spec: UtilitySpec, checkpoints=(100, 1000, 10000)) -> ConvergenceReport:
    """Compare observed partial-sum increments with ``sup|U| * prior_tail(N)``.

    Each checkpoint's increment runs up to the next checkpoint, the last
    one's up to the end of the trace.  Raises BoundViolated if any
    increment, or any running sum, exceeds its analytic bound.
    """
    if not utility_spec.bounded:
        raise PreconditionViolated(
            f"convergence check needs a bounded utility, got {utility_spec.label}"
        )
    sup = utility_spec.sup_abs
    total = trace.total
    cps = sorted(checkpoints)
    partials = [trace.sum_below(N) for N in cps]
    rows = []
    for i, N in enumerate(cps):
        following = partials[i + 1] if i + 1 < len(cps) else total
        rows.append(Checkpoint(N, partials[i], following - partials[i], sup * prior_tail(N)))
    max_run = max((abs(r.running_sum) for r in trace.rows), default=Fraction(0))
    report = ConvergenceReport(utility_spec.label, sup, rows, max_run, sup * PRIOR_TOTAL)
    for c in rows:
        if not c.ok:
            raise BoundViolated(f"increment after N={c.N} is {c.increment}, bound {c.bound}")
    if max_run > report.running_sum_bound:
        raise BoundViolated(f"running sum {max_run} exceeds {report.running_sum_bound}")
    return report
