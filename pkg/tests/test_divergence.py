import json
from dataclasses import replace
from fractions import Fraction

import pytest

from eudiverge.divergence import (
    PartialSumTrace,
    SumRow,
    WitnessCertificate,
    certify_term,
    convergence_report,
    partial_sums,
    verify_certificate,
    witness_sequence,
)
from eudiverge.dovetail import evaluate_range
from eudiverge.errors import BoundViolated, InconsistentCertificate, PreconditionViolated
from eudiverge.machine import decode, parse_program
from eudiverge.priors import BOUNDED_SAT, UNBOUNDED_ID, affine, prior_lb, prior_tail
from eudiverge.smn import Evidence

from oracles import hand_encode, to_tuples, trace_run

EV = Evidence({0: 0, 1: 1})

# evidence {0->0, 1->1}, default 2, laid out by hand
TABLE_DEFAULT_2 = """
DJZ 0 8
DJZ 0 4
DJZ 0 6
DJZ 8 2
INC 0
DJZ 8 8
INC 0
INC 0
"""


@pytest.fixture(scope="module")
def wit():
    table = evaluate_range(2, 60, 10**5)
    return witness_sequence(EV, 2, UNBOUNDED_ID, 40, 10**5, 10**5, table)


def test_first_certificate_hand_trace(wit):
    prog = parse_program(TABLE_DEFAULT_2)
    g0 = hand_encode(to_tuples(prog))
    assert [trace_run(to_tuples(prog), x, 100)[1] for x in (0, 1, 2, 3)] == [0, 1, 2, 2]
    c = wit.certificates[0]
    assert (c.j, c.u_j, c.b_value, c.output) == (0, 0, 2, 2)
    assert c.g_index == g0
    assert c.prior_bound == prior_lb(g0)
    assert c.term_magnitude == prior_lb(g0) * 2
    assert not c.passes


def test_utility_chain_every_certificate(wit):
    assert len(wit.certificates) == 41 and not wit.absent
    for c in wit.certificates:
        assert c.u_j <= c.j
        assert abs(c.utility_value) >= abs(c.utility_lb_value) >= c.b_value
        assert c.utility_chain_holds


def test_q_chain_every_certificate(wit):
    qs = wit.q_values
    assert None not in qs and qs == sorted(qs)
    assert None in wit.g_table  # some sources never halt on k
    for y, g in enumerate(wit.g_table):
        if g is not None:
            assert qs[y] * prior_lb(g) >= 1
    for c in wit.certificates:
        assert c.q_chain_holds
        # B does not outgrow q at this scale; the certificate says so
        assert c.b_dominates_q is False


def test_certificates_reverify_from_scratch(wit):
    for c in wit.certificates[:12]:
        assert verify_certificate(c, EV, 2, UNBOUNDED_ID, 10**5, 10**5) == []


def test_verify_detects_tampering(wit):
    c = replace(wit.certificates[3], b_value=99)
    assert verify_certificate(c, EV, 2, UNBOUNDED_ID, 10**5, 10**5)


def test_certify_term_exact_one():
    # decode(4) = INC 0 x3: outputs 5 on k=2; prior 1/64; U(5) = 64
    spec = affine(UNBOUNDED_ID, Fraction(64, 5))
    cert = _cert(4, 5, spec)
    assert cert.prior_bound == Fraction(1, 64)
    assert certify_term(cert, spec, 2, 100) is True


def test_certify_term_below_one():
    spec = affine(UNBOUNDED_ID, Fraction(3, 2))
    cert = _cert(0, 2, spec)  # identity: prior 1/4, U(2) = 3
    assert certify_term(cert, spec, 2, 100) is False


def test_certify_term_inconsistent():
    cert = replace(_cert(0, 2, UNBOUNDED_ID), output=3)
    with pytest.raises(InconsistentCertificate):
        certify_term(cert, UNBOUNDED_ID, 2, 100)
    cert = replace(_cert(0, 2, UNBOUNDED_ID), term_magnitude=Fraction(1))
    with pytest.raises(InconsistentCertificate):
        certify_term(cert, UNBOUNDED_ID, 2, 100)


def _cert(g, output, spec):
    u = spec.U(output)
    return WitnessCertificate(
        j=0, u_j=0, g_index=g, b_value=2, output=output, utility_value=u,
        utility_lb_value=spec.lb(output), prior_bound=prior_lb(g),
        term_magnitude=prior_lb(g) * abs(u), passes=prior_lb(g) * abs(u) >= 1,
    )


def test_witness_rejects_bounded():
    with pytest.raises(PreconditionViolated):
        witness_sequence(EV, 2, BOUNDED_SAT, 3, 100, 100)


def test_certificate_json_roundtrip(wit):
    for c in wit.certificates[:5]:
        blob = json.loads(json.dumps(c.to_json()))
        assert blob["prior_bound"]["num"] == "1"
        assert isinstance(blob["prior_bound"]["den"], str)
        assert WitnessCertificate.from_json(blob) == c


# -- partial sums --------------------------------------------------------------


def test_partial_sum_first_row():
    tr = partial_sums(EV, 2, UNBOUNDED_ID, 0, 1000)
    (row,) = tr.rows
    assert row.term == Fraction(1, 2) and row.running_sum == Fraction(1, 2)
    assert row.status == "ok" and not row.skipped


def test_partial_sum_statuses():
    tr = partial_sums(EV, 2, UNBOUNDED_ID, 12, 1000)
    by_n = {r.n: r for r in tr.rows}
    assert by_n[1].status == "evidence_mismatch"  # successor maps 0 -> 1
    assert by_n[3].status == "evidence_mismatch"  # DJZ 0 0 maps 1 -> 0
    assert by_n[10].status == "no_halt_on_k"  # DJZ 1 0 spins


def _running_sums_exact(tr):
    total = Fraction(0)
    for r in tr.rows:
        if not r.skipped:
            total += r.term
        assert r.running_sum == total


@pytest.fixture(scope="module")
def sat_trace():
    return partial_sums(EV, 2, BOUNDED_SAT, 2000, 10**4)


def test_bounded_sums_below_half(sat_trace):
    _running_sums_exact(sat_trace)
    assert all(abs(r.running_sum) <= Fraction(1, 2) for r in sat_trace.rows)
    for r in sat_trace.rows:
        if r.term is not None:
            assert abs(r.term) <= r.prior


def test_doubling_prefix_stays_within_tail(sat_trace):
    half = partial_sums(EV, 2, BOUNDED_SAT, 1000, 10**4)
    assert half.rows == sat_trace.rows[:1001]
    assert abs(sat_trace.total - half.total) <= prior_tail(1001)


def test_convergence_report(sat_trace):
    rep = convergence_report(sat_trace, BOUNDED_SAT, [10, 100, 1000])
    assert rep.ok
    for c in rep.checkpoints:
        assert c.bound == prior_tail(c.N)
        assert c.partial == sum((r.term for r in sat_trace.rows if r.term is not None and r.n < c.N), Fraction(0))
    assert json.loads(json.dumps(rep.to_json()))["ok"] is True


def test_convergence_report_empty_and_preconditions():
    assert convergence_report(PartialSumTrace(2, "BOUNDED_SAT", 10), BOUNDED_SAT).ok
    with pytest.raises(PreconditionViolated):
        convergence_report(PartialSumTrace(2, "UNBOUNDED_ID", 10), UNBOUNDED_ID)


def test_convergence_report_flags_violation():
    bogus = PartialSumTrace(2, "BOUNDED_SAT", 10, [
        SumRow(0, Fraction(1, 4), 2, Fraction(0), Fraction(0), False, "ok"),
        SumRow(5, Fraction(1, 64), 2, Fraction(1, 2), Fraction(1, 2), False, "ok"),
    ])
    with pytest.raises(BoundViolated):
        convergence_report(bogus, BOUNDED_SAT, [1])


def test_demo_mode_includes_witness_terms(wit):
    extra = [c.g_index for c in wit.certificates[:3]]
    idx = list(range(20)) + extra
    tr = partial_sums(EV, 2, UNBOUNDED_ID, 0, 10**4, indices=idx)
    rows = {r.n: r for r in tr.rows}
    for c in wit.certificates[:3]:
        assert rows[c.g_index].status == "ok"
        assert rows[c.g_index].term == c.term_magnitude
    _running_sums_exact(tr)
    sat = partial_sums(EV, 2, BOUNDED_SAT, 0, 10**4, indices=idx)
    assert convergence_report(sat, BOUNDED_SAT, [5, 10]).ok


def test_trace_csv_has_exact_rationals(sat_trace):
    lines = sat_trace.to_csv().splitlines()
    assert lines[0] == "n,prior,value,term,running_sum,skipped,status"
    assert lines[1].startswith("0,1/4,2,")
    assert len(lines) == 2002
