"""Command-line experiment runner.

Data files are deterministic functions of the resolved configuration; run
metadata (timestamps, durations) goes to ``run.log`` in the output
directory and nowhere else.

Exit codes: 0 success, 1 the experiment ran but its claim did not hold
(too few passing certificates, no fixed point found, bound violated),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .divergence import (
    certify_term,
    convergence_report,
    partial_sums,
    rational_json,
    witness_sequence,
)
from .dovetail import busy_beaver_profile, dominance_check, evaluate_range
from .errors import (
    BoundViolated,
    ConfigError,
    FixedPointNotFound,
    FunctionNotTotalWithinBudget,
    InconsistentCertificate,
)
from .machine import Halted, decode, format_program
from .priors import UNBOUNDED_ID
from .smn import ConstantTransformer, const_program, fixed_point, verify_fixed_point
from .config import load_config

log = logging.getLogger("eudiverge")

OK, CLAIM_FAILED, USAGE = 0, 1, 2


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_json(path: Path, obj):
    _write(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _table(cfg):
    return evaluate_range(cfg.k, cfg.n_max, cfg.eval_budget, workers=cfg.workers)


def cmd_enumerate(cfg) -> int:
    table = _table(cfg)
    _write(cfg.out / "eval_table.csv", table.to_csv())
    halted = sum(isinstance(o, Halted) for _, o in table.rows)
    print(f"evaluated n=0..{table.n_max} on k={cfg.k}: {halted} halted within {cfg.eval_budget} steps")
    return OK


def cmd_busybeaver(cfg) -> int:
    table = _table(cfg)
    records = busy_beaver_profile(table)
    lines = ["x,value,argmax_index,budget\n"]
    lines += [f"{r.x},{r.value},{r.argmax_index},{r.budget}\n" for r in records]
    _write(cfg.out / "bb_profile.csv", "".join(lines))

    x_max = min(cfg.dominance_x_max, table.n_max)
    comparisons = {"identity": (), "zero": const_program(0)}
    dom = {"k": cfg.k, "budget": cfg.eval_budget, "x_max": x_max, "functions": {}}
    for name, prog in comparisons.items():
        try:
            xs = dominance_check(table, prog, x_max)
        except FunctionNotTotalWithinBudget as exc:
            print(f"error: {exc}", file=sys.stderr)
            return CLAIM_FAILED
        dom["functions"][name] = {
            "program": format_program(prog),
            "crossings": xs,
            "count": len(xs),
        }
        print(f"B lower bound beats {name} at {len(xs)} of x=0..{x_max}")
    _write_json(cfg.out / "dominance.json", dom)
    last = records[-1]
    print(f"B_T({last.x}) >= {last.value} (witness index {last.argmax_index})")
    return OK


def cmd_witness(cfg, min_passing=None) -> int:
    spec = cfg.utility
    if spec.bounded:
        print(
            f"error: {spec.label} is bounded; divergence certificates only exist for "
            "unbounded utilities (use the sums subcommand for the convergence check)",
            file=sys.stderr,
        )
        return USAGE
    need = cfg.min_passing if min_passing is None else min_passing
    table = _table(cfg)
    result = witness_sequence(
        cfg.evidence, cfg.k, spec, min(cfg.j_max, table.n_max),
        cfg.eval_budget, cfg.search_budget, table,
    )
    for cert in result.certificates:
        try:
            if certify_term(cert, spec, cfg.k, cfg.eval_budget) != cert.passes:
                raise InconsistentCertificate(f"j={cert.j}: passes flag disagrees")
        except InconsistentCertificate as exc:
            print(f"error: {exc}", file=sys.stderr)
            return CLAIM_FAILED
    report = {"config": cfg.canonical(), "min_passing": need, **result.to_json()}
    _write_json(cfg.out / "certificates.json", report)
    _write(cfg.out / "certificates.csv", result.to_csv())

    passing = len(result.passing)
    best = max(result.certificates, key=lambda c: c.term_magnitude, default=None)
    print(f"{len(result.certificates)} certificates, {len(result.absent)} absent, {passing} passing")
    if best is not None:
        print(f"largest term magnitude: j={best.j}, about 2^{_log2(best.term_magnitude)}")
    if passing < need:
        print(f"claim not shown: {passing} passing < {need} required", file=sys.stderr)
        return CLAIM_FAILED
    return OK


def _log2(q):
    return q.numerator.bit_length() - q.denominator.bit_length()


def cmd_sums(cfg, demo=False) -> int:
    spec = cfg.utility
    indices = None
    if demo:
        # bounded utilities reuse the unbounded witnesses so both runs sum the same indices
        wit = witness_sequence(
            cfg.evidence, cfg.k, UNBOUNDED_ID if spec.bounded else spec,
            min(cfg.j_max, cfg.n_max), cfg.eval_budget, cfg.search_budget,
        )
        extra = {c.g_index for c in wit.certificates}
        indices = sorted(set(range(cfg.n_max + 1)) | extra)
    trace = partial_sums(cfg.evidence, cfg.k, spec, cfg.n_max, cfg.step_budget, indices)
    _write(cfg.out / "trace.csv", trace.to_csv())
    summary = {
        "config": cfg.canonical(),
        "k": trace.k,
        "utility": trace.utility_label,
        "mode": "demo" if demo else "prefix",
        "rows": len(trace.rows),
        "counts": trace.counts(),
        "total": rational_json(trace.total),
        "max_abs_term": rational_json(
            max((abs(r.term) for r in trace.rows if r.term is not None), default=0)
        ),
    }
    status = OK
    if spec.bounded:
        try:
            report = convergence_report(trace, spec, cfg.checkpoints)
            summary["convergence"] = report.to_json()
            print(f"convergence: all {len(report.checkpoints)} checkpoints within sup|U| * tail(N)")
        except BoundViolated as exc:
            summary["convergence"] = {"ok": False, "error": str(exc)}
            print(f"error: {exc}", file=sys.stderr)
            status = CLAIM_FAILED
    else:
        note = (
            "unbounded utility: a finite prefix cannot show divergence; large terms are "
            "exhibited at synthesized witness indices by the witness subcommand (certificate mode)"
        )
        summary["note"] = note
        print(f"note: {note}")
    _write_json(cfg.out / "sums.json", summary)
    print(f"{len(trace.rows)} rows, counts {trace.counts()}, partial sum ~ {float(trace.total):.6g}")
    return status


def cmd_fixedpoint(cfg, a=None, b=None) -> int:
    a = cfg.fp_a if a is None else a
    b = cfg.fp_b if b is None else b
    name = f"F(x) = {a}*x + {b}"
    transformer = ConstantTransformer(lambda i: a * i + b, name)
    report = {
        "a": a,
        "b": b,
        "probes": cfg.fp_probes,
        "budget": cfg.step_budget,
        "limit": cfg.fp_limit,
    }
    try:
        p = fixed_point(transformer, cfg.fp_probes, cfg.step_budget, cfg.fp_limit)
    except FixedPointNotFound as exc:
        report.update(found=False, error=str(exc))
        _write_json(cfg.out / "fixedpoint.json", report)
        print(f"no fixed point: {exc}", file=sys.stderr)
        return CLAIM_FAILED
    checks = verify_fixed_point(p, transformer, cfg.fp_probes, cfg.step_budget)
    report.update(
        found=True,
        p=str(p),
        F_p=str(a * p + b),
        program=format_program(decode(p)),
        probes_checked=[
            {"x": x, "phi_p": out.value, "steps": out.steps} for x, out, _ in checks
        ],
    )
    _write_json(cfg.out / "fixedpoint.json", report)
    print(f"p = {p}, F(p) = {a * p + b}; phi_p(x) = F(p) on probes {cfg.fp_probes}")
    return OK


# -- argument handling -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    common.add_argument("--k", type=int, help="probed input")
    common.add_argument("--n-max", type=int, help="last enumerated index")
    common.add_argument("--j-max", type=int, help="last witness index j")
    common.add_argument("--budget", type=int, help="step budget for phi_n(k) evaluations")
    common.add_argument("--steps", type=int, help="step budget for probe runs")
    common.add_argument("--utility", help="UNBOUNDED_ID or BOUNDED_SAT")
    common.add_argument("--workers", type=int, help="processes for enumeration")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(
        prog="eudiverge",
        description="Budgeted computability experiments on expected-utility series.",
    )
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    sub.add_parser("enumerate", parents=[common], help="evaluate phi_n(k) for n <= n_max")
    sub.add_parser("busybeaver", parents=[common], help="B lower bound profile and dominance checks")
    w = sub.add_parser("witness", parents=[common], help="divergence certificates")
    w.add_argument("--min-passing", type=int, metavar="N", help="passing certificates required (default 3)")
    s = sub.add_parser("sums", parents=[common], help="exact partial sums and convergence report")
    s.add_argument("--demo", action="store_true", help="also sum over the witness indices")
    f = sub.add_parser("fixedpoint", parents=[common], help="fixed point of i -> const(a*i + b)")
    f.add_argument("--a", type=int, help="slope of F (default 1)")
    f.add_argument("--b", type=int, help="intercept of F (default 7)")
    f.add_argument("--limit", type=int, help="candidate indices searched")
    return ap


def _overrides(args) -> dict:
    over = {}
    for flag, key in (("k", "k"), ("n_max", "n_max"), ("j_max", "j_max"),
                      ("workers", "workers"), ("out", "out")):
        val = getattr(args, flag, None)
        if val is not None:
            over[key] = val
    budgets = {}
    if args.budget is not None:
        budgets["eval"] = args.budget
    if args.steps is not None:
        budgets["steps"] = args.steps
    if budgets:
        over["budgets"] = budgets
    if args.utility is not None:
        over["utility"] = {"label": args.utility}
    if getattr(args, "min_passing", None) is not None:
        over["min_passing"] = args.min_passing
    fp = {}
    for flag in ("a", "b", "limit"):
        val = getattr(args, flag, None)
        if val is not None:
            fp[flag] = val
    if fp:
        over["fixedpoint"] = fp
    return over


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: config error: {exc}", file=sys.stderr)
        return USAGE

    cfg.out.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(cfg.out / "run.log")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    log.info("start %s argv=%s", args.command, argv if argv is not None else sys.argv[1:])
    start = time.perf_counter()

    commands = {
        "enumerate": lambda: cmd_enumerate(cfg),
        "busybeaver": lambda: cmd_busybeaver(cfg),
        "witness": lambda: cmd_witness(cfg),
        "sums": lambda: cmd_sums(cfg, demo=args.demo),
        "fixedpoint": lambda: cmd_fixedpoint(cfg),
    }
    try:
        code = commands[args.command]()
    finally:
        log.info("end %s in %.2fs", args.command, time.perf_counter() - start)
        log.removeHandler(handler)
        handler.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
