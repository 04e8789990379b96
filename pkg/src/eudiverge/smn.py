"""Program synthesis on the register machine.

Evidence-table programs, the index map G that turns a source index into a
hypothesis consistent with the evidence, and a search for fixed points of
index transformers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import FixedPointNotFound, SourceNotHaltedWithinBudget
from .machine import Djz, Halted, Inc, decode, encode, run
from .priors import UtilitySpec, inverse_utility_search

__all__ = [
    "SCRATCH",
    "Evidence",
    "const_program",
    "synthesize_table_program",
    "synthesize_G",
    "ConstantTransformer",
    "fixed_point",
    "verify_fixed_point",
]

# Never incremented by synthesized code, so DJZ on it is an unconditional jump.
SCRATCH = 8


@dataclass(frozen=True)
class Evidence:
    """Known input/output pairs ``i -> h(i)`` of the environment."""

    pairs: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, v in self.pairs.items():
            for what, num in (("input", i), ("output", v)):
                if not isinstance(num, int) or isinstance(num, bool) or num < 0:
                    raise ValueError(f"evidence {what} must be a natural, got {num!r}")

    @property
    def inputs(self):
        return sorted(self.pairs)

    def __contains__(self, i):
        return i in self.pairs

    def __getitem__(self, i):
        return self.pairs[i]

    def __len__(self):
        return len(self.pairs)

    def require_outside(self, k):
        if k in self.pairs:
            raise ValueError(f"probed input k={k} is an evidence input")

    def agrees(self, program, budget):
        """True/False if the program agrees/disagrees with every evidence pair,
        None if some evidence input did not halt within ``budget``."""
        undecided = False
        for i in self.inputs:
            out = run(program, i, budget, loop_check=True)
            if not isinstance(out, Halted):
                undecided = True
            elif out.value != self.pairs[i]:
                return False
        return None if undecided else True


def const_program(c: int):
    """Clear register 0, then load ``c``."""
    return (Djz(0, 2), Djz(SCRATCH, 0)) + (Inc(0),) * c


def synthesize_table_program(evidence: Evidence, default: int):
    """Total program returning ``evidence[x]`` on evidence inputs, else ``default``.

    Layout: one countdown test per value ``0..max(I)``, a clearing loop for
    inputs past the table, one loader per distinct evidence output ending
    in a jump past the end, and the default loader last.
    """
    inputs = evidence.inputs
    stages = inputs[-1] + 1 if inputs else 0
    values = sorted({evidence[i] for i in inputs if evidence[i]})

    clear_at = stages
    loader_at = {}
    pos = clear_at + 2
    for v in values:
        loader_at[v] = pos
        pos += v + 1
    default_at = pos
    halt = default_at + default

    prog = []
    for x in range(stages):
        if x not in evidence:
            target = default_at
        elif evidence[x] == 0:
            target = halt
        else:
            target = loader_at[evidence[x]]
        prog.append(Djz(0, target))
    prog += [Djz(0, default_at), Djz(SCRATCH, clear_at)]
    for v in values:
        prog += [Inc(0)] * v + [Djz(SCRATCH, halt)]
    prog += [Inc(0)] * default
    assert len(prog) == halt
    return tuple(prog)


def synthesize_G(n, evidence, k, utility_spec: UtilitySpec, eval_budget, search_budget):
    """Index of a total program that agrees with the evidence and returns,
    off the evidence, the least ``y`` with ``|lb(y)| >= |phi_n(k)|``.

    ``phi_n(k)`` is evaluated once and the answer embedded as a constant.
    """
    evidence.require_outside(k)
    out = run(decode(n), k, eval_budget, loop_check=True)
    if not isinstance(out, Halted):
        raise SourceNotHaltedWithinBudget(
            f"phi_{n}({k}) did not halt within {eval_budget} steps"
        )
    target = inverse_utility_search(utility_spec, abs(out.value), search_budget)
    return encode(synthesize_table_program(evidence, target))


# -- fixed points ----------------------------------------------------------


class ConstantTransformer:
    """Index transformer ``i -> const_program(F(i))``.

    ``predict`` gives the extension of the produced program without
    building it, which keeps candidate screening linear in the search range.
    """

    def __init__(self, F, name=None):
        self.F = F
        self.name = name or getattr(F, "__name__", "F")

    def __call__(self, i):
        return const_program(self.F(i))

    def predict(self, i, x):
        return self.F(i)

    def __repr__(self):
        return f"ConstantTransformer({self.name})"


def _agrees_on(p, target_value, probes, budget):
    prog = decode(p)
    for x in probes:
        out = run(prog, x, budget, loop_check=True)
        if not isinstance(out, Halted) or out.value != target_value(x):
            return False
    return True


def verify_fixed_point(p, transformer, probes=(0, 1, 2, 3), budget=10**6):
    """Check ``phi_p(x) == phi_{transformer(p)}(x)`` on every probe by running
    both programs.  Returns a list of ``(x, outcome_p, outcome_t)``."""
    own = decode(p)
    other = transformer(p)
    results = []
    for x in probes:
        results.append((x, run(own, x, budget, loop_check=True), run(other, x, budget, loop_check=True)))
    return results


def fixed_point(transformer, probes=(0, 1, 2, 3), budget=10**6, limit=10**5, start=0):
    """Least ``p`` in ``[start, limit)`` with ``phi_p = phi_{transformer(p)}``
    on every probe, each run within ``budget`` steps.

    The recursion theorem guarantees that some fixed point exists, so the
    search finds one once ``limit`` and ``budget`` are large enough.  Under
    this numbering the fixed point produced by the textbook self-reproducing
    construction has an index far too large to store, so only fixed points
    small enough to be reached by enumeration are found in practice.

    Candidates are screened against ``transformer.predict(p, x)`` when the
    transformer offers it; every reported ``p`` is confirmed by running the
    program ``transformer(p)`` itself.
    """
    predict = getattr(transformer, "predict", None)
    for p in range(start, limit):
        if predict is not None:
            ok = _agrees_on(p, lambda x: predict(p, x), probes, budget)
        else:
            target = transformer(p)

            def value(x, target=target):
                out = run(target, x, budget, loop_check=True)
                return out.value if isinstance(out, Halted) else None

            ok = _agrees_on(p, value, probes, budget)
        if ok and all(
            isinstance(a, Halted) and isinstance(b, Halted) and a.value == b.value
            for _, a, b in verify_fixed_point(p, transformer, probes, budget)
        ):
            return p
    raise FixedPointNotFound(
        f"no fixed point of {transformer!r} among indices {start}..{limit - 1} "
        f"within {budget} steps per probe"
    )
