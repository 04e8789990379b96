"""Desk-scale experiments on expected utility over computable hypotheses.

A register machine with a bijective program numbering, budgeted
enumeration of its programs, synthesis of evidence-consistent hypotheses,
and exact accounting of the resulting expected-utility series.
"""

from .machine import (
    BudgetExceeded,
    Djz,
    Halted,
    Inc,
    decode,
    encode,
    format_program,
    pair,
    parse_program,
    run,
    unpair,
)
from .dovetail import BBRecord, EvalTable, busy_beaver_lb, dominance_check, evaluate_range
from .priors import (
    BOUNDED_SAT,
    UNBOUNDED_ID,
    UtilitySpec,
    inverse_utility_search,
    prior_lb,
    prior_tail,
    q_function,
    utility,
    utility_lb,
)
from .smn import Evidence, fixed_point, synthesize_G, synthesize_table_program
from .divergence import (
    WitnessCertificate,
    certify_term,
    convergence_report,
    partial_sums,
    witness_sequence,
)

__version__ = "0.1.0"
