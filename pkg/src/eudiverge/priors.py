"""Computable prior lower bound, utility specifications and the q function.

Everything here is exact: values are :class:`fractions.Fraction` or ``int``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import SearchBudgetExceeded

__all__ = [
    "prior_lb",
    "inverse_prior_lb",
    "prior_tail",
    "prior_tail_bound",
    "prior_partial_sum",
    "UtilitySpec",
    "UNBOUNDED_ID",
    "BOUNDED_SAT",
    "BUILTIN_UTILITIES",
    "utility",
    "utility_lb",
    "affine",
    "get_utility",
    "inverse_utility_search",
    "q_function",
    "q_table",
]

PRIOR_TOTAL = Fraction(1, 2)


def _block(n):
    # floor(log2(n + 1))
    return (n + 1).bit_length() - 1


def inverse_prior_lb(n: int) -> int:
    """``1 / prior_lb(n)``, always a power of two."""
    return 1 << (2 * _block(n) + 2)


def prior_lb(n: int) -> Fraction:
    """Dyadic length prior ``2**-(2b+2)`` with ``b = floor(log2(n+1))``.

    The indices sharing a value of ``b`` form a block of ``2**b`` indices
    with total mass ``2**-(b+2)``, so the whole prior sums to 1/2.
    """
    if n < 0:
        raise ValueError("prior index must be a natural number")
    return Fraction(1, inverse_prior_lb(n))


def prior_tail(N: int) -> Fraction:
    """Exact mass ``sum(prior_lb(n) for n >= N)`` in closed form."""
    if N < 0:
        raise ValueError("cut point must be a natural number")
    b = _block(N)
    # rest of block b, then every later block
    left_in_block = (1 << (b + 1)) - 1 - N
    return Fraction(left_in_block, 1 << (2 * b + 2)) + Fraction(1, 1 << (b + 2))


def prior_tail_bound(N: int) -> Fraction:
    """Coarse bound ``2**-(floor(log2(N+1)) + 1)`` on :func:`prior_tail`."""
    return Fraction(1, 1 << (_block(N) + 1))


def prior_partial_sum(N: int) -> Fraction:
    """``sum(prior_lb(n) for n < N)``."""
    return PRIOR_TOTAL - prior_tail(N)


# -- utilities -------------------------------------------------------------


@dataclass(frozen=True)
class UtilitySpec:
    """A utility ``U`` together with a computable lower bound ``lb`` on ``|U|``.

    ``sup_abs`` is required for bounded specs and bounds ``|U|`` everywhere.
    """

    label: str
    U: Callable[[int], Fraction]
    lb: Callable[[int], Fraction]
    bounded: bool
    sup_abs: Optional[Fraction] = None

    def __post_init__(self):
        if self.bounded and self.sup_abs is None:
            raise ValueError(f"bounded utility {self.label} needs sup_abs")


def _identity(y):
    return Fraction(y)


def _saturating(y):
    return 1 - Fraction(1, y + 1)


UNBOUNDED_ID = UtilitySpec("UNBOUNDED_ID", _identity, _identity, bounded=False)
BOUNDED_SAT = UtilitySpec(
    "BOUNDED_SAT", _saturating, _saturating, bounded=True, sup_abs=Fraction(1)
)
BUILTIN_UTILITIES = {u.label: u for u in (UNBOUNDED_ID, BOUNDED_SAT)}


def utility(spec: UtilitySpec, y: int) -> Fraction:
    return spec.U(y)


def utility_lb(spec: UtilitySpec, y: int) -> Fraction:
    return spec.lb(y)


def affine(base: UtilitySpec, scale=1, offset=0) -> UtilitySpec:
    """``scale * U + offset``, applied to both ``U`` and its lower bound.

    Only valid when the base has ``lb == U`` (true for the built-ins), since
    otherwise the shifted bound may exceed ``|U|``.
    """
    scale, offset = Fraction(scale), Fraction(offset)
    if scale == 0:
        raise ValueError("affine scale must be nonzero")
    if scale == 1 and offset == 0:
        return base
    if base.U is not base.lb:
        raise ValueError(f"{base.label}: affine variants need lb == U")

    def f(y):
        return scale * base.U(y) + offset

    sup = abs(scale) * base.sup_abs + abs(offset) if base.bounded else None
    label = f"{base.label}[scale={scale},offset={offset}]"
    return UtilitySpec(label, f, f, base.bounded, sup)


def get_utility(label: str, scale="1", offset="0") -> UtilitySpec:
    try:
        base = BUILTIN_UTILITIES[label]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_UTILITIES))
        raise ValueError(f"unknown utility label {label!r} (known: {known})") from None
    return affine(base, Fraction(scale), Fraction(offset))


def inverse_utility_search(spec: UtilitySpec, c: int, search_budget: int) -> int:
    """Least ``y <= search_budget`` with ``|lb(y)| >= c``, by linear scan."""
    for y in range(search_budget + 1):
        if abs(spec.lb(y)) >= c:
            return y
    raise SearchBudgetExceeded(
        f"no y <= {search_budget} has |{spec.label} lower bound| >= {c}"
    )


# -- q ---------------------------------------------------------------------


def q_function(x: int, g_indices) -> int:
    """``ceil(max(1 / prior_lb(G(y)) for y <= x))``.

    ``g_indices[y]`` is ``G(y)``, or ``None`` where G is undefined because
    the source program did not halt; those entries are left out of the max.
    """
    best = None
    for g in g_indices[: x + 1]:
        if g is not None:
            inv = inverse_prior_lb(g)
            if best is None or inv > best:
                best = inv
    if best is None:
        raise ValueError(f"G is undefined on every y <= {x}")
    return best  # already an integer, so the ceiling is a no-op


def q_table(g_indices) -> list:
    """q(0), q(1), ... over the defined prefix of ``g_indices``, in one pass.

    Entries before the first defined G are ``None``.
    """
    out = []
    best = None
    for g in g_indices:
        if g is not None:
            inv = inverse_prior_lb(g)
            best = inv if best is None else max(best, inv)
        out.append(best)
    return out
