"""The value-correlation stages of taint inference and the trace check."""

from __future__ import annotations

from dataclasses import dataclass

from .lcs import DEFAULT_MAX_LCS_LEN, LengthExceeded, lcs_counts

MATCH = "Match"
NO_MATCH = "NoMatch"
YES = "Yes"
NO = "No"
MATCHES = "Matches"


@dataclass(frozen=True)
class TaintParams:
    theta: int = 6
    eta: float = 0.1
    max_lcs_len: int = DEFAULT_MAX_LCS_LEN
    mutation_fraction: float = 0.25
    mutation_trials: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.theta < 1:
            raise ValueError("theta must be >= 1")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if not 0.0 < self.mutation_fraction <= 1.0:
            raise ValueError("mutation_fraction must be in (0, 1]")
        if self.mutation_trials < 1 or self.max_lcs_len < 1:
            raise ValueError("mutation_trials and max_lcs_len must be positive")


def substring_stage(a_v: str, b_v: str, theta: int) -> str:
    if not a_v or not b_v:
        return NO_MATCH
    if min(len(a_v), len(b_v)) < theta:
        return NO_MATCH
    return MATCH if a_v in b_v or b_v in a_v else NO_MATCH


def similarity(a_v: str, b_v: str, d_i: int, d_d: int) -> float:
    longest = max(len(a_v), len(b_v))
    if longest == 0:
        return 1.0
    return (longest - (d_i + d_d)) / longest


def edit_distance_stage(a_v: str, b_v: str, eta: float,
                        max_len: int = DEFAULT_MAX_LCS_LEN) -> tuple[str, int, int, float]:
    """Return ``(Yes|No, d_i, d_d, similarity)``; raises :class:`LengthExceeded`."""
    d_i, d_d = lcs_counts(a_v, b_v, max_len)
    sim = similarity(a_v, b_v, d_i, d_d)
    return (YES if sim >= eta else NO), d_i, d_d, sim


def value_tainted(a_v: str, value, params: TaintParams) -> bool:
    """Stages 1-2 as a predicate: does ``value`` look derived from ``a_v``?"""
    if not isinstance(value, str) or not value or not a_v:
        return False
    if substring_stage(a_v, value, params.theta) == MATCH:
        return True
    try:
        return edit_distance_stage(a_v, value, params.eta, params.max_lcs_len)[0] == YES
    except LengthExceeded:
        return False


def tainted_operand(op, a_v: str, params: TaintParams):
    """The operand of a StringOp inferred tainted (base preferred), or None."""
    if value_tainted(a_v, op.base, params):
        return op.base
    for arg in op.args:
        if value_tainted(a_v, arg, params):
            return arg
    return None


def is_op_tainted(op, theta: int, eta: float, a_v: str) -> bool:
    return tainted_operand(op, a_v, TaintParams(theta=theta, eta=eta)) is not None


def trace_check_rejects(d_i: int, d_d: int, d_ti: int, d_td: int) -> bool:
    return (d_i > 0 and d_ti == 0) or (d_d > 0 and d_td == 0)


def count_tainted_ops(a_v: str, trace, params: TaintParams) -> tuple[int, int]:
    """Count tainted insertions and deletions among the StringOps of ``trace``.

    The tainted operand is compared by length with the result: a longer result
    is an insertion, a shorter one a deletion. Ops with non-string results
    (indexOf) change nothing.
    """
    d_ti = d_td = 0
    for ev in trace:
        if ev.kind != "StringOp" or not isinstance(ev.result, str):
            continue
        operand = tainted_operand(ev, a_v, params)
        if operand is None:
            continue
        if len(ev.result) > len(operand):
            d_ti += 1
        elif len(ev.result) < len(operand):
            d_td += 1
    return d_ti, d_td


def trace_check_stage(a_v: str, d_i: int, d_d: int, trace, params: TaintParams) -> tuple[str, int, int]:
    d_ti, d_td = count_tainted_ops(a_v, trace, params)
    verdict = NO_MATCH if trace_check_rejects(d_i, d_d, d_ti, d_td) else MATCHES
    return verdict, d_ti, d_td
