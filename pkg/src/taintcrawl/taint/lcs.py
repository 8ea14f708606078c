"""Longest common subsequence lengths and the insertion/deletion counts derived from them.

The quadratic kernel is compiled when the ``_lcs`` extension is available and
falls back to pure Python otherwise; ``BACKEND`` names the one in use.
"""

from __future__ import annotations

from array import array
from typing import Hashable, Sequence

DEFAULT_MAX_LCS_LEN = 2000


class LengthExceeded(ValueError):
    pass


def lcs_length_py(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    if len(b) > len(a):
        a, b = b, a
    if not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        diag = 0
        for j, y in enumerate(b):
            up = row[j + 1]
            if x == y:
                row[j + 1] = diag + 1
            elif row[j] > up:
                row[j + 1] = row[j]
            diag = up
    return row[-1]


def _codes(seq, table: dict) -> array:
    if isinstance(seq, str):
        return array("i", map(ord, seq))
    return array("i", (table.setdefault(x, len(table)) for x in seq))


try:
    from ._lcs import lcs_length_codes
except ImportError:  # extension not built
    lcs_length_codes = None


def lcs_length_ext(a, b) -> int:
    table: dict = {}
    return lcs_length_codes(_codes(a, table), _codes(b, table))


if lcs_length_codes is not None:
    BACKEND = "cython"
    lcs_length = lcs_length_ext
else:
    BACKEND = "python"
    lcs_length = lcs_length_py


def lcs_counts(a_v: str, b_v: str, max_len: int = DEFAULT_MAX_LCS_LEN) -> tuple[int, int]:
    """Return ``(d_i, d_d)``: insertions and deletions turning ``a_v`` into ``b_v``."""
    if len(a_v) > max_len or len(b_v) > max_len:
        raise LengthExceeded(f"operand longer than {max_len} characters")
    common = lcs_length(a_v, b_v)
    return len(b_v) - common, len(a_v) - common


def structure_diff(a: Sequence, b: Sequence) -> float:
    """``1 - |LCS| / max(len)`` over two token sequences; 0 for two empty sequences."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return 1.0 - lcs_length(a, b) / longest
