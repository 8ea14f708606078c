"""Semantics of the GSL string methods (JavaScript-compatible on the supported subset)."""

from __future__ import annotations

STRING_METHODS = ("substring", "indexOf", "replace", "toLowerCase", "charAt")


def substring(s: str, start: int, end=None) -> str:
    n = len(s)
    a = min(max(start, 0), n)
    b = n if end is None else min(max(end, 0), n)
    if a > b:
        a, b = b, a
    return s[a:b]


def apply_string_op(op: str, base: str, args: tuple):
    if op == "concat":
        return base + "".join(args)
    if op == "substring":
        return substring(base, *args[:2])
    if op == "indexOf":
        return base.find(args[0])
    if op == "replace":
        return base.replace(args[0], args[1], 1)
    if op == "toLowerCase":
        return base.lower()
    if op == "charAt":
        i = args[0]
        return base[i] if 0 <= i < len(base) else ""
    raise ValueError(f"unknown string operation {op!r}")
