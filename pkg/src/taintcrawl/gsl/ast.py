"""AST node type shared by the parser, printer, interpreter and call-graph builder."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional


@dataclass(frozen=True, order=True)
class SourceLoc:
    script_id: str
    line: int
    col: int

    def __post_init__(self):
        if self.line < 1 or self.col < 1:
            raise ValueError(f"invalid source location {self.line}:{self.col}")

    def __str__(self) -> str:
        return f"{self.script_id}:{self.line}:{self.col}"

    def to_json(self) -> dict:
        return {"script": self.script_id, "line": self.line, "col": self.col}


KINDS = frozenset({
    "FunctionDecl", "FunctionExpr", "VarDecl", "Assign", "If", "While", "Call",
    "MethodCall", "Member", "Index", "BinOp", "StrLit", "NumLit", "BoolLit",
    "Ident", "Return", "Block", "EventRegister", "ObjectLit",
})

DEFAULT_LOOP_BOUND = 10_000


@dataclass(eq=False)
class Node:
    """One GSL syntax node.

    ``value`` carries the kind-specific payload: identifier or function name,
    literal value, operator, or accessed property name. Child layout per kind:

    ==============  =========================================
    Block           statements
    VarDecl         [init] or []
    Assign          [target, value]
    If              [cond, then] or [cond, then, else]
    While           [cond, body]        (``bound`` holds the cap)
    FunctionDecl    [body]              (``params``, ``fn_id``)
    FunctionExpr    [body]              (``params``, ``fn_id``)
    Return          [expr] or []
    Call            [callee, *args]
    MethodCall      [receiver, *args]   (``value`` = method)
    EventRegister   [target, type, handler]
    Member          [object]            (``value`` = property)
    Index           [object, key]
    BinOp           [left, right]       (``value`` = operator)
    ObjectLit       property values     (``value`` = key tuple)
    ==============  =========================================
    """

    kind: str
    loc: SourceLoc
    children: list = field(default_factory=list)
    value: Any = None
    params: tuple = ()
    bound: Optional[int] = None
    fn_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")

    def walk(self) -> Iterator["Node"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def shape(self) -> tuple:
        """Structural identity ignoring locations (used for round-trip checks)."""
        return (
            self.kind,
            self.value,
            self.params,
            self.bound,
            tuple(child.shape() for child in self.children),
        )

    def __repr__(self) -> str:
        inner = ", ".join(repr(c) for c in self.children)
        head = self.kind if self.value is None else f"{self.kind}({self.value!r})"
        return f"{head}[{inner}]" if self.children else head


def function_id(name: Optional[str], loc: SourceLoc) -> str:
    return f"{name or 'anon'}@{loc}"


def main_id(script_id: str) -> str:
    return f"<main>@{script_id}"


def registration_id(loc: SourceLoc) -> str:
    return f"reg@{loc}"


def sink_id(api: str, loc: SourceLoc) -> str:
    return f"sink:{api}@{loc}"
