"""GSL runtime values and the few coercions the language allows."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..gsl.ast import Node


class _Special:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


UNDEFINED = _Special("undefined")
NULL = _Special("null")


@dataclass(eq=False)
class JsObject:
    props: dict[str, Any] = field(default_factory=dict)


@dataclass(eq=False)
class Closure:
    node: Node
    env: Any
    fn_id: str

    @property
    def params(self) -> tuple:
        return self.node.params


@dataclass(eq=False)
class HostFunction:
    name: str
    fn: Callable


def is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def to_str(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if v.is_integer():
            return str(int(v))
        return repr(v)
    if v is UNDEFINED or v is NULL:
        return v.name
    if isinstance(v, (Closure, HostFunction)):
        return "function"
    return "[object Object]"


def truthy(v) -> bool:
    if v is UNDEFINED or v is NULL:
        return False
    if isinstance(v, bool):
        return v
    if is_number(v):
        return v != 0 and not (isinstance(v, float) and math.isnan(v))
    if isinstance(v, str):
        return v != ""
    return True


def loose_equals(a, b) -> bool:
    # no cross-type coercion except null == undefined
    if a in (UNDEFINED, NULL) or b in (UNDEFINED, NULL):
        return (a is UNDEFINED or a is NULL) and (b is UNDEFINED or b is NULL)
    if is_number(a) and is_number(b):
        return a == b
    if type(a) is not type(b):
        return False
    if isinstance(a, (str, bool)):
        return a == b
    return a is b


def to_plain(v) -> Optional[Any]:
    """Convert a runtime value to a JSON-safe observation."""
    if v is UNDEFINED or v is NULL:
        return None
    if isinstance(v, (str, bool, int)):
        return v
    if isinstance(v, float):
        return int(v) if v.is_integer() else v
    return to_str(v)


def to_int(v) -> int:
    if is_number(v):
        if isinstance(v, float) and math.isnan(v):
            return 0
        return int(v)
    return 0
