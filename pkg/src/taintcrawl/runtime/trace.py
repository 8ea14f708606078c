"""Execution trace events and the recorder the interpreter writes into."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import IO, Any, Iterable, Optional

from ..gsl.ast import SourceLoc


def _loc(loc: Optional[SourceLoc]):
    return loc.to_json() if loc is not None else None


@dataclass(frozen=True)
class Call:
    seq: int
    caller: Optional[str]
    callee: str
    site: Optional[SourceLoc]
    kind = "Call"


@dataclass(frozen=True)
class Exit:
    """Normal completion of a function body (paired with the preceding Call)."""
    seq: int
    fn: str
    kind = "Exit"


@dataclass(frozen=True)
class StringOp:
    seq: int
    op: str
    base: str
    args: tuple
    result: Any
    loc: SourceLoc
    kind = "StringOp"


@dataclass(frozen=True)
class Branch:
    seq: int
    loc: SourceLoc
    left: Any
    right: Any
    operator: str
    outcome: bool
    kind = "Branch"


@dataclass(frozen=True)
class SourceRead:
    seq: int
    loc: SourceLoc
    source_kind: str
    value: Optional[str]
    app_seeded: bool = False
    kind = "SourceRead"


@dataclass(frozen=True)
class SinkWrite:
    seq: int
    loc: SourceLoc
    sink_kind: str
    value: str
    kind = "SinkWrite"


@dataclass(frozen=True)
class NetRequest:
    seq: int
    method: str
    url: str
    loc: SourceLoc
    kind = "NetRequest"


@dataclass(frozen=True)
class HandlerFired:
    seq: int
    event_type: str
    element_path: tuple
    fn: str
    kind = "HandlerFired"


TraceEvent = Call | Exit | StringOp | Branch | SourceRead | SinkWrite | NetRequest | HandlerFired
Trace = list


def event_to_json(ev) -> dict:
    out: dict[str, Any] = {"kind": ev.kind}
    for f in fields(ev):
        value = getattr(ev, f.name)
        if isinstance(value, SourceLoc):
            value = _loc(value)
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def write_jsonl(events: Iterable, stream: IO[str]):
    for ev in events:
        stream.write(json.dumps(event_to_json(ev), sort_keys=True, separators=(",", ":")) + "\n")


class Tracer:
    """Collects events with strictly increasing sequence numbers.

    With ``enabled=False`` nothing is stored, but execution is otherwise
    identical; callers check :attr:`enabled` before building events.
    """

    def __init__(self, enabled: bool = True, sink: Optional[IO[str]] = None):
        self.enabled = enabled
        self.events: list = []
        self.sink = sink
        self._seq = 0

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def emit(self, cls, *args, **kwargs):
        ev = cls(self.next_seq(), *args, **kwargs)
        self.events.append(ev)
        if self.sink is not None:
            write_jsonl([ev], self.sink)
        return ev

    def mark(self) -> int:
        return len(self.events)

    def since(self, mark: int) -> list:
        return self.events[mark:]


__all__ = [
    "Branch", "Call", "Exit", "HandlerFired", "NetRequest", "SinkWrite", "SourceRead",
    "StringOp", "Trace", "TraceEvent", "Tracer", "event_to_json", "write_jsonl",
]
