"""Guard-directed URL generation from tainted branch and string-operation operands.

Each executed input yields an execution path (its Branch and StringOp
events). Operands that look derived from a URL part are turned into
constraints, and every constraint rewrites the input URL in one place.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .gsl.ast import SourceLoc
from .taint.stages import TaintParams, value_tainted

EQUALS_FULL = "EqualsFull"
CONTAINS_NEEDLE = "ContainsNeedle"
PREFIX_MATCH = "PrefixMatch"

STATE_CAP = 64
RUN_CAP = 512

KEY_NEEDLE = re.compile(r"^[A-Za-z_][\w-]*=$")


@dataclass(frozen=True)
class UrlPart:
    where: str  # fragment | query | path
    value: str
    start: int
    end: int


def url_parts(url: str) -> list[UrlPart]:
    """Input-carrying parts of ``url`` in substitution order: fragment, query values, path segments."""
    hash_at = url.find("#")
    head = url if hash_at < 0 else url[:hash_at]
    q_at = head.find("?")
    scheme_end = url.find("://")
    path_start = url.find("/", scheme_end + 3) if scheme_end >= 0 else 0
    path_end = q_at if q_at >= 0 else len(head)

    parts: list[UrlPart] = []
    if hash_at >= 0 and hash_at + 1 < len(url):
        parts.append(UrlPart("fragment", url[hash_at + 1:], hash_at + 1, len(url)))
    if q_at >= 0:
        pos = q_at + 1
        for chunk in head[q_at + 1:].split("&"):
            key, eq, value = chunk.partition("=")
            if eq and value:
                start = pos + len(key) + 1
                parts.append(UrlPart("query", value, start, start + len(value)))
            pos += len(chunk) + 1
    if 0 <= path_start < path_end:
        pos = path_start
        for seg in url[path_start:path_end].split("/"):
            if seg:
                parts.append(UrlPart("path", seg, pos, pos + len(seg)))
            pos += len(seg) + 1
    return parts


def query_keys(url: str) -> list[str]:
    head = url.split("#", 1)[0]
    if "?" not in head:
        return []
    return [chunk.partition("=")[0] for chunk in head.split("?", 1)[1].split("&") if chunk]


def append_query(url: str, pair: str) -> str:
    head, hash_sep, frag = url.partition("#")
    if "?" in head:
        sep = "" if head.endswith(("?", "&")) else "&"
    else:
        sep = "?"
    return f"{head}{sep}{pair}{hash_sep}{frag}"


@dataclass(frozen=True)
class ConstraintEntry:
    loc: SourceLoc
    tainted_val: str
    compared_val: str
    template: str
    operand: Optional[str] = None

    def to_json(self) -> dict:
        return {"loc": self.loc.to_json(), "tainted_val": self.tainted_val,
                "compared_val": self.compared_val, "template": self.template}


@dataclass(frozen=True)
class GeneratedInput:
    url: str
    parent: str
    constraint: ConstraintEntry
    state_id: Optional[int] = None

    def to_json(self) -> dict:
        return {"url": self.url, "parent": self.parent, "state_id": self.state_id,
                "constraint": self.constraint.to_json()}


def execution_path(trace: list) -> list:
    return [ev for ev in trace if ev.kind in ("Branch", "StringOp")]


def _tainted_part(value, parts: list[UrlPart], params: TaintParams) -> Optional[UrlPart]:
    for part in parts:
        if value_tainted(part.value, value, params):
            return part
    return None


def _prefix_results(path: list) -> set:
    out = set()
    for ev in path:
        if ev.kind != "StringOp" or not isinstance(ev.result, str):
            continue
        if ev.op == "charAt" and ev.args and ev.args[0] == 0:
            out.add(ev.result)
        elif ev.op == "substring" and ev.args and ev.args[0] == 0 and len(ev.args) > 1:
            out.add(ev.result)
    return out


def harvest_constraints(path: list, url: str, params: TaintParams) -> dict[SourceLoc, ConstraintEntry]:
    """Constraints for every tainted guard operand of ``path``, keyed by location."""
    parts = url_parts(url)
    found: dict[SourceLoc, ConstraintEntry] = {}
    if not parts:
        return found
    prefixes = _prefix_results(path)
    for ev in path:
        if ev.kind == "StringOp":
            if ev.op != "indexOf" or ev.result != -1 or not ev.args or not ev.args[0]:
                continue
            part = _tainted_part(ev.base, parts, params)
            if part is not None:
                found[ev.loc] = ConstraintEntry(ev.loc, part.value, ev.args[0], CONTAINS_NEEDLE, ev.base)
            continue
        if ev.operator not in ("==", "!="):
            continue
        left, right = ev.left, ev.right
        if not (isinstance(left, str) and isinstance(right, str)) or left == right:
            continue
        for operand, compared in ((left, right), (right, left)):
            if not compared:
                continue
            part = _tainted_part(operand, parts, params)
            if part is None:
                continue
            template = PREFIX_MATCH if operand in prefixes else EQUALS_FULL
            found[ev.loc] = ConstraintEntry(ev.loc, part.value, compared, template, operand)
            break
    return found


def generate_new_urls(constraints: dict, url: str, payload: str = "payload",
                      warnings: Optional[list] = None) -> list[tuple[str, ConstraintEntry]]:
    """Apply each constraint to ``url`` on its own; one rewritten URL per constraint.

    A key-shaped needle (``theme=``) whose key is absent from the query is
    satisfied by appending ``key=<payload>`` instead of substituting.
    """
    out: list[tuple[str, ConstraintEntry]] = []
    seen = {url}
    parts = url_parts(url)
    keys = query_keys(url)
    for loc in sorted(constraints):
        entry = constraints[loc]
        if entry.template == CONTAINS_NEEDLE and KEY_NEEDLE.match(entry.compared_val) \
                and entry.compared_val[:-1] not in keys:
            new = append_query(url, f"{entry.compared_val}{payload}")
        else:
            part = next((p for p in parts if entry.tainted_val in p.value), None)
            if part is None:
                if warnings is not None:
                    warnings.append(f"tainted value {entry.tainted_val!r} not found in {url}")
                continue
            at = part.start + part.value.index(entry.tainted_val)
            if entry.template == PREFIX_MATCH:
                replacement = entry.compared_val + entry.tainted_val
            else:
                replacement = entry.compared_val
            new = url[:at] + replacement + url[at + len(entry.tainted_val):]
        if new not in seen:
            seen.add(new)
            out.append((new, entry))
    return out


def value_input_gen(path: list, url: str, params: TaintParams, payload: str = "payload",
                    warnings: Optional[list] = None) -> list[tuple[str, ConstraintEntry]]:
    constraints = harvest_constraints(path, url, params)
    if not constraints:
        return []
    return generate_new_urls(constraints, url, payload, warnings)


def satisfied(entry: ConstraintEntry, url: str) -> bool:
    return entry.compared_val in url


@dataclass
class RunBudget:
    """Run-wide cap on generated inputs, shared across states."""
    limit: int = RUN_CAP
    used: int = 0

    def take(self) -> bool:
        if self.used >= self.limit:
            return False
        self.used += 1
        return True


@dataclass
class AnalyzeResult:
    executions: list = field(default_factory=list)
    generated: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    truncated: bool = False


def analyze(seed_url: str, run: Callable[[str], object], params: TaintParams,
            payload: str = "payload", state_id: Optional[int] = None,
            state_cap: int = STATE_CAP, budget: Optional[RunBudget] = None) -> AnalyzeResult:
    """Drain the input queue for one state.

    ``run(url)`` restores the state with ``url`` as its input and returns an
    execution (anything with a ``.trace``), or None when the run failed.
    Constraints accumulate across the inputs of this state.
    """
    budget = budget if budget is not None else RunBudget()
    result = AnalyzeResult()
    queue = deque([seed_url])
    seen = {seed_url}
    constraints: dict[SourceLoc, ConstraintEntry] = {}
    enqueued = 0
    while queue:
        url = queue.popleft()
        execution = run(url)
        if execution is None:
            continue
        result.executions.append(execution)
        fresh = harvest_constraints(execution_path(execution.trace), url, params)
        # earlier constraints still apply unless this input already satisfies them
        active = {loc: e for loc, e in constraints.items() if not satisfied(e, url)}
        active.update(fresh)
        constraints.update(fresh)
        if not active:
            continue
        misses: list = []
        for new_url, entry in generate_new_urls(active, url, payload, misses):
            if new_url in seen:
                continue
            if enqueued >= state_cap or not budget.take():
                result.truncated = True
                break
            seen.add(new_url)
            enqueued += 1
            queue.append(new_url)
            result.generated.append(GeneratedInput(new_url, url, entry, state_id))
        # constraints carried over from earlier inputs often no longer apply; only
        # misses of constraints harvested from this very input are reported
        for entry in fresh.values():
            message = f"tainted value {entry.tainted_val!r} not found in {url}"
            if message in misses and message not in result.warnings:
                result.warnings.append(message)
    return result
