"""Pessimistic field-based approximate call graphs with trace-driven refinement.

Nodes are functions (plus one synthetic ``<main>`` per script), event
registration sites and sink call sites. Static edges come from three
resolution rules: lexical names, property-name (field) matching and
immediately invoked function expressions. Traces add Dynamic edges for calls
the static rules missed and suppress Static edges that repeated executions
refute.
"""

from __future__ import annotations

import copy
import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .gsl.ast import Node, SourceLoc, main_id, registration_id, sink_id
from .gsl.hostapi import sink_site_api
from .runtime import trace as tr

FUNCTION = "Function"
EVENT_REGISTRATION = "EventRegistration"
SINK_SITE = "SinkSite"

STATIC = "Static"
DYNAMIC = "Dynamic"
ACTIVE = "Active"
SUPPRESSED = "Suppressed"

SUPPRESSION_THRESHOLD = 2
INF = float("inf")


@dataclass(frozen=True)
class CgNode:
    id: str
    loc: Optional[SourceLoc]
    kind: str
    api: Optional[str] = None  # sink API for SinkSite nodes


@dataclass
class CgEdge:
    src: str
    dst: str
    provenance: str = STATIC
    status: str = ACTIVE
    observations: int = 0
    refutations: int = 0
    containment: bool = False

    @property
    def cost(self) -> int:
        return 0 if self.containment else 1


@dataclass
class CallGraph:
    nodes: dict[str, CgNode] = field(default_factory=dict)
    edges: dict[tuple[str, str], CgEdge] = field(default_factory=dict)
    applied: set = field(default_factory=set)

    def add_node(self, node: CgNode):
        self.nodes.setdefault(node.id, node)

    def add_edge(self, src: str, dst: str, **kw) -> CgEdge:
        edge = self.edges.get((src, dst))
        if edge is None:
            edge = self.edges[(src, dst)] = CgEdge(src, dst, **kw)
        return edge

    def has_edge(self, src: str, dst: str, active_only: bool = True) -> bool:
        edge = self.edges.get((src, dst))
        return edge is not None and (not active_only or edge.status == ACTIVE)

    def successors(self, node_id: str) -> list[CgEdge]:
        return [e for (s, _), e in self.edges.items() if s == node_id]

    def adjacency(self) -> dict[str, list[tuple[str, int]]]:
        adj: dict[str, list[tuple[str, int]]] = {n: [] for n in self.nodes}
        for (s, d), e in sorted(self.edges.items()):
            if e.status == ACTIVE:
                adj.setdefault(s, []).append((d, e.cost))
        return adj

    def sink_sites(self, apis: Optional[Iterable[str]] = None) -> set[str]:
        wanted = None if apis is None else set(apis)
        return {n.id for n in self.nodes.values()
                if n.kind == SINK_SITE and (wanted is None or n.api in wanted)}

    def copy(self) -> "CallGraph":
        return copy.deepcopy(self)

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": n.id, "kind": n.kind, "loc": n.loc.to_json() if n.loc else None}
                      for n in sorted(self.nodes.values(), key=lambda n: n.id)],
            "edges": [{"from": e.src, "to": e.dst, "provenance": e.provenance, "status": e.status,
                       "observations": e.observations, "refutations": e.refutations,
                       "containment": e.containment}
                      for _, e in sorted(self.edges.items())],
        }


# static construction


class _Scope:
    def __init__(self, fn_id: str, parent: Optional["_Scope"] = None):
        self.fn_id = fn_id
        self.parent = parent
        self.bindings: dict[str, list[str]] = {}  # name -> function ids ([] = non-function)

    def resolve(self, name: str) -> list[str]:
        scope = self
        while scope is not None:
            if name in scope.bindings:
                return scope.bindings[name]
            scope = scope.parent
        return []

    def owner(self, name: str) -> "_Scope":
        scope = self
        while scope is not None:
            if name in scope.bindings:
                return scope
            scope = scope.parent
        root = self
        while root.parent is not None:
            root = root.parent
        return root


class _Builder:
    def __init__(self):
        self.graph = CallGraph()
        self.fields: dict[str, list[str]] = {}
        self.global_scope = _Scope("<global>")
        self.scopes: dict[str, _Scope] = {}
        # (caller, callee expression, scope) resolved after all bindings are known
        self.calls: list[tuple[str, Node, _Scope]] = []
        self.registrations: list[tuple[str, Node, _Scope]] = []

    # pass 1: functions, bindings and fields

    def declare(self, root: Node, script_id: str):
        fn = main_id(script_id)
        self.graph.add_node(CgNode(fn, root.loc, FUNCTION))
        self._collect(root.children, fn, self.global_scope)

    def _new_function(self, node: Node, parent: _Scope) -> _Scope:
        self.graph.add_node(CgNode(node.fn_id, node.loc, FUNCTION))
        scope = _Scope(node.fn_id, parent)
        for p in node.params:
            scope.bindings[p] = []
        if node.kind == "FunctionExpr" and node.value:
            scope.bindings[node.value] = [node.fn_id]
        self.scopes[node.fn_id] = scope
        self._collect(node.children[0].children, node.fn_id, scope)
        return scope

    def _collect(self, nodes: list, fn: str, scope: _Scope):
        # hoisted declarations first so later references resolve
        for stmt in nodes:
            if stmt.kind == "FunctionDecl":
                scope.bindings.setdefault(stmt.value, [])
                scope.bindings[stmt.value].append(stmt.fn_id)
            elif stmt.kind == "VarDecl":
                scope.bindings.setdefault(stmt.value, [])
        for stmt in nodes:
            self._visit(stmt, fn, scope)

    def _visit(self, node: Node, fn: str, scope: _Scope):
        k = node.kind
        if k in ("FunctionDecl", "FunctionExpr"):
            self._new_function(node, scope)
            return
        if k == "Block":
            self._collect(node.children, fn, scope)
            return
        if k == "VarDecl" and node.children:
            self._bind_name(node.value, node.children[0], scope, declared=True)
        elif k == "Assign":
            target, value = node.children
            if target.kind == "Ident":
                self._bind_name(target.value, value, scope)
            else:
                prop = _property_name(target)
                if prop is not None:
                    self._bind_field(prop, value, scope)
        elif k == "ObjectLit":
            for key, value in zip(node.value, node.children):
                self._bind_field(key, value, scope)

        api = sink_site_api(node)
        if api is not None:
            sid = sink_id(api, node.loc)
            self.graph.add_node(CgNode(sid, node.loc, SINK_SITE, api))
            self.graph.add_edge(fn, sid, containment=True)
        if k == "Call":
            self.calls.append((fn, node, scope))
        elif k == "MethodCall":
            self.calls.append((fn, node, scope))
        elif k == "EventRegister":
            rid = registration_id(node.loc)
            self.graph.add_node(CgNode(rid, node.loc, EVENT_REGISTRATION))
            self.graph.add_edge(fn, rid)
            self.registrations.append((rid, node.children[2], scope))
        for child in node.children:
            self._visit(child, fn, scope)

    def _function_ids(self, value: Node, scope: _Scope) -> list[str]:
        if value.kind == "FunctionExpr":
            return [value.fn_id]
        if value.kind == "Ident":
            return list(scope.resolve(value.value))
        return []

    def _bind_name(self, name: str, value: Node, scope: _Scope, declared: bool = False):
        target = scope if declared else scope.owner(name)
        ids = target.bindings.setdefault(name, [])
        for fid in self._function_ids(value, scope):
            if fid not in ids:
                ids.append(fid)

    def _bind_field(self, prop: str, value: Node, scope: _Scope):
        ids = self.fields.setdefault(prop, [])
        for fid in self._function_ids(value, scope):
            if fid not in ids:
                ids.append(fid)

    # pass 2: resolve call sites and registrations

    def resolve(self):
        for fn, node, scope in self.calls:
            for callee in self._callees(node, scope):
                self.graph.add_edge(fn, callee)
        for rid, handler, scope in self.registrations:
            for callee in self._function_ids(handler, scope):
                self.graph.add_edge(rid, callee)

    def _callees(self, node: Node, scope: _Scope) -> list[str]:
        if node.kind == "MethodCall":
            return list(self.fields.get(node.value, []))
        callee = node.children[0]
        if callee.kind == "Ident":
            return list(scope.resolve(callee.value))
        if callee.kind == "FunctionExpr":
            return [callee.fn_id]
        prop = _property_name(callee)
        if prop is not None:
            return list(self.fields.get(prop, []))
        return []


def _property_name(node: Node) -> Optional[str]:
    if node.kind == "Member":
        return node.value
    if node.kind == "Index" and node.children[1].kind == "StrLit":
        return node.children[1].value
    return None


def compute_acg(scripts: Iterable[tuple[str, Node]]) -> CallGraph:
    """Build the static graph for ``(script_id, ast)`` pairs sharing one global scope."""
    builder = _Builder()
    for script_id, root in scripts:
        builder.declare(root, script_id)
    builder.resolve()
    for edge in builder.graph.edges.values():
        if edge.dst not in builder.graph.nodes:
            builder.graph.add_node(CgNode(edge.dst, None, FUNCTION))
    return builder.graph


# refinement


def trace_digest(trace: list) -> str:
    h = hashlib.blake2b(digest_size=16)
    for ev in trace:
        h.update(json.dumps(tr.event_to_json(ev), sort_keys=True).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def complete_executions(trace: list) -> list[tuple[str, set]]:
    """Return ``(fn, direct callees)`` for every Call that reached its matching Exit."""
    done: list[tuple[str, set]] = []
    stack: list[tuple[str, set]] = []
    for ev in trace:
        if ev.kind == "HandlerFired":
            stack = []
        elif ev.kind == "Call":
            if stack:
                stack[-1][1].add(ev.callee)
            stack.append((ev.callee, set()))
        elif ev.kind == "Exit":
            while stack and stack[-1][0] != ev.fn:
                stack.pop()
            if stack:
                done.append(stack.pop())
    return done


def _merge(into: CallGraph, other: CallGraph):
    for node in other.nodes.values():
        into.add_node(node)
    for key, edge in other.edges.items():
        if key not in into.edges:
            into.edges[key] = copy.copy(edge)


def refine_acg(acg: CallGraph, cg: CallGraph, trace: list,
               threshold: int = SUPPRESSION_THRESHOLD) -> CallGraph:
    """Union ``acg`` with ``cg`` and fold in the evidence of ``trace``.

    Returns a new graph; the inputs are not modified. A trace that was already
    folded into ``acg`` is not counted twice, which makes refinement
    idempotent.
    """
    graph = acg.copy()
    _merge(graph, cg)
    digest = trace_digest(trace)
    if not trace or digest in graph.applied:
        return graph
    graph.applied.add(digest)

    for ev in trace:
        if ev.kind != "Call" or ev.caller is None:
            continue
        for fid, kind in ((ev.caller, FUNCTION), (ev.callee, FUNCTION)):
            if fid not in graph.nodes:
                graph.add_node(CgNode(fid, None, EVENT_REGISTRATION if fid.startswith("reg@") else kind))
        edge = graph.edges.get((ev.caller, ev.callee))
        if edge is None:
            edge = graph.add_edge(ev.caller, ev.callee, provenance=DYNAMIC)
        edge.observations += 1
        if edge.status == SUPPRESSED:
            edge.status = ACTIVE

    # only function-to-function call edges can be refuted by a trace
    for fn, callees in complete_executions(trace):
        for edge in graph.successors(fn):
            if edge.provenance != STATIC or edge.containment or edge.dst in callees:
                continue
            if graph.nodes[edge.dst].kind != FUNCTION:
                continue
            edge.refutations += 1
            if edge.refutations >= threshold and edge.observations == 0:
                edge.status = SUPPRESSED
    return graph


def distance_to_targets(acg: CallGraph, start: str, targets: set) -> float:
    """Shortest path length from ``start`` to any target; containment edges cost 0."""
    if start in targets:
        return 0
    adj = acg.adjacency()
    if start not in adj:
        return INF
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        d = dist[node]
        if node in targets:
            return d
        for nxt, cost in adj.get(node, []):
            nd = d + cost
            if nd < dist.get(nxt, INF):
                dist[nxt] = nd
                if cost == 0:
                    queue.appendleft(nxt)
                else:
                    queue.append(nxt)
    return INF


def distances_to_targets(acg: CallGraph, targets: set) -> dict[str, float]:
    """Distance from every node to the nearest target (reverse 0-1 BFS); missing means unreachable."""
    radj: dict[str, list[tuple[str, int]]] = {}
    for (s, d), e in acg.edges.items():
        if e.status == ACTIVE:
            radj.setdefault(d, []).append((s, e.cost))
    dist: dict[str, float] = {t: 0 for t in targets}
    queue = deque(sorted(targets))
    while queue:
        node = queue.popleft()
        d = dist[node]
        for prev, cost in radj.get(node, []):
            nd = d + cost
            if nd < dist.get(prev, INF):
                dist[prev] = nd
                if cost == 0:
                    queue.appendleft(prev)
                else:
                    queue.append(prev)
    return dist


def functions_containing(acg: CallGraph, targets: set) -> set[str]:
    """Functions that directly contain one of the target sink sites."""
    return {e.src for e in acg.edges.values() if e.containment and e.dst in targets}


__all__ = [
    "ACTIVE", "DYNAMIC", "EVENT_REGISTRATION", "FUNCTION", "INF", "SINK_SITE", "STATIC",
    "SUPPRESSED", "SUPPRESSION_THRESHOLD", "CallGraph", "CgEdge", "CgNode",
    "complete_executions", "compute_acg", "distance_to_targets", "distances_to_targets", "functions_containing",
    "refine_acg", "trace_digest",
]
