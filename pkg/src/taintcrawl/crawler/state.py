"""Crawl states, the state graph and the visited-state heuristics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..runtime.session import EventDescriptor
from ..taint.lcs import structure_diff
from ..urls import Url

GUIDED = "Guided"
RANDOM = "Random"
HYBRID = "Hybrid"
STRATEGIES = (GUIDED, RANDOM, HYBRID)

DEFAULT_BUDGET = 500


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = GUIDED
    hybrid_random_period: int = 5
    seed: int = 0
    size_change_threshold: float = 0.20
    structure_diff_threshold: float = 0.10
    event_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.hybrid_random_period < 2:
            raise ValueError("hybrid_random_period must be >= 2")
        for name in ("size_change_threshold", "structure_diff_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.event_budget < 0:
            raise ValueError("event_budget must be non-negative")


@dataclass
class CrawlState:
    id: int
    url: str
    dom_digest: str
    dom_size: int
    tag_sequence: tuple
    parent: Optional[int] = None
    inbound_event: Optional[EventDescriptor] = None
    event_seq: tuple = ()
    pending_events: list = field(default_factory=list)
    discovered_scripts: tuple = ()
    entry_url: str = ""
    page_events: tuple = ()
    stale: bool = False
    analyzed: bool = False

    @property
    def path(self) -> str:
        return Url.parse(self.url).path

    def summary(self) -> dict:
        return {"id": self.id, "url": self.url, "dom_digest": self.dom_digest,
                "dom_size": self.dom_size, "parent": self.parent,
                "depth": len(self.event_seq), "stale": self.stale}


@dataclass
class StateGraph:
    states: dict[int, CrawlState] = field(default_factory=dict)
    edges: list = field(default_factory=list)  # (from id, EventDescriptor, to id)

    def add_state(self, state: CrawlState):
        if state.id in self.states:
            raise ValueError(f"duplicate state id {state.id}")
        if state.parent is not None and state.parent not in self.states:
            raise ValueError(f"unknown parent state {state.parent}")
        self.states[state.id] = state

    def add_edge(self, src: int, ev: EventDescriptor, dst: int):
        if src not in self.states or dst not in self.states:
            raise ValueError("edge endpoints must be existing states")
        edge = (src, ev, dst)
        if edge not in self.edges:
            self.edges.append(edge)

    @property
    def root(self) -> Optional[CrawlState]:
        return self.states.get(0)

    def next_id(self) -> int:
        return len(self.states)

    def out_edges(self, src: int) -> list:
        return [e for e in self.edges if e[0] == src]

    def shortest_path(self, src: int, dst: int) -> Optional[list[EventDescriptor]]:
        """Fewest-events path between two states (BFS, edges in insertion order)."""
        if src == dst:
            return []
        prev: dict[int, tuple[int, EventDescriptor]] = {}
        frontier = [src]
        seen = {src}
        while frontier:
            nxt = []
            for node in frontier:
                for _, ev, to in self.out_edges(node):
                    if to in seen or self.states[to].stale:
                        continue
                    seen.add(to)
                    prev[to] = (node, ev)
                    if to == dst:
                        path = []
                        while to != src:
                            to, ev = prev[to]
                            path.append(ev)
                        return list(reversed(path))
                    nxt.append(to)
            frontier = nxt
        return None


def is_visited(sg: StateGraph, candidate: CrawlState, cfg: StrategyConfig) -> Optional[int]:
    """Id of a stored state equivalent to ``candidate``, if any (earliest first)."""
    path = candidate.path
    for state in sg.states.values():
        if state.id == candidate.id or state.path != path:
            continue
        largest = max(state.dom_size, candidate.dom_size)
        if largest and abs(state.dom_size - candidate.dom_size) / largest > cfg.size_change_threshold:
            continue
        if state.dom_digest == candidate.dom_digest:
            return state.id
        if structure_diff(state.tag_sequence, candidate.tag_sequence) <= cfg.structure_diff_threshold:
            return state.id
    return None
