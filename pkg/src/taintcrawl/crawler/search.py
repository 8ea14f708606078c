"""The feedback-driven crawl loop: analyze, refine the call graph, prioritize, dispatch."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import IO, Optional

from ..analyses import DOM_XSS, TargetAnalysis
from ..callgraph import INF, CallGraph, compute_acg, distances_to_targets, refine_acg
from ..gsl.bundle import AppBundle, PageSpec, extract_static_links
from ..inputgen import RunBudget, analyze
from ..runtime.interp import GslRuntimeError
from ..runtime.session import (BrowserSession, EventDescriptor, NavigationError, StaleEvent,
                               Storage, dispatch_event, enumerate_events, fill_forms, is_submit_like,
                               load_page)
from ..taint.pipeline import Execution, FlowVerdict, RerunFailed, run_pipeline
from ..taint.stages import TaintParams
from ..urls import Url, resolve, strip_fragment
from .state import GUIDED, HYBRID, RANDOM, CrawlState, StateGraph, StrategyConfig, is_visited

log = logging.getLogger(__name__)

NAVIGATE = "navigate"
STATIC_LINK = "StaticLink"
ANCHOR_TAGS = ("a", "area")


class RestoreFailed(Exception):
    def __init__(self, target: int, reason: str):
        super().__init__(f"state {target}: {reason}")
        self.target = target


@dataclass
class CrawlResult:
    bundle: AppBundle
    analysis: TargetAnalysis
    cfg: StrategyConfig
    params: TaintParams
    graph: StateGraph
    acg: CallGraph
    verdicts: list
    endpoints: dict
    coverage: list
    generated: list
    warnings: list
    budget_exhausted: bool
    dispatched: int
    restores: int = 0
    restore_failures: int = 0
    input_truncated: bool = False
    sinks_reached: dict = field(default_factory=dict)

    @property
    def flows(self) -> list[FlowVerdict]:
        return [v for v in self.verdicts if v.is_flow]

    def events_to_all(self, total: Optional[int] = None) -> Optional[int]:
        """Dispatch count at which coverage first reached ``total`` (default: its final value)."""
        if not self.coverage:
            return None
        goal = self.coverage[-1][1] if total is None else total
        for events, count in self.coverage:
            if count >= goal:
                return events
        return None


def page_targets(bundle: AppBundle, page: PageSpec, apis) -> set:
    cg = compute_acg([(s, bundle.asts[s]) for s in page.scripts])
    return cg.sink_sites(apis)


def seed_from_links(bundle: AppBundle, target_apis, page: Optional[PageSpec] = None) -> list[str]:
    """Same-origin links of ``page`` (default: the seed page) to known pages, target pages first."""
    page = page or bundle.page_for(bundle.seed_url)
    base = bundle.page_url(page)
    urls = []
    for href in extract_static_links(page):
        url = _link_target(bundle, base, href)
        if url is not None and url not in urls:
            urls.append(url)
    has = {u: bool(page_targets(bundle, bundle.page_for(u), target_apis)) for u in urls}
    return sorted(urls, key=lambda u: not has[u])


def _link_target(bundle: AppBundle, base: str, href: str) -> Optional[str]:
    if href in bundle.config.external_links:
        return None
    url = resolve(base, href)
    if Url.parse(url).origin() != Url.parse(bundle.seed_url).origin():
        return None
    return url if bundle.page_for(url) is not None else None


class Crawler:
    def __init__(self, bundle: AppBundle, analysis: TargetAnalysis, cfg: StrategyConfig,
                 params: Optional[TaintParams] = None, trace_sink: Optional[IO[str]] = None):
        self.bundle = bundle
        self.analysis = analysis
        self.cfg = cfg
        self.params = params or TaintParams(seed=cfg.seed)
        self.trace_sink = trace_sink
        self.rng = random.Random(cfg.seed)
        self.storage = Storage()
        self.apis = bundle.config.apis
        self.sink_kinds = analysis.sink_kinds(self.apis)
        self.sg = StateGraph()
        self.acg = CallGraph()
        self.pages_seen: set = set()
        self._page_targets: dict[str, bool] = {}
        self.session: Optional[BrowserSession] = None
        self.current = 0
        self.dispatched = 0
        self.selections = 0
        self.restores = 0
        self.restore_failures = 0
        self.budget_exhausted = False
        self.warnings: list[str] = []
        self.verdicts: dict[tuple, FlowVerdict] = {}
        self.endpoints: dict[tuple, int] = {}
        self.sinks_reached: dict = {}
        self.coverage: list[tuple[int, int]] = []
        self.generated: list = []
        self.input_budget = RunBudget()
        self.input_truncated = False
        self.degraded_random = False

    # bookkeeping

    def warn(self, message: str):
        if message not in self.warnings:
            log.debug(message)
            self.warnings.append(message)

    @property
    def targets(self) -> set:
        return self.acg.sink_sites(self.analysis.target_apis)

    def _learn_page(self, page: PageSpec):
        if page.path in self.pages_seen:
            return
        self.pages_seen.add(page.path)
        cg = compute_acg([(s, self.bundle.asts[s]) for s in page.scripts])
        self.acg = refine_acg(self.acg, cg, [])

    def _observe(self, trace: list):
        for ev in trace:
            if ev.kind == "NetRequest":
                key = (ev.method, strip_fragment(ev.url))
                self.endpoints.setdefault(key, self.dispatched)
            elif ev.kind == "SinkWrite" and ev.sink_kind in self.sink_kinds:
                self.sinks_reached.setdefault(ev.loc, self.dispatched)

    def _coverage_count(self) -> int:
        if self.analysis.kind == DOM_XSS:
            return len(self.sinks_reached)
        return len(self.endpoints)

    def _record_coverage(self):
        point = (self.dispatched, self._coverage_count())
        if self.coverage and self.coverage[-1][0] == point[0]:
            self.coverage[-1] = point
        else:
            self.coverage.append(point)

    def _feedback(self, trace: list):
        self._observe(trace)
        if trace:
            self.acg = refine_acg(self.acg, CallGraph(), trace)

    # browser driving

    def _load(self, url: str) -> list:
        try:
            session, trace = load_page(self.bundle, url, self.cfg.seed, self.storage,
                                       trace_sink=self.trace_sink)
        except GslRuntimeError as err:
            session = err.session
            trace = list(session.trace)
            self.warn(f"runtime error loading {url}: {err}")
        self.session = session
        self._learn_page(session.page)
        self._feedback(trace)
        return trace

    def _fire(self, session: BrowserSession, ev: EventDescriptor) -> list:
        """Dispatch on ``session`` (no bookkeeping); StaleEvent propagates."""
        if is_submit_like(session, ev):
            fill_forms(session, self.bundle.config.payloads)
        mark = session.tracer.mark()
        try:
            return dispatch_event(session, ev)
        except GslRuntimeError as err:
            self.warn(f"runtime error in {ev.handler_fn}: {err}")
            return session.tracer.since(mark)

    def _step(self, ev: EventDescriptor) -> list:
        """One crawl dispatch (counted against the budget)."""
        self.dispatched += 1
        if ev.event_type == NAVIGATE:
            trace = self._load(ev.handler_fn)
        else:
            trace = self._fire(self.session, ev)
            self._feedback(trace)
        self._record_coverage()
        return trace

    def _budget_left(self) -> bool:
        if self.dispatched >= self.cfg.event_budget:
            self.budget_exhausted = True
            return False
        return True

    # states

    def _nav_events(self, session: BrowserSession) -> list[EventDescriptor]:
        base = session.current_url
        out, seen = [], set()
        for el in session.document.root.iter():
            href = el.attrs.get("href")
            if el.tag not in ANCHOR_TAGS or not href or href.startswith("#") or "javascript:" in href:
                continue
            url = _link_target(self.bundle, base, href)
            if url is None or url in seen:
                continue
            seen.add(url)
            out.append(EventDescriptor(el.path(), NAVIGATE, url, STATIC_LINK))
        return sorted(out, key=lambda e: not self._url_has_targets(e.handler_fn))

    def _url_has_targets(self, url: str) -> bool:
        page = self.bundle.page_for(url)
        if page.path not in self._page_targets:
            self._page_targets[page.path] = bool(page_targets(self.bundle, page, self.analysis.target_apis))
        return self._page_targets[page.path]

    def _snapshot(self, parent: Optional[CrawlState], ev: Optional[EventDescriptor]) -> CrawlState:
        session = self.session
        doc = session.document
        if parent is None:
            event_seq, entry, page_events = (), session.current_url, ()
        else:
            event_seq = parent.event_seq + (ev,)
            if ev.event_type == NAVIGATE:
                entry, page_events = ev.handler_fn, ()
            else:
                entry, page_events = parent.entry_url, parent.page_events + (ev,)
        return CrawlState(
            id=self.sg.next_id(), url=session.current_url, dom_digest=doc.digest(),
            dom_size=doc.size(), tag_sequence=tuple(doc.tag_sequence()),
            parent=None if parent is None else parent.id, inbound_event=ev,
            event_seq=event_seq,
            pending_events=enumerate_events(session) + self._nav_events(session),
            discovered_scripts=tuple(session.page.scripts), entry_url=entry,
            page_events=page_events,
        )

    def _state_has_targets(self, state: CrawlState) -> bool:
        return self._url_has_targets(state.url)

    # prioritization

    def event_distance(self, ev: EventDescriptor, dist: dict) -> float:
        if ev.event_type == NAVIGATE:
            return 0 if self._url_has_targets(ev.handler_fn) else INF
        return dist.get(ev.handler_fn, INF)

    def selection_kind(self, n: int) -> str:
        """Strategy used for the ``n``-th event selection (1-based)."""
        kind = self.cfg.kind
        if kind == HYBRID:
            kind = RANDOM if n % self.cfg.hybrid_random_period == 0 else GUIDED
        if kind == GUIDED and self.degraded_random:
            kind = RANDOM
        return kind

    def prioritize(self, state: CrawlState) -> Optional[EventDescriptor]:
        if not state.pending_events:
            return None
        self.selections += 1
        kind = self.selection_kind(self.selections)
        if kind == RANDOM:
            return self.rng.choice(state.pending_events)
        dist = distances_to_targets(self.acg, self.targets)
        return min(state.pending_events, key=lambda e: self.event_distance(e, dist))

    def _restore_target(self) -> Optional[CrawlState]:
        candidates = [s for s in self.sg.states.values()
                      if s.pending_events and not s.stale and s.id != self.current]
        if not candidates:
            return None
        if self.cfg.kind == RANDOM or self.degraded_random:
            return self.rng.choice(candidates)
        dist = distances_to_targets(self.acg, self.targets)

        def key(s: CrawlState):
            best = min(self.event_distance(e, dist) for e in s.pending_events)
            return (best, -s.id)

        return min(candidates, key=key)

    # restoration

    def _matches(self, target: CrawlState) -> bool:
        session = self.session
        return (session.document.digest() == target.dom_digest
                and Url.parse(session.current_url).path == target.path)

    def _replay(self, events, from_root: bool) -> bool:
        if from_root:
            self._load(self.bundle.seed_url)
        for ev in events:
            if not self._budget_left():
                return False
            try:
                self._step(ev)
            except StaleEvent:
                return False
        return True

    def restore(self, target_id: int) -> bool:
        """Bring the browser to ``target_id``; marks the state stale when that fails."""
        target = self.sg.states[target_id]
        self.restores += 1
        # (1) the event that produced the target may be enabled right here
        ev = target.inbound_event
        if ev is not None and self.session is not None:
            live = {e.key for e in enumerate_events(self.session) + self._nav_events(self.session)}
            if ev.key in live:
                if self._replay([ev], from_root=False) and self._matches(target):
                    self.current = target_id
                    return True
                if self.budget_exhausted:
                    return False
        # (2) shortest stored path, from the current state when it leads there, else from the root
        attempts = []
        path = self.sg.shortest_path(self.current, target_id) if self.session is not None else None
        if path is not None:
            attempts.append((path, False))
        root_path = self.sg.shortest_path(0, target_id)
        if root_path is not None:
            attempts.append((root_path, True))
        attempts.append((list(target.event_seq), True))
        for events, from_root in attempts:
            if self._replay(events, from_root) and self._matches(target):
                self.current = target_id
                return True
            if self.budget_exhausted:
                return False
        err = RestoreFailed(target_id, "replay diverged")
        self.restore_failures += 1
        self.warn(f"RestoreFailed: {err}")
        target.stale = True
        target.pending_events = []
        return False

    # analysis

    def _analysis_run(self, state: CrawlState, url: str, snapshot: Storage,
                      overrides: Optional[dict] = None, strict: bool = False):
        try:
            session, _ = load_page(self.bundle, url, self.cfg.seed, snapshot.snapshot(),
                                   overrides=overrides)
        except NavigationError as exc:
            if strict:
                raise RerunFailed(str(exc)) from None
            return None
        except GslRuntimeError as err:
            session = err.session
        for ev in state.page_events:
            try:
                self._fire(session, ev)
            except StaleEvent as exc:
                if strict:
                    raise RerunFailed(str(exc)) from None
                break
        return session.trace

    def analyze_state(self, state: CrawlState):
        state.analyzed = True
        snapshot = self.storage.snapshot()

        def run(url: str):
            trace = self._analysis_run(state, url, snapshot)
            if trace is None:
                return None
            return Execution(list(trace), url, state.id, state.event_seq, context=url)

        def rerun(execution: Execution, overrides: dict) -> list:
            return list(self._analysis_run(state, execution.context, snapshot, overrides, strict=True))

        payload = self.bundle.config.payloads[0]
        result = analyze(state.entry_url, run, self.params, payload, state.id,
                         budget=self.input_budget)
        self.generated.extend(result.generated)
        self.input_truncated |= result.truncated
        for w in result.warnings:
            self.warn(w)
        for execution in result.executions:
            self._observe(execution.trace)
        if self.analysis.kind == DOM_XSS:
            for verdict in run_pipeline(result.executions, rerun, self.params, self.sink_kinds):
                key = (verdict.pair.source.loc, verdict.pair.sink.loc)
                prior = self.verdicts.get(key)
                if prior is None or (verdict.is_flow and not prior.is_flow):
                    self.verdicts[key] = verdict
        self._record_coverage()

    def _enter_new_state(self, state: CrawlState):
        self.sg.add_state(state)
        self.current = state.id
        if self._state_has_targets(state):
            self.analyze_state(state)

    # main loop

    def run(self) -> CrawlResult:
        self._load(self.bundle.seed_url)
        self._record_coverage()
        linked = seed_from_links(self.bundle, self.analysis.target_apis)
        if (not self.targets and not any(self._url_has_targets(u) for u in linked)
                and self.cfg.kind != RANDOM):
            self.degraded_random = True
            self.warn("no target locations found statically; crawling with the random strategy")
        self._enter_new_state(self._snapshot(None, None))

        while True:
            state = self.sg.states[self.current]
            if not state.pending_events:
                target = self._restore_target()
                if target is None:
                    break
                if not self._budget_left():
                    break
                self.restore(target.id)
                if self.budget_exhausted:
                    break
                continue
            if not self._budget_left():
                break
            ev = self.prioritize(state)
            state.pending_events.remove(ev)
            try:
                self._step(ev)
            except StaleEvent as exc:
                self.warn(f"stale event dropped: {exc}")
                continue
            candidate = self._snapshot(state, ev)
            match = is_visited(self.sg, candidate, self.cfg)
            if match is not None:
                self.sg.add_edge(state.id, ev, match)
                self.current = match
            else:
                self._enter_new_state(candidate)
                self.sg.add_edge(state.id, ev, candidate.id)

        if self.budget_exhausted:
            self.warn("BudgetExhausted: event budget reached before the crawl converged")
        return CrawlResult(
            self.bundle, self.analysis, self.cfg, self.params, self.sg, self.acg,
            sorted(self.verdicts.values(), key=FlowVerdict.sort_key), dict(self.endpoints),
            list(self.coverage), list(self.generated), list(self.warnings),
            self.budget_exhausted, self.dispatched, self.restores, self.restore_failures,
            self.input_truncated, dict(self.sinks_reached),
        )


def crawl(bundle: AppBundle, analysis: TargetAnalysis, cfg: StrategyConfig,
          params: Optional[TaintParams] = None, trace_sink: Optional[IO[str]] = None) -> CrawlResult:
    return Crawler(bundle, analysis, cfg, params, trace_sink).run()
