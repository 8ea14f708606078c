"""Browser sessions: page loading, handler bookkeeping, event dispatch and form filling."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import IO, Optional

from ..gsl.ast import SourceLoc, registration_id
from ..gsl.bundle import AppBundle, SourceSinkSpec
from ..urls import Url
from . import trace as tr
from .dom import Document, Element
from .interp import GslRuntimeError, Interpreter
from .values import Closure, JsObject

STATIC_ATTR = "StaticAttr"
DYNAMIC_REGISTRATION = "DynamicRegistration"

NON_TEXT_INPUTS = ("submit", "button", "reset", "checkbox", "radio", "hidden")


class NavigationError(Exception):
    pass


class StaleEvent(Exception):
    pass


@dataclass
class Storage:
    """localStorage plus cookie jar; lives for one crawl run."""
    items: dict[str, str] = field(default_factory=dict)
    app_written: set = field(default_factory=set)
    cookie: str = ""
    cookie_app_written: bool = False

    def snapshot(self) -> "Storage":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class EventDescriptor:
    element_path: tuple
    event_type: str
    handler_fn: str
    discovery: str = STATIC_ATTR
    site: Optional[SourceLoc] = None

    @property
    def key(self) -> tuple:
        return (self.element_path, self.event_type, self.handler_fn)

    def to_json(self) -> dict:
        return {
            "element_path": list(self.element_path),
            "event_type": self.event_type,
            "handler_fn": self.handler_fn,
            "discovery": self.discovery,
        }


@dataclass
class _Registration:
    element: Element
    event_type: str
    closure: Closure
    loc: SourceLoc


class BrowserSession:
    def __init__(self, bundle: AppBundle, url: str, seed: int = 0,
                 storage: Optional[Storage] = None, trace: bool = True,
                 overrides: Optional[dict] = None, trace_sink: Optional[IO[str]] = None,
                 apis: Optional[SourceSinkSpec] = None):
        page = bundle.page_for(url)
        if page is None:
            raise NavigationError(f"no page for {url}")
        self.bundle = bundle
        self.page = page
        self.url = Url.parse(url)
        self.seed = seed
        self.rng = random.Random(seed)
        self.storage = storage if storage is not None else Storage()
        self.tracer = tr.Tracer(trace, trace_sink)
        self.overrides = dict(overrides or {})
        self.apis = apis or bundle.config.apis
        self.document = Document.from_spec(page.dom)
        self.registrations: list[_Registration] = []
        self.interp = Interpreter(self)

    @property
    def current_url(self) -> str:
        return self.url.raw

    @property
    def trace(self) -> list:
        return self.tracer.events

    @property
    def registered_handlers(self) -> list[tuple]:
        return [(r.element.path(), r.event_type, r.closure.fn_id) for r in self.registrations
                if self.document.contains(r.element)]

    def register_handler(self, el: Element, event_type: str, closure: Closure, loc: SourceLoc):
        self.registrations.append(_Registration(el, event_type, closure, loc))

    def run_scripts(self):
        for script_id in self.page.scripts:
            self.interp.run_script(self.bundle.asts[script_id], script_id)

    def attr_handler(self, value: str) -> Optional[Closure]:
        name = value.strip().rstrip(";").strip()
        if name.endswith("()"):
            name = name[:-2].strip()
        return self.interp.global_function(name) if name.isidentifier() else None


def load_page(bundle: AppBundle, url: str, seed: int = 0, storage: Optional[Storage] = None,
              trace: bool = True, overrides: Optional[dict] = None,
              trace_sink: Optional[IO[str]] = None, apis: Optional[SourceSinkSpec] = None):
    """Instantiate the page for ``url`` and run its scripts.

    Returns ``(session, events)``. A :class:`GslRuntimeError` raised by a
    script carries the partially initialised session as ``.session``.
    """
    session = BrowserSession(bundle, url, seed, storage, trace, overrides, trace_sink, apis)
    try:
        session.run_scripts()
    except GslRuntimeError as err:
        err.session = session
        raise
    return session, list(session.trace)


def enumerate_events(session: BrowserSession) -> list[EventDescriptor]:
    by_element: dict[int, list[_Registration]] = {}
    for reg in session.registrations:
        by_element.setdefault(id(reg.element), []).append(reg)
    out, seen = [], set()
    for el in session.document.root.iter():
        path = el.path()
        for event_type, value in el.handler_attrs():
            closure = session.attr_handler(value)
            if closure is None:
                continue
            ev = EventDescriptor(path, event_type, closure.fn_id, STATIC_ATTR)
            if ev.key not in seen:
                seen.add(ev.key)
                out.append(ev)
        for reg in by_element.get(id(el), []):
            if reg.element is not el:
                continue
            ev = EventDescriptor(path, reg.event_type, reg.closure.fn_id, DYNAMIC_REGISTRATION, reg.loc)
            if ev.key not in seen:
                seen.add(ev.key)
                out.append(ev)
    return out


def _find_handler(session: BrowserSession, el: Element, ev: EventDescriptor):
    for event_type, value in el.handler_attrs():
        if event_type == ev.event_type:
            closure = session.attr_handler(value)
            if closure is not None and closure.fn_id == ev.handler_fn:
                return closure, None
    for reg in session.registrations:
        if reg.element is el and reg.event_type == ev.event_type and reg.closure.fn_id == ev.handler_fn:
            return reg.closure, registration_id(reg.loc)
    return None, None


def dispatch_event(session: BrowserSession, ev: EventDescriptor) -> list:
    """Fire ``ev`` and return the events it appended to the session trace."""
    el = session.document.resolve(ev.element_path)
    if el is None:
        raise StaleEvent(f"no element at {list(ev.element_path)}")
    closure, caller = _find_handler(session, el, ev)
    if closure is None:
        raise StaleEvent(f"no {ev.event_type} handler {ev.handler_fn} at {list(ev.element_path)}")
    mark = session.tracer.mark()
    interp = session.interp
    if session.tracer.enabled:
        session.tracer.emit(tr.HandlerFired, ev.event_type, ev.element_path, closure.fn_id)
    event_obj = JsObject({"type": ev.event_type, "target": interp.element(el)})
    interp.invoke(closure, [event_obj], caller, ev.site)
    return session.tracer.since(mark)


def _is_text_input(el: Element) -> bool:
    if el.tag == "textarea":
        return True
    return el.tag == "input" and el.attrs.get("type", "text").lower() not in NON_TEXT_INPUTS


def is_submit_like(session: BrowserSession, ev: EventDescriptor) -> bool:
    if ev.event_type == "submit":
        return True
    if ev.event_type != "click":
        return False
    el = session.document.resolve(ev.element_path)
    if el is None:
        return False
    return el.tag == "button" or (el.tag == "input" and el.attrs.get("type", "").lower() == "submit")


def fill_forms(session: BrowserSession, payloads) -> list[EventDescriptor]:
    """Assign payloads round-robin to text inputs; return the submit-like events."""
    inputs = [el for el in session.document.root.iter() if _is_text_input(el)]
    if not inputs:
        return []
    if not payloads:
        raise ValueError("payloads must be non-empty when the page has inputs")
    for i, el in enumerate(inputs):
        el.attrs["value"] = payloads[i % len(payloads)]
    return [ev for ev in enumerate_events(session) if is_submit_like(session, ev)]
