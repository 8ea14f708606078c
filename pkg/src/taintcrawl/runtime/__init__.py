from .dom import Document, Element
from .interp import GslRuntimeError
from .session import (DYNAMIC_REGISTRATION, STATIC_ATTR, BrowserSession, EventDescriptor,
                      NavigationError, StaleEvent, Storage, dispatch_event, enumerate_events,
                      fill_forms, load_page)
from .trace import Tracer, event_to_json, write_jsonl

__all__ = [
    "DYNAMIC_REGISTRATION", "STATIC_ATTR", "BrowserSession", "Document", "Element",
    "EventDescriptor", "GslRuntimeError", "NavigationError", "StaleEvent", "Storage",
    "Tracer", "dispatch_event", "enumerate_events", "event_to_json", "fill_forms",
    "load_page", "write_jsonl",
]
