"""Target analyses the crawler can be guided by."""

from __future__ import annotations

from dataclasses import dataclass

from .gsl.bundle import SourceSinkSpec

DOM_XSS = "DomXss"
AJAX_DISCOVERY = "AjaxDiscovery"

DOM_SINK_APIS = ("document.write", "innerHTML")
NETWORK_SINK_APIS = ("fetch",)

CLI_NAMES = {"xss": DOM_XSS, "ajax": AJAX_DISCOVERY}


@dataclass(frozen=True)
class TargetAnalysis:
    kind: str = DOM_XSS

    def __post_init__(self):
        if self.kind not in (DOM_XSS, AJAX_DISCOVERY):
            raise ValueError(f"unknown analysis {self.kind!r}")

    @classmethod
    def from_cli(cls, name: str) -> "TargetAnalysis":
        return cls(CLI_NAMES[name])

    @property
    def target_apis(self) -> tuple[str, ...]:
        """Host APIs whose call sites are the crawl's target locations."""
        return DOM_SINK_APIS if self.kind == DOM_XSS else NETWORK_SINK_APIS

    def sink_kinds(self, apis: SourceSinkSpec) -> tuple[str, ...]:
        kinds = (apis.sink_kind(api) for api in self.target_apis)
        return tuple(k for k in kinds if k is not None)
