"""Application bundles: manifest loading, validation and static link extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from ..urls import Url, resolve
from .ast import Node
from .lexer import ParseError
from .parser import parse_script

DEFAULT_SOURCES = (
    ("location.href", "location.href"),
    ("location.hash", "location.hash"),
    ("location.search", "location.search"),
    ("document.cookie", "document.cookie"),
    ("localStorage.getItem", "localStorage.getItem"),
    ("input.value", "input.value"),
)
DEFAULT_SINKS = (
    ("document.write", "document.write"),
    ("innerHTML", "innerHTML"),
    ("fetch", "fetch"),
)


class BundleError(Exception):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class DomNodeSpec:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    text: Optional[str] = None
    children: list["DomNodeSpec"] = field(default_factory=list)

    @classmethod
    def from_json(cls, data: dict) -> "DomNodeSpec":
        return cls(data["tag"], dict(data.get("attrs", {})), data.get("text"),
                   [cls.from_json(c) for c in data.get("children", [])])

    def iter(self):
        yield self
        for child in self.children:
            yield from child.iter()


@dataclass(frozen=True)
class SourceSinkSpec:
    sources: tuple[tuple[str, str], ...] = DEFAULT_SOURCES
    sinks: tuple[tuple[str, str], ...] = DEFAULT_SINKS

    def __post_init__(self):
        if not self.sources or not self.sinks:
            raise ValueError("source/sink lists must be non-empty")
        known = {api for api, _ in DEFAULT_SOURCES + DEFAULT_SINKS}
        for api, _ in self.sources + self.sinks:
            if api not in known:
                raise ValueError(f"unknown host API {api!r}")

    def source_kind(self, api: str) -> Optional[str]:
        for name, kind in self.sources:
            if name == api:
                return kind
        return None

    def sink_kind(self, api: str) -> Optional[str]:
        for name, kind in self.sinks:
            if name == api:
                return kind
        return None


@dataclass
class AnalysisConfig:
    payloads: tuple[str, ...] = ("payload",)
    apis: SourceSinkSpec = field(default_factory=SourceSinkSpec)
    external_links: tuple[str, ...] = ()


@dataclass
class PageSpec:
    path: str
    dom: DomNodeSpec
    scripts: list[str] = field(default_factory=list)


@dataclass
class AppBundle:
    name: str
    seed_url: str
    pages: list[PageSpec]
    config: AnalysisConfig
    sources: dict[str, str]
    asts: dict[str, Node]

    def page_for(self, url: str) -> Optional[PageSpec]:
        path = Url.parse(url).path
        for page in self.pages:
            if page.path == path:
                return page
        return None

    def page_url(self, page: PageSpec) -> str:
        return Url.parse(self.seed_url).origin() + page.path

    def scripts_of(self, page: PageSpec) -> list[Node]:
        return [self.asts[s] for s in page.scripts]


def _schema() -> dict:
    return json.loads(resources.files("taintcrawl.schemas").joinpath("manifest.schema.json").read_text())


@lru_cache(maxsize=1)
def _validator() -> jsonschema.protocols.Validator:
    schema = _schema()
    cls = jsonschema.validators.validator_for(schema)
    return cls(schema)


def bundle_from_manifest(manifest: dict, scripts: dict[str, str]) -> AppBundle:
    """Build and validate a bundle from a parsed manifest and script texts."""
    problems = [f"manifest: {e.message}" for e in _validator().iter_errors(manifest)]
    if problems:
        raise BundleError(problems)

    pages = [PageSpec(p["path"], DomNodeSpec.from_json(p["dom"]), list(p.get("scripts", [])))
             for p in manifest["pages"]]
    raw_cfg = manifest.get("config", {})
    apis = SourceSinkSpec(
        tuple(tuple(x) for x in raw_cfg.get("sources", DEFAULT_SOURCES)),
        tuple(tuple(x) for x in raw_cfg.get("sinks", DEFAULT_SINKS)),
    )
    config = AnalysisConfig(tuple(raw_cfg.get("payloads", ("payload",))), apis,
                            tuple(raw_cfg.get("external_links", ())))
    seed_url = manifest["seed_url"]

    asts: dict[str, Node] = {}
    for page in pages:
        for script_id in page.scripts:
            if script_id in asts:
                continue
            if script_id not in scripts:
                problems.append(f"missing script file {script_id!r} (page {page.path})")
                continue
            try:
                asts[script_id] = parse_script(scripts[script_id], script_id)
            except ParseError as exc:
                problems.append(f"parse error in {exc}")

    paths = [p.path for p in pages]
    for dup in sorted({p for p in paths if paths.count(p) > 1}):
        problems.append(f"duplicate page path {dup!r}")
    seed_path = Url.parse(seed_url).path
    if paths.count(seed_path) != 1:
        problems.append(f"seed url path {seed_path!r} does not match exactly one page")

    origin = Url.parse(seed_url).origin()
    for page in pages:
        ids = [n.attrs["id"] for n in page.dom.iter() if "id" in n.attrs]
        for dup in sorted({i for i in ids if ids.count(i) > 1}):
            problems.append(f"page {page.path}: duplicate element id {dup!r}")
        base = origin + page.path
        for href in extract_static_links(page):
            target = resolve(base, href)
            parsed = Url.parse(target)
            if parsed.origin() != origin or href in config.external_links:
                continue
            if parsed.path not in paths:
                problems.append(f"page {page.path}: unresolved link {href!r}")

    if problems:
        raise BundleError(problems)
    return AppBundle(manifest.get("name", ""), seed_url, pages, config, dict(scripts), asts)


def load_bundle(root_path) -> AppBundle:
    """Load an application bundle directory containing ``manifest.json``."""
    root = Path(root_path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError(["missing manifest"])
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BundleError([f"manifest is not valid JSON: {exc}"]) from None
    if not isinstance(manifest, dict):
        raise BundleError(["manifest must be a JSON object"])
    manifest.setdefault("name", root.name)

    scripts = {}
    for page in manifest.get("pages", []) if isinstance(manifest.get("pages"), list) else []:
        for script_id in page.get("scripts", []) if isinstance(page, dict) else []:
            path = root / script_id
            if isinstance(script_id, str) and path.is_file():
                scripts[script_id] = path.read_text(encoding="utf-8")
    return bundle_from_manifest(manifest, scripts)


ANCHOR_TAGS = ("a", "area")


def extract_static_links(page: PageSpec) -> list[str]:
    """Return href targets of anchor-like elements, deduplicated, in document order."""
    seen: dict[str, None] = {}
    for node in page.dom.iter():
        href = node.attrs.get("href")
        if node.tag in ANCHOR_TAGS and href and not href.startswith("#") and "javascript:" not in href:
            seen.setdefault(href, None)
    return list(seen)


__all__ = [
    "AnalysisConfig", "AppBundle", "BundleError", "DomNodeSpec", "PageSpec",
    "SourceSinkSpec", "bundle_from_manifest", "extract_static_links", "load_bundle",
]
