from .ast import Node, SourceLoc
from .bundle import (AnalysisConfig, AppBundle, BundleError, DomNodeSpec, PageSpec,
                     SourceSinkSpec, bundle_from_manifest, extract_static_links, load_bundle)
from .lexer import ParseError
from .parser import parse_script
from .printer import pretty

__all__ = [
    "AnalysisConfig", "AppBundle", "BundleError", "DomNodeSpec", "Node", "PageSpec",
    "ParseError", "SourceLoc", "SourceSinkSpec", "bundle_from_manifest",
    "extract_static_links", "load_bundle", "parse_script", "pretty",
]
