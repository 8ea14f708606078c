"""Syntactic recognition of host-API sink sites, shared by the interpreter and the call graph."""

from __future__ import annotations

from typing import Optional

from .ast import Node

DOCUMENT_NAMES = ("document",)


def _is_document(node: Node) -> bool:
    if node.kind == "Ident":
        return node.value in DOCUMENT_NAMES
    if node.kind == "Member" and node.value == "document":
        obj = node.children[0]
        return obj.kind == "Ident" and obj.value == "window"
    return False


def sink_site_api(node: Node) -> Optional[str]:
    """Return the sink API a node writes to (``document.write``, ``innerHTML``, ``fetch``)."""
    if node.kind == "MethodCall" and node.value == "write" and _is_document(node.children[0]):
        return "document.write"
    if node.kind == "Assign":
        target = node.children[0]
        if target.kind == "Member" and target.value == "innerHTML":
            return "innerHTML"
    if node.kind == "Call":
        callee = node.children[0]
        if callee.kind == "Ident" and callee.value == "fetch":
            return "fetch"
    if node.kind == "MethodCall" and node.value == "fetch":
        obj = node.children[0]
        if obj.kind == "Ident" and obj.value == "window":
            return "fetch"
    return None
