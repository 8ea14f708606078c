"""Mutable DOM tree for the simulated browser."""

from __future__ import annotations

import hashlib
from html.parser import HTMLParser
from typing import Iterator, Optional

from ..gsl.bundle import DomNodeSpec

VOID_TAGS = frozenset({"area", "base", "br", "col", "embed", "hr", "img", "input",
                       "link", "meta", "source", "track", "wbr"})

# attributes that influence behaviour; everything else is ignored by the digest
SECURITY_ATTRS = ("href", "id")


class Element:
    __slots__ = ("tag", "attrs", "text", "children", "parent")

    def __init__(self, tag: str, attrs: Optional[dict] = None, text: Optional[str] = None):
        self.tag = tag
        self.attrs: dict[str, str] = dict(attrs or {})
        self.text = text
        self.children: list[Element] = []
        self.parent: Optional[Element] = None

    @classmethod
    def from_spec(cls, spec: DomNodeSpec) -> "Element":
        el = cls(spec.tag, spec.attrs, spec.text)
        for child in spec.children:
            el.append(cls.from_spec(child))
        return el

    def append(self, child: "Element"):
        child.parent = self
        self.children.append(child)

    def replace_children(self, children: list["Element"], text: Optional[str]):
        for old in self.children:
            old.parent = None
        self.children = []
        self.text = text
        for child in children:
            self.append(child)

    def iter(self) -> Iterator["Element"]:
        yield self
        for child in self.children:
            yield from child.iter()

    def path(self) -> tuple[int, ...]:
        steps = []
        node = self
        while node.parent is not None:
            steps.append(node.parent.children.index(node))
            node = node.parent
        return tuple(reversed(steps))

    def root(self) -> "Element":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def handler_attrs(self) -> list[tuple[str, str]]:
        return [(name[2:], value) for name, value in self.attrs.items()
                if name.startswith("on") and len(name) > 2]

    def serialize(self) -> str:
        attrs = "".join(f' {k}="{_escape(v)}"' for k, v in sorted(self.attrs.items()))
        if self.tag in VOID_TAGS and not self.children and not self.text:
            return f"<{self.tag}{attrs}>"
        return f"<{self.tag}{attrs}>{self.inner_html()}</{self.tag}>"

    def inner_html(self) -> str:
        return _escape(self.text or "") + "".join(c.serialize() for c in self.children)

    def __repr__(self) -> str:
        return f"<Element {self.tag} {self.attrs}>"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


class _FragmentBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.top = Element("#fragment")
        self.stack = [self.top]

    def handle_starttag(self, tag, attrs):
        el = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self.stack[-1].append(el)
        if tag not in VOID_TAGS:
            self.stack.append(el)

    def handle_startendtag(self, tag, attrs):
        el = Element(tag, {k: (v if v is not None else "") for k, v in attrs})
        self.stack[-1].append(el)

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return

    def handle_data(self, data):
        if data.strip():
            node = self.stack[-1]
            node.text = (node.text or "") + data.strip()


def parse_fragment(html: str) -> tuple[list[Element], Optional[str]]:
    """Parse an HTML fragment into (element children, leading text)."""
    builder = _FragmentBuilder()
    builder.feed(html)
    builder.close()
    top = builder.top
    children = list(top.children)
    for child in children:
        child.parent = None
    return children, top.text


class Document:
    def __init__(self, root: Element):
        self.root = root

    @classmethod
    def from_spec(cls, spec: DomNodeSpec) -> "Document":
        return cls(Element.from_spec(spec))

    def get_element_by_id(self, element_id: str) -> Optional[Element]:
        for el in self.root.iter():
            if el.attrs.get("id") == element_id:
                return el
        return None

    def resolve(self, path) -> Optional[Element]:
        node = self.root
        for idx in path:
            if idx < 0 or idx >= len(node.children):
                return None
            node = node.children[idx]
        return node

    def contains(self, el: Element) -> bool:
        return el.root() is self.root

    @property
    def body(self) -> Element:
        for el in self.root.iter():
            if el.tag == "body":
                return el
        return self.root

    def serialize(self) -> str:
        return self.root.serialize()

    def size(self) -> int:
        return sum(1 for _ in self.root.iter())

    def tag_sequence(self) -> list[str]:
        return [el.tag for el in self.root.iter()]

    def canonical(self) -> str:
        """Structure-only serialization: tags plus behaviour-relevant attributes, no text."""
        parts = []
        self._canon(self.root, parts)
        return "".join(parts)

    def _canon(self, el: Element, out: list):
        keep = sorted((k, v) for k, v in el.attrs.items() if k in SECURITY_ATTRS or k.startswith("on"))
        out.append("<" + el.tag + "".join(f" {k}={v!r}" for k, v in keep) + ">")
        for child in el.children:
            self._canon(child, out)
        out.append("</>")

    def digest(self) -> str:
        return hashlib.blake2b(self.canonical().encode("utf-8"), digest_size=8).hexdigest()
