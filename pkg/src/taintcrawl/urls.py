"""URL model: scheme://host/path?query#fragment with ordered query pairs."""

from __future__ import annotations

from dataclasses import dataclass
from urllib.parse import urljoin, urlsplit, urlunsplit


@dataclass(frozen=True)
class Url:
    scheme: str
    host: str
    path: str
    query: tuple[tuple[str, str], ...]
    fragment: str
    raw: str

    @classmethod
    def parse(cls, text: str) -> "Url":
        parts = urlsplit(text)
        return cls(parts.scheme, parts.netloc, parts.path or "/",
                   tuple(parse_query(parts.query)), parts.fragment, text)

    @property
    def query_string(self) -> str:
        return urlsplit(self.raw).query

    @property
    def hash(self) -> str:
        return f"#{self.fragment}" if self.fragment else ""

    @property
    def search(self) -> str:
        q = self.query_string
        return f"?{q}" if q else ""

    def origin(self) -> str:
        return f"{self.scheme}://{self.host}"


def parse_query(query: str) -> list[tuple[str, str]]:
    # raw strings, no percent-decoding: comparisons happen on raw text
    pairs = []
    for chunk in query.split("&") if query else []:
        key, _, value = chunk.partition("=")
        pairs.append((key, value))
    return pairs


def resolve(base: str, href: str) -> str:
    return urljoin(base, href)


def strip_fragment(url: str) -> str:
    parts = urlsplit(url)
    return urlunsplit((parts.scheme, parts.netloc, parts.path, parts.query, ""))


def is_absolute(href: str) -> bool:
    return bool(urlsplit(href).scheme)
