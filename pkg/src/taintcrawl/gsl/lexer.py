from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import SourceLoc


class ParseError(Exception):
    def __init__(self, message: str, loc: SourceLoc):
        super().__init__(f"{loc}: {message}")
        self.message = message
        self.loc = loc


KEYWORDS = {"var", "function", "if", "else", "while", "return", "true", "false"}

# longest operators first
PUNCT = ["===", "!==", "==", "!=", "<=", ">=", "(", ")", "{", "}", "[", "]",
         ";", ",", ".", "=", "<", ">", "+", "-", "@", ":"]

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0"}

_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, num, str, punct, eof
    text: str
    value: object
    loc: SourceLoc


def tokenize(text: str, script_id: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(count: int):
        nonlocal i, line, col
        for ch in text[i:i + count]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += count

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", i):
            end = text.find("\n", i)
            advance((n if end < 0 else end) - i)
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseError("unterminated comment", SourceLoc(script_id, line, col))
            advance(end + 2 - i)
            continue

        loc = SourceLoc(script_id, line, col)
        if ch in "\"'":
            j = i + 1
            chars = []
            while True:
                if j >= n or text[j] == "\n":
                    raise ParseError("unterminated string literal", loc)
                c = text[j]
                if c == ch:
                    break
                if c == "\\":
                    if j + 1 >= n:
                        raise ParseError("unterminated string literal", loc)
                    chars.append(_ESCAPES.get(text[j + 1], text[j + 1]))
                    j += 2
                    continue
                chars.append(c)
                j += 1
            raw = text[i:j + 1]
            tokens.append(Token("str", raw, "".join(chars), loc))
            advance(j + 1 - i)
            continue

        m = _NUMBER.match(text, i)
        if m:
            raw = m.group(0)
            value = float(raw) if "." in raw else int(raw)
            tokens.append(Token("num", raw, value, loc))
            advance(len(raw))
            continue

        m = _IDENT.match(text, i)
        if m:
            word = m.group(0)
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word, word, loc))
            advance(len(word))
            continue

        for p in PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, p, loc))
                advance(len(p))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", loc)

    tokens.append(Token("eof", "", None, SourceLoc(script_id, line, col)))
    return tokens
