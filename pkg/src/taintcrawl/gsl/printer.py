from __future__ import annotations

from .ast import DEFAULT_LOOP_BOUND, Node

def pretty(node: Node, indent: str = "  ") -> str:
    """Render an AST back to GSL source text."""
    lines: list[str] = []
    if node.kind != "Block":
        raise ValueError("pretty() expects a script root Block")
    for stmt in node.children:
        _stmt(stmt, 0, lines, indent)
    return "\n".join(lines) + "\n"


def _stmt(node: Node, depth: int, out: list, indent: str):
    pad = indent * depth
    k = node.kind
    if k == "Block":
        out.append(pad + "{")
        for s in node.children:
            _stmt(s, depth + 1, out, indent)
        out.append(pad + "}")
    elif k == "VarDecl":
        init = f" = {_expr(node.children[0])}" if node.children else ""
        out.append(f"{pad}var {node.value}{init};")
    elif k == "FunctionDecl":
        out.append(f"{pad}function {node.value}({', '.join(node.params)}) {{")
        for s in node.children[0].children:
            _stmt(s, depth + 1, out, indent)
        out.append(pad + "}")
    elif k == "If":
        out.append(f"{pad}if ({_expr(node.children[0])})")
        _body(node.children[1], depth, out, indent)
        if len(node.children) > 2:
            out.append(pad + "else")
            _body(node.children[2], depth, out, indent)
    elif k == "While":
        bound = "" if node.bound == DEFAULT_LOOP_BOUND else f" @bound({node.bound})"
        out.append(f"{pad}while ({_expr(node.children[0])}){bound}")
        _body(node.children[1], depth, out, indent)
    elif k == "Return":
        tail = f" {_expr(node.children[0])}" if node.children else ""
        out.append(f"{pad}return{tail};")
    else:
        out.append(f"{pad}{_expr(node, depth, indent)};")


def _body(node: Node, depth: int, out: list, indent: str):
    _stmt(node, depth if node.kind == "Block" else depth + 1, out, indent)


def _level(node: Node) -> int:
    if node.kind == "Assign":
        return 0
    if node.kind == "BinOp":
        return 2 if node.value == "+" else 1
    return 3


def _wrap(node: Node, minimum: int, depth: int, indent: str) -> str:
    text = _expr(node, depth, indent)
    return f"({text})" if _level(node) < minimum else text


_QUOTE = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r", "\0": "\\0"}


def quote(text: str) -> str:
    return '"' + "".join(_QUOTE.get(ch, ch) for ch in text) + '"'


def _num(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return f"{value:.1f}"
    return repr(value)


def _expr(node: Node, depth: int = 0, indent: str = "  ") -> str:
    k = node.kind
    c = node.children
    if k == "StrLit":
        return quote(node.value)
    if k == "NumLit":
        return _num(node.value)
    if k == "BoolLit":
        return "true" if node.value else "false"
    if k == "Ident":
        return node.value
    if k == "Assign":
        return f"{_wrap(c[0], 3, depth, indent)} = {_wrap(c[1], 0, depth, indent)}"
    if k == "BinOp":
        level = _level(node)
        # left-associative: the right operand needs a strictly higher level
        return f"{_wrap(c[0], level, depth, indent)} {node.value} {_wrap(c[1], level + 1, depth, indent)}"
    if k == "Member":
        return f"{_wrap(c[0], 3, depth, indent)}.{node.value}"
    if k == "Index":
        return f"{_wrap(c[0], 3, depth, indent)}[{_expr(c[1], depth, indent)}]"
    if k == "Call":
        args = ", ".join(_expr(a, depth, indent) for a in c[1:])
        return f"{_wrap(c[0], 3, depth, indent)}({args})"
    if k in ("MethodCall", "EventRegister"):
        args = ", ".join(_expr(a, depth, indent) for a in c[1:])
        return f"{_wrap(c[0], 3, depth, indent)}.{node.value}({args})"
    if k == "FunctionExpr":
        name = f" {node.value}" if node.value else ""
        inner: list[str] = []
        for s in c[0].children:
            _stmt(s, depth + 1, inner, indent)
        body = "\n".join(inner)
        closing = indent * depth + "}"
        head = f"(function{name}({', '.join(node.params)}) {{"
        return f"{head}\n{body}\n{closing})" if inner else f"{head}\n{closing})"
    if k == "ObjectLit":
        items = ", ".join(f"{quote(key)}: {_expr(v, depth, indent)}"
                          for key, v in zip(node.value, c))
        return "{" + items + "}"
    raise ValueError(f"cannot print {k} as an expression")
