"""Recursive-descent parser for GSL scripts."""

from __future__ import annotations

from .ast import DEFAULT_LOOP_BOUND, Node, SourceLoc, function_id
from .lexer import ParseError, Token, tokenize

COMPARISONS = {"==": "==", "!=": "!=", "===": "==", "!==": "!=",
               "<": "<", ">": ">", "<=": "<=", ">=": ">="}


class _Parser:
    def __init__(self, tokens: list[Token], script_id: str):
        self.tokens = tokens
        self.pos = 0
        self.script_id = script_id

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "keyword") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r} but found {self._describe(self.tok)}", self.tok.loc)
        t = self.tok
        self.pos += 1
        return t

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            raise ParseError(f"expected identifier but found {self._describe(t)}", t.loc)
        self.pos += 1
        return t

    @staticmethod
    def _describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    # statements

    def program(self) -> Node:
        root = Node("Block", SourceLoc(self.script_id, 1, 1))
        while self.tok.kind != "eof":
            root.children.append(self.statement())
        return root

    def block(self) -> Node:
        start = self.expect("{")
        node = Node("Block", start.loc)
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError("expected '}' but found end of input", self.tok.loc)
            node.children.append(self.statement())
        self.expect("}")
        return node

    def statement(self) -> Node:
        t = self.tok
        if self.at("{"):
            return self.block()
        if self.accept("var"):
            name = self.expect_ident()
            children = []
            if self.accept("="):
                init = self.expression()
                _hint(init, name.text)
                children.append(init)
            self.expect(";")
            return Node("VarDecl", t.loc, children, value=name.text)
        if self.at("function") and self.peek().kind == "ident":
            self.pos += 1
            name = self.expect_ident()
            params, body = self.function_rest()
            return Node("FunctionDecl", t.loc, [body], value=name.text, params=params,
                        fn_id=function_id(name.text, t.loc))
        if self.accept("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            children = [cond, self.statement()]
            if self.accept("else"):
                children.append(self.statement())
            return Node("If", t.loc, children)
        if self.accept("while"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            bound = DEFAULT_LOOP_BOUND
            if self.accept("@"):
                word = self.expect_ident()
                if word.text != "bound":
                    raise ParseError(f"expected 'bound' but found {word.text!r}", word.loc)
                self.expect("(")
                num = self.tok
                if num.kind != "num" or not isinstance(num.value, int) or num.value < 1:
                    raise ParseError("expected positive integer loop bound", num.loc)
                self.pos += 1
                bound = num.value
                self.expect(")")
            body = self.statement()
            return Node("While", t.loc, [cond, body], bound=bound)
        if self.accept("return"):
            children = [] if self.at(";") else [self.expression()]
            self.expect(";")
            return Node("Return", t.loc, children)
        expr = self.expression()
        self.expect(";")
        return expr

    def function_rest(self) -> tuple[tuple, Node]:
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.expect_ident().text)
            while self.accept(","):
                params.append(self.expect_ident().text)
        self.expect(")")
        return tuple(params), self.block()

    # expressions

    def expression(self) -> Node:
        start = self.tok.loc
        left = self.comparison()
        if self.at("="):
            eq = self.tok
            if left.kind not in ("Ident", "Member", "Index"):
                raise ParseError("invalid assignment target", eq.loc)
            self.pos += 1
            value = self.expression()
            if left.kind == "Ident":
                _hint(value, left.value)
            elif left.kind == "Member":
                _hint(value, left.value)
            return Node("Assign", start, [left, value])
        return left

    def comparison(self) -> Node:
        left = self.additive()
        while self.tok.kind == "punct" and self.tok.text in COMPARISONS:
            op = COMPARISONS[self.tok.text]
            self.pos += 1
            right = self.additive()
            left = Node("BinOp", left.loc, [left, right], value=op)
        return left

    def additive(self) -> Node:
        left = self.unary()
        while True:
            if self.at("+"):
                self.pos += 1
                right = self.unary()
                left = Node("BinOp", left.loc, [left, right], value="+")
            elif self.at("-"):
                raise ParseError("binary '-' is not part of GSL", self.tok.loc)
            else:
                return left

    def unary(self) -> Node:
        if self.at("-"):
            t = self.tok
            self.pos += 1
            num = self.tok
            if num.kind != "num":
                raise ParseError("expected number after unary '-'", num.loc)
            self.pos += 1
            return Node("NumLit", t.loc, value=-num.value)
        return self.postfix()

    def postfix(self) -> Node:
        node = self.primary()
        while True:
            if self.at("."):
                self.pos += 1
                prop = self.expect_ident()
                if self.at("("):
                    args = self.arguments()
                    if prop.text == "addEventListener":
                        if len(args) != 2:
                            raise ParseError("addEventListener takes (type, handler)", prop.loc)
                        node = Node("EventRegister", prop.loc, [node, *args], value=prop.text)
                    else:
                        node = Node("MethodCall", prop.loc, [node, *args], value=prop.text)
                else:
                    node = Node("Member", prop.loc, [node], value=prop.text)
            elif self.at("["):
                t = self.tok
                self.pos += 1
                key = self.expression()
                self.expect("]")
                node = Node("Index", t.loc, [node, key])
            elif self.at("("):
                t = self.tok
                args = self.arguments()
                node = Node("Call", t.loc, [node, *args])
            else:
                return node

    def arguments(self) -> list[Node]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expression())
            while self.accept(","):
                args.append(self.expression())
        self.expect(")")
        return args

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return Node("NumLit", t.loc, value=t.value)
        if t.kind == "str":
            self.pos += 1
            return Node("StrLit", t.loc, value=t.value)
        if t.kind == "ident":
            self.pos += 1
            return Node("Ident", t.loc, value=t.text)
        if self.accept("true"):
            return Node("BoolLit", t.loc, value=True)
        if self.accept("false"):
            return Node("BoolLit", t.loc, value=False)
        if self.accept("("):
            inner = self.expression()
            self.expect(")")
            return inner
        if self.accept("function"):
            name = None
            if self.tok.kind == "ident":
                name = self.expect_ident().text
            params, body = self.function_rest()
            return Node("FunctionExpr", t.loc, [body], value=name, params=params,
                        fn_id=function_id(name, t.loc))
        if self.accept("{"):
            keys, values = [], []
            if not self.at("}"):
                while True:
                    key = self.tok
                    if key.kind not in ("ident", "str"):
                        raise ParseError(f"expected property name but found {self._describe(key)}", key.loc)
                    self.pos += 1
                    self.expect(":")
                    value = self.expression()
                    _hint(value, key.value)
                    keys.append(key.value)
                    values.append(value)
                    if not self.accept(","):
                        break
            self.expect("}")
            return Node("ObjectLit", t.loc, values, value=tuple(keys))
        raise ParseError(f"expected expression but found {self._describe(t)}", t.loc)


def _hint(node: Node, name: str):
    # anonymous function expressions take the name they are bound to
    if node.kind == "FunctionExpr" and node.value is None:
        node.fn_id = function_id(name, node.loc)


def parse_script(text: str, script_id: str) -> Node:
    """Parse one GSL script into a ``Block`` root.

    Raises :class:`ParseError` at the first syntax violation.
    """
    parser = _Parser(tokenize(text, script_id), script_id)
    return parser.program()
