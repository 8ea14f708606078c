"""Tree-walking GSL interpreter with host-API instrumentation.

All observation happens at host boundaries (sources, sinks, string methods,
branches and calls); values are never wrapped, so a run with tracing disabled
executes exactly the same steps.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Optional

from ..gsl.ast import Node, SourceLoc, main_id
from . import trace as tr
from .dom import Element, parse_fragment
from .strings import STRING_METHODS, apply_string_op
from .values import (NULL, UNDEFINED, Closure, HostFunction, JsObject, is_number,
                     loose_equals, to_int, to_plain, to_str, truthy)

if TYPE_CHECKING:
    from .session import BrowserSession

MAX_CALL_DEPTH = 200
INPUT_TAGS = ("input", "textarea", "select")


class GslRuntimeError(Exception):
    def __init__(self, message: str, loc: Optional[SourceLoc]):
        super().__init__(f"{loc}: {message}" if loc else message)
        self.message = message
        self.loc = loc


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: Optional["Env"] = None):
        self.vars: dict[str, Any] = {}
        self.parent = parent

    def lookup(self, name: str, loc) -> Any:
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        raise GslRuntimeError(f"{name} is not defined", loc)

    def find(self, name: str) -> Optional["Env"]:
        env = self
        while env is not None:
            if name in env.vars:
                return env
            env = env.parent
        return None

    def assign(self, name: str, value):
        env = self.find(name)
        if env is None:
            env = self
            while env.parent is not None:
                env = env.parent
        env.vars[name] = value


# host objects


class HostObject:
    name = "host"

    def __init__(self, interp: "Interpreter"):
        self.interp = interp

    def get(self, prop: str, loc):
        raise GslRuntimeError(f"{self.name}.{prop} is not supported", loc)

    def set(self, prop: str, value, loc):
        raise GslRuntimeError(f"cannot assign {self.name}.{prop}", loc)

    def call(self, method: str, args: list, loc):
        raise GslRuntimeError(f"{self.name}.{method} is not a function", loc)


class LocationHost(HostObject):
    name = "location"

    def get(self, prop, loc):
        url = self.interp.session.url
        if prop in ("href", "hash", "search"):
            value = {"href": url.raw, "hash": url.hash, "search": url.search}[prop]
            return self.interp.source(f"location.{prop}", value, loc)
        if prop == "pathname":
            return url.path
        if prop == "host":
            return url.host
        return super().get(prop, loc)

    def call(self, method, args, loc):
        if method == "toString":
            return self.get("href", loc)
        return super().call(method, args, loc)


class StorageHost(HostObject):
    name = "localStorage"

    def call(self, method, args, loc):
        store = self.interp.session.storage
        if method == "getItem":
            key = to_str(args[0]) if args else "undefined"
            value = store.items.get(key)
            if value is None:
                self.interp.source("localStorage.getItem", None, loc)
                return NULL
            return self.interp.source("localStorage.getItem", value, loc,
                                      app_seeded=key in store.app_written)
        if method == "setItem":
            key, value = to_str(args[0]), to_str(args[1] if len(args) > 1 else UNDEFINED)
            store.items[key] = value
            store.app_written.add(key)
            return UNDEFINED
        if method == "removeItem":
            store.items.pop(to_str(args[0]), None)
            return UNDEFINED
        return super().call(method, args, loc)


class DocumentHost(HostObject):
    name = "document"

    def get(self, prop, loc):
        store = self.interp.session.storage
        if prop == "cookie":
            return self.interp.source("document.cookie", store.cookie, loc,
                                      app_seeded=store.cookie_app_written)
        if prop == "location":
            return self.interp.location
        if prop == "body":
            return self.interp.element(self.interp.session.document.body)
        return super().get(prop, loc)

    def set(self, prop, value, loc):
        if prop == "cookie":
            store = self.interp.session.storage
            text = to_str(value)
            store.cookie = text if not store.cookie else f"{store.cookie}; {text}"
            store.cookie_app_written = True
            return
        super().set(prop, value, loc)

    def call(self, method, args, loc):
        session = self.interp.session
        if method == "write":
            text = "".join(to_str(a) for a in args)
            self.interp.sink("document.write", text, loc)
            children, lead = parse_fragment(text)
            body = session.document.body
            if lead:
                body.text = (body.text or "") + lead
            for child in children:
                body.append(child)
            return UNDEFINED
        if method == "getElementById":
            el = session.document.get_element_by_id(to_str(args[0]) if args else "")
            return NULL if el is None else self.interp.element(el)
        return super().call(method, args, loc)


class WindowHost(HostObject):
    name = "window"

    def get(self, prop, loc):
        if prop == "location":
            return self.interp.location
        if prop == "document":
            return self.interp.document
        if prop == "localStorage":
            return self.interp.storage
        if prop == "fetch":
            return self.interp.globals.vars["fetch"]
        return super().get(prop, loc)

    def call(self, method, args, loc):
        if method == "fetch":
            return self.interp._fetch(args, loc)
        return super().call(method, args, loc)


class ConsoleHost(HostObject):
    name = "console"

    def call(self, method, args, loc):
        if method == "log":
            return UNDEFINED
        return super().call(method, args, loc)


class ElementHost(HostObject):
    name = "element"

    def __init__(self, interp, el: Element):
        super().__init__(interp)
        self.el = el

    def get(self, prop, loc):
        el = self.el
        if prop == "innerHTML":
            return el.inner_html()
        if prop == "value":
            value = el.attrs.get("value", "")
            if el.tag in INPUT_TAGS:
                return self.interp.source("input.value", value, loc)
            return value
        if prop == "textContent":
            return el.text or ""
        if prop == "tagName":
            return el.tag.upper()
        if prop == "id":
            return el.attrs.get("id", "")
        if prop in el.attrs:
            return el.attrs[prop]
        return UNDEFINED

    def set(self, prop, value, loc):
        el = self.el
        if prop == "innerHTML":
            text = to_str(value)
            self.interp.sink("innerHTML", text, loc)
            children, lead = parse_fragment(text)
            el.replace_children(children, lead)
        elif prop == "textContent":
            el.replace_children([], to_str(value))
        else:
            el.attrs[prop.lower()] = to_str(value)


# interpreter


class Interpreter:
    def __init__(self, session: "BrowserSession"):
        self.session = session
        self.tracer = session.tracer
        self.overrides = session.overrides
        self.stack: list[str] = []
        self.globals = Env()
        self.location = LocationHost(self)
        self.document = DocumentHost(self)
        self.storage = StorageHost(self)
        self._elements: dict[int, ElementHost] = {}
        g = self.globals.vars
        g.update({
            "undefined": UNDEFINED, "null": NULL,
            "document": self.document, "location": self.location,
            "localStorage": self.storage, "window": WindowHost(self),
            "console": ConsoleHost(self),
            "fetch": HostFunction("fetch", self._fetch),
        })

    # instrumentation hooks

    def source(self, api: str, value: Optional[str], loc, app_seeded: bool = False):
        kind = self.session.apis.source_kind(api)
        if kind is None:
            return value if value is not None else NULL
        if loc in self.overrides and value is not None:
            value = self.overrides[loc]
        if self.tracer.enabled:
            self.tracer.emit(tr.SourceRead, loc, kind, value, app_seeded)
        return value if value is not None else NULL

    def sink(self, api: str, value: str, loc):
        kind = self.session.apis.sink_kind(api)
        if kind is not None and self.tracer.enabled:
            self.tracer.emit(tr.SinkWrite, loc, kind, value)

    def element(self, el: Element) -> ElementHost:
        host = self._elements.get(id(el))
        if host is None or host.el is not el:
            host = ElementHost(self, el)
            self._elements[id(el)] = host
        return host

    def _fetch(self, args, loc):
        url = to_str(args[0]) if args else "undefined"
        self.sink("fetch", url, loc)
        if self.tracer.enabled:
            self.tracer.emit(tr.NetRequest, "GET", url, loc)
        return UNDEFINED

    # entry points

    def run_script(self, root: Node, script_id: str):
        fn = main_id(script_id)
        if self.tracer.enabled:
            self.tracer.emit(tr.Call, None, fn, None)
        self.stack.append(fn)
        try:
            self._hoist(root.children, self.globals)
            for stmt in root.children:
                self.exec(stmt, self.globals)
        except _Return:
            raise GslRuntimeError("return outside function", root.loc) from None
        finally:
            self.stack.pop()
        if self.tracer.enabled:
            self.tracer.emit(tr.Exit, fn)

    def invoke(self, fn, args: list, caller: Optional[str], site: Optional[SourceLoc]):
        if isinstance(fn, HostFunction):
            return fn.fn(args, site)
        if not isinstance(fn, Closure):
            raise GslRuntimeError(f"{to_str(fn)} is not a function", site)
        if len(self.stack) >= MAX_CALL_DEPTH:
            raise GslRuntimeError("maximum call depth exceeded", site)
        if self.tracer.enabled:
            self.tracer.emit(tr.Call, caller, fn.fn_id, site)
        env = Env(fn.env)
        for i, name in enumerate(fn.params):
            env.vars[name] = args[i] if i < len(args) else UNDEFINED
        body = fn.node.children[0].children
        self.stack.append(fn.fn_id)
        try:
            self._hoist(body, env)
            for stmt in body:
                self.exec(stmt, env)
            result = UNDEFINED
        except _Return as ret:
            result = ret.value
        finally:
            self.stack.pop()
        if self.tracer.enabled:
            self.tracer.emit(tr.Exit, fn.fn_id)
        return result

    def global_function(self, name: str) -> Optional[Closure]:
        value = self.globals.vars.get(name)
        return value if isinstance(value, Closure) else None

    # statements

    def _hoist(self, stmts, env: Env):
        for stmt in stmts:
            if stmt.kind == "FunctionDecl":
                env.vars[stmt.value] = Closure(stmt, env, stmt.fn_id)

    @property
    def current_fn(self) -> Optional[str]:
        return self.stack[-1] if self.stack else None

    def exec(self, node: Node, env: Env):
        k = node.kind
        if k == "Block":
            for stmt in node.children:
                self.exec(stmt, env)
        elif k == "VarDecl":
            env.vars[node.value] = self.eval(node.children[0], env) if node.children else UNDEFINED
        elif k == "FunctionDecl":
            env.vars[node.value] = Closure(node, env, node.fn_id)
        elif k == "If":
            if self._condition(node, env):
                self.exec(node.children[1], env)
            elif len(node.children) > 2:
                self.exec(node.children[2], env)
        elif k == "While":
            count = 0
            while self._condition(node, env):
                count += 1
                if count > node.bound:
                    raise GslRuntimeError(f"loop bound {node.bound} exceeded", node.loc)
                self.exec(node.children[1], env)
        elif k == "Return":
            raise _Return(self.eval(node.children[0], env) if node.children else UNDEFINED)
        else:
            self.eval(node, env)

    def _condition(self, node: Node, env: Env) -> bool:
        cond = node.children[0]
        if cond.kind == "BinOp" and cond.value != "+":
            left = self.eval(cond.children[0], env)
            right = self.eval(cond.children[1], env)
            outcome = self._compare(cond.value, left, right, cond.loc)
            if self.tracer.enabled:
                self.tracer.emit(tr.Branch, node.loc, to_plain(left), to_plain(right), cond.value, outcome)
            return outcome
        value = self.eval(cond, env)
        outcome = truthy(value)
        if self.tracer.enabled:
            self.tracer.emit(tr.Branch, node.loc, to_plain(value), None, "truthy", outcome)
        return outcome

    # expressions

    def eval(self, node: Node, env: Env):
        k = node.kind
        c = node.children
        if k == "StrLit" or k == "NumLit" or k == "BoolLit":
            return node.value
        if k == "Ident":
            return env.lookup(node.value, node.loc)
        if k == "FunctionExpr":
            fenv = env
            if node.value:
                fenv = Env(env)
                closure = Closure(node, fenv, node.fn_id)
                fenv.vars[node.value] = closure
                return closure
            return Closure(node, fenv, node.fn_id)
        if k == "ObjectLit":
            return JsObject({key: self.eval(v, env) for key, v in zip(node.value, c)})
        if k == "Assign":
            return self._assign(node, env)
        if k == "BinOp":
            left = self.eval(c[0], env)
            right = self.eval(c[1], env)
            if node.value == "+":
                return self._plus(left, right, node.loc)
            return self._compare(node.value, left, right, node.loc)
        if k == "Member":
            return self._get(self.eval(c[0], env), node.value, node.loc)
        if k == "Index":
            obj = self.eval(c[0], env)
            key = self.eval(c[1], env)
            if isinstance(obj, str) and is_number(key):
                i = to_int(key)
                return obj[i] if 0 <= i < len(obj) else UNDEFINED
            return self._get(obj, to_str(key), node.loc)
        if k == "Call":
            callee = self.eval(c[0], env)
            args = [self.eval(a, env) for a in c[1:]]
            return self.invoke(callee, args, self.current_fn, node.loc)
        if k == "MethodCall":
            return self._method(node, env)
        if k == "EventRegister":
            return self._register(node, env)
        raise GslRuntimeError(f"cannot evaluate {k}", node.loc)

    def _plus(self, left, right, loc):
        if is_number(left) and is_number(right):
            return left + right
        if isinstance(left, str) or isinstance(right, str):
            base, arg = to_str(left), to_str(right)
            result = base + arg
            if self.tracer.enabled:
                self.tracer.emit(tr.StringOp, "concat", base, (arg,), result, loc)
            return result
        raise GslRuntimeError(f"unsupported operands for +: {to_str(left)}, {to_str(right)}", loc)

    def _compare(self, op, left, right, loc) -> bool:
        if op == "==":
            return loose_equals(left, right)
        if op == "!=":
            return not loose_equals(left, right)
        if not ((is_number(left) and is_number(right)) or
                (isinstance(left, str) and isinstance(right, str))):
            raise GslRuntimeError(f"cannot compare {to_str(left)} {op} {to_str(right)}", loc)
        if op == "<":
            return left < right
        if op == ">":
            return left > right
        if op == "<=":
            return left <= right
        return left >= right

    def _get(self, obj, prop: str, loc):
        if isinstance(obj, str):
            if prop == "length":
                return len(obj)
            return UNDEFINED
        if isinstance(obj, JsObject):
            return obj.props.get(prop, UNDEFINED)
        if isinstance(obj, HostObject):
            return obj.get(prop, loc)
        if obj is UNDEFINED or obj is NULL:
            raise GslRuntimeError(f"cannot read property {prop!r} of {to_str(obj)}", loc)
        return UNDEFINED

    def _assign(self, node: Node, env: Env):
        target, value_node = node.children
        value = self.eval(value_node, env)
        if target.kind == "Ident":
            env.assign(target.value, value)
            return value
        obj = self.eval(target.children[0], env)
        if target.kind == "Member":
            prop = target.value
        else:
            prop = to_str(self.eval(target.children[1], env))
        if isinstance(obj, JsObject):
            obj.props[prop] = value
        elif isinstance(obj, HostObject):
            obj.set(prop, value, node.loc)
        else:
            raise GslRuntimeError(f"cannot set property {prop!r} of {to_str(obj)}", node.loc)
        return value

    def _method(self, node: Node, env: Env):
        c = node.children
        receiver = self.eval(c[0], env)
        args = [self.eval(a, env) for a in c[1:]]
        method = node.value
        if isinstance(receiver, str):
            return self._string_method(receiver, method, args, node.loc)
        if isinstance(receiver, JsObject):
            fn = receiver.props.get(method, UNDEFINED)
            return self.invoke(fn, args, self.current_fn, node.loc)
        if isinstance(receiver, HostObject):
            return receiver.call(method, args, node.loc)
        raise GslRuntimeError(f"cannot call {method!r} on {to_str(receiver)}", node.loc)

    def _string_method(self, base: str, method: str, args: list, loc):
        if method not in STRING_METHODS:
            raise GslRuntimeError(f"string method {method!r} is not supported", loc)
        if method == "substring":
            coerced = tuple(to_int(a) for a in args[:2]) or (0,)
        elif method == "charAt":
            coerced = (to_int(args[0]) if args else 0,)
        elif method == "indexOf":
            coerced = (to_str(args[0]) if args else "undefined",)
        elif method == "replace":
            coerced = (to_str(args[0]) if args else "undefined",
                       to_str(args[1]) if len(args) > 1 else "undefined")
        else:
            coerced = ()
        result = apply_string_op(method, base, coerced)
        if self.tracer.enabled:
            self.tracer.emit(tr.StringOp, method, base, coerced, result, loc)
        return result

    def _register(self, node: Node, env: Env):
        target = self.eval(node.children[0], env)
        event_type = to_str(self.eval(node.children[1], env))
        handler = self.eval(node.children[2], env)
        if isinstance(target, DocumentHost):
            el = self.session.document.root
        elif isinstance(target, ElementHost):
            el = target.el
        else:
            raise GslRuntimeError("addEventListener target must be an element", node.loc)
        if not isinstance(handler, Closure):
            raise GslRuntimeError("event handler must be a function", node.loc)
        self.session.register_handler(el, event_type, handler, node.loc)
        return UNDEFINED
