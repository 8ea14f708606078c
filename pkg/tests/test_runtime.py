import io
import json

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import APPS
from helpers import body, kinds, make_bundle
from taintcrawl.report import load_schema
from taintcrawl.runtime import (DYNAMIC_REGISTRATION, STATIC_ATTR, EventDescriptor, GslRuntimeError,
                                NavigationError, StaleEvent, Storage, dispatch_event,
                                enumerate_events, event_to_json, fill_forms, load_page)
from taintcrawl.runtime.strings import apply_string_op


def test_guard_show_blocked(bundles):
    _, trace = load_page(bundles["guard-show"], "http://app.local/#action")
    branch = next(e for e in trace if e.kind == "Branch")
    assert branch.left == -1 and branch.right == -1 and branch.operator == ">"
    assert branch.outcome is False
    assert "SinkWrite" not in kinds(trace)


def test_guard_show_open(bundles):
    _, trace = load_page(bundles["guard-show"], "http://app.local/#show")
    sink = next(e for e in trace if e.kind == "SinkWrite")
    assert sink.sink_kind == "document.write" and "show" in sink.value


def test_no_scripts_no_calls():
    _, trace = load_page(make_bundle({}), "http://app.local/")
    assert "Call" not in kinds(trace)


def test_unknown_path():
    with pytest.raises(NavigationError):
        load_page(make_bundle({}), "http://app.local/elsewhere")


def test_loop_cap_is_runtime_error():
    b = make_bundle({"s.gs": "var i = 0; while (i < 1) { i = 0; }"})
    with pytest.raises(GslRuntimeError) as exc:
        load_page(b, "http://app.local/")
    assert exc.value.loc is not None


def test_type_error_has_location():
    b = make_bundle({"s.gs": "var o = {}; var x = o + 1;"})
    with pytest.raises(GslRuntimeError) as exc:
        load_page(b, "http://app.local/")
    assert exc.value.loc.script_id == "s.gs"


def test_number_plus_string():
    b = make_bundle({"s.gs": 'document.write(1 + "a");'})
    _, trace = load_page(b, "http://app.local/")
    assert [e.value for e in trace if e.kind == "SinkWrite"] == ["1a"]


def test_delegation_click(bundles):
    b = bundles["delegation"]
    session, _ = load_page(b, b.seed_url)
    [ev] = enumerate_events(session)
    assert ev.discovery == DYNAMIC_REGISTRATION
    fired = dispatch_event(session, ev)
    assert fired[0].kind == "HandlerFired"
    calls = [e.callee for e in fired if e.kind == "Call"]
    assert any(c.startswith("event_handler@") for c in calls)
    assert fired[-1].kind in ("NetRequest", "Exit")
    net = [e for e in fired if e.kind == "NetRequest"]
    assert [(n.method, n.url) for n in net] == [("GET", "/api/x")]


def test_handler_fetch_ends_trace():
    b = make_bundle({"s.gs": 'function go() { fetch("/api/x"); }'},
                    body({"tag": "button", "attrs": {"onclick": "go"}}))
    session, _ = load_page(b, "http://app.local/")
    [ev] = enumerate_events(session)
    fired = dispatch_event(session, ev)
    meaningful = [e for e in fired if e.kind != "Exit"]
    assert meaningful[-1].kind == "NetRequest" and meaningful[-1].url == "/api/x"


def test_stale_event():
    b = make_bundle({"s.gs": 'function go() { document.getElementById("box").innerHTML = ""; }'},
                    body({"tag": "div", "attrs": {"id": "box"},
                          "children": [{"tag": "button", "attrs": {"onclick": "go"}}]}))
    session, _ = load_page(b, "http://app.local/")
    [ev] = enumerate_events(session)
    dispatch_event(session, ev)
    with pytest.raises(StaleEvent):
        dispatch_event(session, ev)


def test_attr_and_listener_same_element():
    script = ('function a() {} function b() {}\n'
              'document.getElementById("x").addEventListener("mouseover", b);')
    b = make_bundle({"s.gs": script}, body({"tag": "button", "attrs": {"id": "x", "onclick": "a"}}))
    session, _ = load_page(b, "http://app.local/")
    evs = enumerate_events(session)
    assert [(e.event_type, e.discovery) for e in evs] == [("click", STATIC_ATTR),
                                                          ("mouseover", DYNAMIC_REGISTRATION)]


def test_duplicate_listeners_deduplicated():
    script = ('function a() {}\nvar x = document.getElementById("x");\n'
              'x.addEventListener("click", a);\nx.addEventListener("click", a);')
    b = make_bundle({"s.gs": script}, body({"tag": "button", "attrs": {"id": "x"}}))
    session, _ = load_page(b, "http://app.local/")
    assert len(enumerate_events(session)) == 1


def test_empty_page_no_events():
    session, _ = load_page(make_bundle({}), "http://app.local/")
    assert enumerate_events(session) == []


def _form(n_inputs):
    inputs = [{"tag": "input", "attrs": {"id": f"i{k}"}} for k in range(n_inputs)]
    return body({"tag": "form", "attrs": {"onsubmit": "send"}, "children": inputs})


def test_fill_one_input():
    b = make_bundle({"s.gs": "function send() {}"}, _form(1))
    session, _ = load_page(b, "http://app.local/")
    evs = fill_forms(session, ["x"])
    assert session.document.get_element_by_id("i0").attrs["value"] == "x"
    assert len(evs) == 1 and evs[0].event_type == "submit"


def test_fill_round_robin():
    b = make_bundle({"s.gs": "function send() {}"}, _form(3))
    session, _ = load_page(b, "http://app.local/")
    fill_forms(session, ["x", "y"])
    values = [session.document.get_element_by_id(f"i{k}").attrs["value"] for k in range(3)]
    assert values == ["x", "y", "x"]


def test_fill_no_forms():
    session, _ = load_page(make_bundle({}), "http://app.local/")
    assert fill_forms(session, ["x"]) == []


def test_input_value_is_source():
    script = ('function send() { var v = document.getElementById("i0").value;\n'
              '  document.getElementById("out").innerHTML = v; }')
    dom = _form(1)
    dom["children"][0]["children"].append({"tag": "div", "attrs": {"id": "out"}})
    b = make_bundle({"s.gs": script}, dom)
    session, _ = load_page(b, "http://app.local/")
    [ev] = fill_forms(session, ["<b>hi</b>"])
    fired = dispatch_event(session, ev)
    src = next(e for e in fired if e.kind == "SourceRead")
    assert src.source_kind == "input.value" and src.value == "<b>hi</b>"


def test_storage_persists_and_marks_app_writes():
    b = make_bundle({"s.gs": 'localStorage.setItem("k", "v"); var x = localStorage.getItem("k");'})
    storage = Storage()
    _, trace = load_page(b, "http://app.local/", storage=storage)
    read = next(e for e in trace if e.kind == "SourceRead")
    assert read.value == "v" and read.app_seeded
    assert storage.items == {"k": "v"}


def test_foreign_storage_value_not_app_seeded():
    b = make_bundle({"s.gs": 'var x = localStorage.getItem("k");'})
    _, trace = load_page(b, "http://app.local/", storage=Storage(items={"k": "evil"}))
    read = next(e for e in trace if e.kind == "SourceRead")
    assert read.value == "evil" and not read.app_seeded


def test_seq_strictly_increasing(bundles):
    for b in bundles.values():
        _, trace = load_page(b, b.seed_url)
        seqs = [e.seq for e in trace]
        assert seqs == sorted(set(seqs))


def _run_everything(bundle, url, trace_on):
    session, trace = load_page(bundle, url, trace=trace_on)
    out = list(trace)
    for ev in enumerate_events(session):
        try:
            out += dispatch_event(session, ev)
        except StaleEvent:
            pass
    return session, out


@pytest.mark.parametrize("app", APPS)
def test_determinism_traces(bundles, app):
    b = bundles[app]
    _, t1 = _run_everything(b, b.seed_url, True)
    _, t2 = _run_everything(b, b.seed_url, True)
    dump = lambda t: json.dumps([event_to_json(e) for e in t], sort_keys=True)  # noqa: E731
    assert dump(t1) == dump(t2)


@pytest.mark.parametrize("app", APPS)
def test_non_intrusive(bundles, app):
    b = bundles[app]
    on, _ = _run_everything(b, b.seed_url, True)
    off, quiet = _run_everything(b, b.seed_url, False)
    assert on.document.serialize() == off.document.serialize()
    assert quiet == []


@pytest.mark.parametrize("app", APPS)
def test_string_op_consistency(bundles, app):
    b = bundles[app]
    _, trace = _run_everything(b, b.seed_url, True)
    for e in trace:
        if e.kind == "StringOp" and e.op != "concat":
            assert apply_string_op(e.op, e.base, e.args) == e.result
        elif e.kind == "StringOp":
            assert e.base + "".join(e.args) == e.result


def test_sink_value_equals_host_input():
    b = make_bundle({"s.gs": 'var h = location.hash; document.getElementById("o").innerHTML = h + "!";'},
                    body({"tag": "div", "attrs": {"id": "o"}}))
    session, trace = load_page(b, "http://app.local/#abc")
    sink = next(e for e in trace if e.kind == "SinkWrite")
    assert sink.value == "#abc!"
    assert session.document.get_element_by_id("o").inner_html() == "#abc!"


def test_trace_sink_writes_valid_jsonl(bundles):
    buf = io.StringIO()
    b = bundles["payload-flow"]
    load_page(b, b.seed_url, trace_sink=buf)
    schema = load_schema("trace.schema.json")
    lines = buf.getvalue().splitlines()
    assert lines
    for line in lines:
        jsonschema.validate(json.loads(line), schema)


fragments = st.text(alphabet="abcshow#?=&/<>\"' ", max_size=12)


@settings(max_examples=80, deadline=None)
@given(fragments)
def test_fragment_runs_are_deterministic(frag):
    from conftest import CORPUS
    from taintcrawl.gsl import load_bundle
    b = load_bundle(CORPUS / "payload-flow")
    url = "http://app.local/#" + frag
    _, t1 = load_page(b, url)
    _, t2 = load_page(b, url)
    assert [event_to_json(e) for e in t1] == [event_to_json(e) for e in t2]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abAB#1 ", max_size=10), st.integers(-2, 12), st.integers(-2, 12),
       st.text(alphabet="abA#", max_size=3))
def test_string_ops_match_reference(s, i, j, needle):
    lo, hi = sorted((max(i, 0), max(j, 0)))
    assert apply_string_op("substring", s, (i, j)) == s[min(lo, len(s)):min(hi, len(s))]
    assert apply_string_op("indexOf", s, (needle,)) == s.find(needle)
    assert apply_string_op("toLowerCase", s, ()) == s.lower()
    assert apply_string_op("replace", s, (needle, "Z")) == s.replace(needle, "Z", 1)
    expected = s[i] if 0 <= i < len(s) else ""
    assert apply_string_op("charAt", s, (i,)) == expected


def test_event_descriptor_key():
    e = EventDescriptor((0, 1), "click", "f@s:1:1")
    assert e.key == ((0, 1), "click", "f@s:1:1")
