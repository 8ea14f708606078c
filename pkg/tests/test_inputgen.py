from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS
from helpers import make_bundle
from taintcrawl.gsl import SourceLoc, load_bundle
from taintcrawl.inputgen import (CONTAINS_NEEDLE, EQUALS_FULL, PREFIX_MATCH, RUN_CAP, STATE_CAP,
                                 ConstraintEntry, RunBudget, analyze, execution_path,
                                 generate_new_urls, harvest_constraints, url_parts, value_input_gen)
from taintcrawl.runtime import GslRuntimeError, NavigationError, load_page
from taintcrawl.runtime.trace import Branch, StringOp
from taintcrawl.taint import Execution, TaintParams

P = TaintParams()
L1 = SourceLoc("s.gs", 3, 5)
L2 = SourceLoc("s.gs", 7, 5)


def runner(bundle):
    def run(url):
        try:
            _, trace = load_page(bundle, url)
        except NavigationError:
            return None
        except GslRuntimeError as err:
            trace = err.session.trace
        return Execution(list(trace), url)
    return run


def test_guard_constraint_from_trace(bundles):
    b = bundles["guard-show"]
    _, trace = load_page(b, "http://example.com/#action".replace("example.com", "app.local"))
    found = harvest_constraints(execution_path(trace), "http://app.local/#action", P)
    [entry] = found.values()
    assert entry.tainted_val == "action" and entry.compared_val == "show"
    assert entry.template == CONTAINS_NEEDLE


def test_guard_url_rewrite():
    entry = ConstraintEntry(L1, "action", "show", CONTAINS_NEEDLE)
    urls = generate_new_urls({L1: entry}, "http://example.com#action")
    assert [u for u, _ in urls] == ["http://example.com#show"]


def test_no_tainted_operands():
    path = [Branch(0, L1, "x", "y", "==", False)]
    assert value_input_gen(path, "http://app.local/#action", P) == []


def test_equality_template():
    path = [Branch(0, L1, "guest", "admin", "==", False)]
    out = value_input_gen(path, "http://app.local/?q=guest", P)
    assert [u for u, _ in out] == ["http://app.local/?q=admin"]
    assert out[0][1].template == EQUALS_FULL


def test_prefix_template():
    path = [StringOp(0, "substring", "payload", (0, 5), "paylo", L1),
            Branch(1, L2, "paylo", "dijit", "==", False)]
    out = value_input_gen(path, "http://app.local/?theme=payload", P)
    assert [u for u, _ in out] == ["http://app.local/?theme=dijitpayload"]
    assert out[0][1].template == PREFIX_MATCH


def test_tainted_value_absent_skipped():
    warnings = []
    entry = ConstraintEntry(L1, "nothere", "show", CONTAINS_NEEDLE)
    assert generate_new_urls({L1: entry}, "http://app.local/#action", warnings=warnings) == []
    assert warnings


def test_two_constraints_two_urls():
    entries = {L1: ConstraintEntry(L1, "aaa", "xxx", EQUALS_FULL),
               L2: ConstraintEntry(L2, "bbb", "yyy", EQUALS_FULL)}
    urls = [u for u, _ in generate_new_urls(entries, "http://app.local/?p=aaa&q=bbb")]
    assert urls == ["http://app.local/?p=xxx&q=bbb", "http://app.local/?p=aaa&q=yyy"]


def test_key_needle_appends_query():
    entry = ConstraintEntry(L1, "test.html", "theme=", CONTAINS_NEEDLE)
    urls = [u for u, _ in generate_new_urls({L1: entry}, "http://app.local/test.html", "payload")]
    assert urls == ["http://app.local/test.html?theme=payload"]


def test_substitution_order_fragment_first():
    entry = ConstraintEntry(L1, "abc", "zzz", EQUALS_FULL)
    urls = [u for u, _ in generate_new_urls({L1: entry}, "http://app.local/abc?k=abc#abc")]
    assert urls == ["http://app.local/abc?k=abc#zzz"]


def test_url_parts_order():
    parts = url_parts("http://h/p/q?a=1&b=2#f")
    assert [(p.where, p.value) for p in parts] == [("fragment", "f"), ("query", "1"), ("query", "2"),
                                                  ("path", "p"), ("path", "q")]
    for p in parts:
        assert "http://h/p/q?a=1&b=2#f"[p.start:p.end] == p.value


def test_analyze_guard_show(bundles):
    b = bundles["guard-show"]
    res = analyze(b.seed_url, runner(b), P)
    assert [g.url for g in res.generated] == ["http://app.local/#show"]
    assert [e.input_url for e in res.executions] == [b.seed_url, "http://app.local/#show"]


def test_analyze_no_guards():
    b = make_bundle({"s.gs": "var h = location.hash;"})
    res = analyze("http://app.local/#x", runner(b), P)
    assert res.generated == [] and len(res.executions) == 1


def test_analyze_dojo(bundles):
    b = bundles["dojo-theme"]
    res = analyze(b.seed_url, runner(b), P)
    urls = [g.url for g in res.generated]
    assert "http://app.local/test.html?theme=payload" in urls
    assert "http://app.local/test.html?theme=dijitpayload" in urls
    assert len(urls) <= STATE_CAP and not res.truncated


def test_analyze_is_repeatable(bundles):
    for name in ("guard-show", "dojo-theme"):
        b = bundles[name]
        one = [g.url for g in analyze(b.seed_url, runner(b), P).generated]
        two = [g.url for g in analyze(b.seed_url, runner(b), P).generated]
        assert one == two


def test_state_cap_truncates():
    # every input fails an equality guard against a fresh literal: unbounded without a cap
    script = ('var h = location.hash;\n'
              'if (h == "#a") { var x = 1; }\nif (h == "#b") { var y = 1; }\n'
              'if (h == "#c") { var z = 1; }')
    b = make_bundle({"s.gs": script})
    res = analyze("http://app.local/#payload", runner(b), P, state_cap=2)
    assert len(res.generated) == 2 and res.truncated


def test_run_budget_shared():
    budget = RunBudget(limit=1)
    b = load_bundle(CORPUS / "dojo-theme")
    res = analyze(b.seed_url, runner(b), P, budget=budget)
    assert len(res.generated) == 1 and res.truncated
    assert RUN_CAP == 512 and STATE_CAP == 64


def test_queue_never_repeats_urls(bundles):
    for b in bundles.values():
        res = analyze(b.seed_url, runner(b), P)
        seen = [e.input_url for e in res.executions]
        assert len(seen) == len(set(seen))


tokens = st.text(alphabet="abcdef", min_size=6, max_size=8)


@settings(max_examples=150, deadline=None)
@given(tokens, tokens, st.sampled_from(["#", "?k="]))
def test_one_substitution_per_url(tainted, compared, where):
    url = f"http://app.local/{where}{tainted}"
    entry = ConstraintEntry(L1, tainted, compared, EQUALS_FULL)
    out = generate_new_urls({L1: entry}, url)
    if compared == tainted:
        assert out == []
        return
    [(new, _)] = out
    # exactly one contiguous edit relative to the parent
    prefix = 0
    while prefix < min(len(url), len(new)) and url[prefix] == new[prefix]:
        prefix += 1
    suffix = 0
    while (suffix < min(len(url), len(new)) - prefix
           and url[len(url) - 1 - suffix] == new[len(new) - 1 - suffix]):
        suffix += 1
    assert url[:prefix] + url[len(url) - suffix:] == new[:prefix] + new[len(new) - suffix:]
    assert new.replace(compared, tainted, 1) == url or compared in new


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="abcshowxyz", min_size=1, max_size=10))
def test_analyze_terminates_for_any_fragment(frag):
    b = load_bundle(CORPUS / "guard-show")
    res = analyze("http://app.local/#" + frag, runner(b), P)
    assert len(res.generated) <= STATE_CAP
    for g in res.generated:
        assert g.url != g.parent
