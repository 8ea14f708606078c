import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import APPS, CORPUS
from helpers import body, make_bundle
from taintcrawl.analyses import TargetAnalysis
from taintcrawl.callgraph import FUNCTION, SINK_SITE, CallGraph, CgNode
from taintcrawl.crawler import (GUIDED, HYBRID, NAVIGATE, RANDOM, CrawlState, Crawler, StateGraph,
                                StrategyConfig, crawl, is_visited, seed_from_links)
from taintcrawl.gsl import load_bundle
from taintcrawl.runtime import EventDescriptor

XSS = TargetAnalysis.from_cli("xss")
AJAX = TargetAnalysis.from_cli("ajax")
CFG = StrategyConfig()


def state(i, url="http://app.local/", digest="d", size=10, tags=None, parent=None, stale=False):
    return CrawlState(i, url, digest, size, tuple(tags or ["html"] * size), parent=parent, stale=stale)


# configuration

def test_config_validation():
    with pytest.raises(ValueError):
        StrategyConfig(hybrid_random_period=1)
    with pytest.raises(ValueError):
        StrategyConfig(size_change_threshold=1.5)
    with pytest.raises(ValueError):
        StrategyConfig(kind="Greedy")


# is_visited

def test_identical_state_visited():
    sg = StateGraph()
    sg.add_state(state(0))
    assert is_visited(sg, state(1), CFG) == 0


def test_grown_dom_is_new():
    sg = StateGraph()
    sg.add_state(state(0, size=10))
    assert is_visited(sg, state(1, digest="e", size=15), CFG) is None


def test_other_path_is_new():
    sg = StateGraph()
    sg.add_state(state(0))
    assert is_visited(sg, state(1, url="http://app.local/other"), CFG) is None


def test_small_structure_change_visited():
    sg = StateGraph()
    tags = ["html", "body"] + ["div"] * 18
    sg.add_state(state(0, size=20, tags=tags))
    near = tags[:-1] + ["p"]
    assert is_visited(sg, state(1, digest="e", size=20, tags=near), CFG) == 0
    far = tags[:15] + ["p"] * 5
    assert is_visited(sg, state(2, digest="f", size=20, tags=far), CFG) is None


tag_lists = st.lists(st.sampled_from(["div", "p", "a", "ul"]), min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(tag_lists, tag_lists, st.sampled_from(["/", "/x"]), st.booleans())
def test_is_visited_definition(t1, t2, path2, same_digest):
    from taintcrawl.taint import structure_diff
    sg = StateGraph()
    sg.add_state(state(0, digest="a", size=len(t1), tags=t1))
    cand = state(1, url="http://app.local" + path2, digest="a" if same_digest else "b",
                 size=len(t2), tags=t2)
    expected = (path2 == "/"
                and abs(len(t1) - len(t2)) / max(len(t1), len(t2)) <= CFG.size_change_threshold
                and (same_digest or structure_diff(t1, t2) <= CFG.structure_diff_threshold))
    assert (is_visited(sg, cand, CFG) == 0) == expected


# state graph

def test_state_graph_rejects_dangling():
    sg = StateGraph()
    sg.add_state(state(0))
    with pytest.raises(ValueError):
        sg.add_state(state(1, parent=7))
    with pytest.raises(ValueError):
        sg.add_edge(0, EventDescriptor((0,), "click", "f"), 3)
    assert sg.root.parent is None


def test_shortest_path_skips_stale():
    sg = StateGraph()
    for i, stale in enumerate([False, False, True, False]):
        sg.add_state(state(i, digest=str(i), parent=0 if i else None, stale=stale))
    a, b, c = (EventDescriptor((k,), "click", f"f{k}") for k in range(3))
    sg.add_edge(0, a, 2)
    sg.add_edge(2, b, 3)
    sg.add_edge(0, c, 1)
    sg.add_edge(1, b, 3)
    assert sg.shortest_path(0, 3) == [c, b]


# prioritization

def _prio_crawler(kind=GUIDED, period=5):
    b = make_bundle({})
    c = Crawler(b, XSS, StrategyConfig(kind=kind, hybrid_random_period=period))
    g = CallGraph()
    for n in ("h1", "h2", "h3", "f"):
        g.add_node(CgNode(n, None, FUNCTION))
    g.add_node(CgNode("sink", None, SINK_SITE, "innerHTML"))
    g.add_edge("h1", "f")
    g.add_edge("f", "g")
    g.add_node(CgNode("g", None, FUNCTION))
    g.add_edge("g", "sink", containment=True)
    g.add_edge("h3", "g")
    c.acg = g
    return c


def _events(*names):
    return [EventDescriptor((i,), "click", n) for i, n in enumerate(names)]


def test_guided_prefers_finite_distance():
    c = _prio_crawler()
    s = state(0)
    s.pending_events = _events("h2", "h1")
    assert c.prioritize(s).handler_fn == "h1"


def test_guided_tie_document_order():
    c = _prio_crawler()
    s = state(0)
    s.pending_events = _events("h2", "h2b")
    assert c.prioritize(s).element_path == (0,)


def test_guided_nearest_wins():
    c = _prio_crawler()
    s = state(0)
    s.pending_events = _events("h1", "h3")
    assert c.prioritize(s).handler_fn == "h3"


def test_hybrid_one_in_five_random():
    c = _prio_crawler(HYBRID, 5)
    assert [c.selection_kind(n) for n in range(1, 11)] == [GUIDED] * 4 + [RANDOM] + [GUIDED] * 4 + [RANDOM]


def test_random_is_seeded():
    picks = []
    for _ in range(2):
        c = _prio_crawler(RANDOM)
        s = state(0)
        s.pending_events = _events(*[f"h{k}" for k in range(10)])
        picks.append([c.prioritize(s).handler_fn for _ in range(5)])
    assert picks[0] == picks[1]


def test_no_pending_returns_none():
    assert _prio_crawler().prioritize(state(0)) is None


# static links

def test_seed_from_links_targets_first(bundles):
    b = bundles["multipage"]
    assert seed_from_links(b, XSS.target_apis) == ["http://app.local/b", "http://app.local/a",
                                                  "http://app.local/c"]


def test_seed_from_links_no_targets_keeps_order(bundles):
    b = bundles["multipage"]
    assert seed_from_links(b, AJAX.target_apis) == ["http://app.local/a", "http://app.local/b",
                                                   "http://app.local/c"]


def test_seed_from_links_all_targets_stable():
    other = [{"path": p, "dom": {"tag": "html"}, "scripts": ["w.gs"]} for p in ("/a", "/b")]
    dom = body({"tag": "a", "attrs": {"href": "/b"}}, {"tag": "a", "attrs": {"href": "/a"}})
    b = make_bundle({"w.gs": 'document.write("x");'}, dom, extra_pages=other)
    assert seed_from_links(b, XSS.target_apis) == ["http://app.local/b", "http://app.local/a"]


def test_multipage_visits_target_page_first(bundles):
    res = crawl(bundles["multipage"], XSS, CFG)
    first_nav = next(ev for _, ev, _ in res.graph.edges if ev.event_type == NAVIGATE)
    assert first_nav.handler_fn == "http://app.local/b"
    assert {s.path for s in res.graph.states.values()} == {"/", "/a", "/b", "/c"}


# main loop

def test_single_page_no_events():
    b = make_bundle({"s.gs": 'var h = location.hash; document.write(h);'})
    res = crawl(b, XSS, CFG)
    assert len(res.graph.states) == 1 and res.dispatched == 0
    assert res.graph.states[0].analyzed


def test_guard_show_flow(bundles):
    res = crawl(bundles["guard-show"], XSS, CFG)
    assert len(res.flows) == 1


def test_budget_exhaustion_recorded(bundles):
    res = crawl(bundles["ajax-depth"], AJAX, StrategyConfig(event_budget=4))
    assert res.budget_exhausted and res.dispatched == 4
    assert any("BudgetExhausted" in w for w in res.warnings)


def test_no_targets_degrades_to_random():
    b = make_bundle({"s.gs": "function f() {}"}, body({"tag": "button", "attrs": {"onclick": "f"}}))
    res = crawl(b, XSS, CFG)
    assert any("random" in w for w in res.warnings)


def test_guided_reaches_each_depth(bundles):
    res = crawl(bundles["ajax-depth"], AJAX, StrategyConfig(event_budget=300))
    firsts = sorted(res.endpoints.values())
    assert firsts == [1, 2, 3]


def _instrumented(bundle, analysis, cfg):
    c = Crawler(bundle, analysis, cfg)
    log = {"restores": [], "new": []}
    orig_restore, orig_enter = c.restore, c._enter_new_state

    def restore(target_id):
        log["restores"].append(list(c.sg.states[c.current].pending_events))
        return orig_restore(target_id)

    def enter(s):
        log["new"].append((s.parent, c.current))
        return orig_enter(s)
    c.restore, c._enter_new_state = restore, enter
    return c, log


@pytest.mark.parametrize("app", APPS)
@pytest.mark.parametrize("kind", [GUIDED, RANDOM])
def test_crawl_invariants(app, kind):
    b = load_bundle(CORPUS / app)
    c, log = _instrumented(b, AJAX, StrategyConfig(kind=kind, event_budget=120, seed=3))
    res = c.run()
    # DFS: restoration only from a dead end; a new state is the child of the state it was found from
    assert all(pending == [] for pending in log["restores"])
    assert all(parent == cur for parent, cur in log["new"][1:])
    keys = [(s.path, s.dom_digest) for s in res.graph.states.values()]
    assert len(keys) == len(set(keys))
    for src, _, dst in res.graph.edges:
        assert src in res.graph.states and dst in res.graph.states
    counts = [n for _, n in res.coverage]
    assert counts == sorted(counts)
    events = [e for e, _ in res.coverage]
    assert events == sorted(set(events)) and events[-1] == res.dispatched


@pytest.mark.parametrize("app", APPS)
def test_crawl_deterministic(app):
    b = load_bundle(CORPUS / app)
    one = crawl(b, XSS, StrategyConfig(kind=HYBRID, seed=11, event_budget=80))
    two = crawl(b, XSS, StrategyConfig(kind=HYBRID, seed=11, event_budget=80))
    assert [s.summary() for s in one.graph.states.values()] == \
           [s.summary() for s in two.graph.states.values()]
    assert one.coverage == two.coverage and one.endpoints == two.endpoints


# restoration

def _chain_crawler():
    b = load_bundle(CORPUS / "restore-chain")
    c = Crawler(b, AJAX, StrategyConfig(event_budget=500))
    c.run()
    by_seq = {tuple(e.handler_fn.split("@")[0] for e in s.event_seq): s.id for s in c.sg.states.values()}
    return c, by_seq


def test_restore_one_event_from_current():
    c, ids = _chain_crawler()
    assert c.restore(ids[("step1",)])
    before = c.dispatched
    assert c.restore(ids[("step1", "leave")])
    assert c.dispatched - before == 1


def test_restore_replays_shortest_path_from_root():
    c, ids = _chain_crawler()
    assert c.restore(ids[("step1", "leave")])
    before = c.dispatched
    target = ids[("step1", "step2", "step3")]
    assert c.restore(target)
    assert c.dispatched - before == 3
    assert c.session.document.digest() == c.sg.states[target].dom_digest


def test_restore_diverging_storage_fails():
    script = ('function bump() {\n'
              '  var n = localStorage.getItem("n");\n'
              '  if (n == null) {\n'
              '    localStorage.setItem("n", "1");\n'
              '    document.getElementById("z").innerHTML = "<p>a</p><p>b</p><p>c</p><p>d</p>";\n'
              '  } else {\n'
              '    document.getElementById("z").innerHTML = "<ul><li>again</li><li>x</li></ul>";\n'
              '  }\n'
              '}\n')
    b = make_bundle({"s.gs": script}, body({"tag": "button", "attrs": {"onclick": "bump"}},
                                           {"tag": "div", "attrs": {"id": "z"}}))
    c = Crawler(b, AJAX, StrategyConfig(event_budget=50))
    c.run()
    first = next(s for s in c.sg.states.values() if len(s.event_seq) == 1)
    other = next(s.id for s in c.sg.states.values() if s.id != first.id and s.id != 0)
    c.current = other
    assert not c.restore(first.id)
    assert first.stale and c.restore_failures >= 1
    assert any("RestoreFailed" in w for w in c.warnings)
