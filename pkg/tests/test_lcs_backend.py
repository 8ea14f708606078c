import importlib.util
import runpy
import sys
from pathlib import Path

from hypothesis import given, settings
from hypothesis import strategies as st

from taintcrawl.taint import lcs

BENCH = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_lcs.py"


def test_compiled_backend_built():
    # the editable install compiles the extension; the fallback is only for broken toolchains
    assert lcs.BACKEND == "cython"


def test_fallback_selected_without_extension(monkeypatch):
    # load an isolated copy so the shared module (and its exception types) stay untouched
    monkeypatch.setitem(sys.modules, "taintcrawl.taint._lcs", None)
    spec = importlib.util.spec_from_file_location("taintcrawl.taint._lcs_fallback_probe", lcs.__file__,
                                                  submodule_search_locations=None)
    fallback = importlib.util.module_from_spec(spec)
    fallback.__package__ = "taintcrawl.taint"
    spec.loader.exec_module(fallback)
    assert fallback.BACKEND == "python"
    assert fallback.lcs_counts("#payload", "yloa123") == (3, 4)
    assert lcs.BACKEND == "cython"


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 3), max_size=25), st.lists(st.integers(0, 3), max_size=25))
def test_token_sequences_agree(a, b):
    assert lcs.lcs_length_ext(a, b) == lcs.lcs_length_py(a, b)


@settings(max_examples=100, deadline=None)
@given(st.text(max_size=40), st.text(max_size=40))
def test_unicode_strings_agree(a, b):
    assert lcs.lcs_length_ext(a, b) == lcs.lcs_length_py(a, b)


def test_structure_diff_bounds():
    assert lcs.structure_diff([], []) == 0.0
    assert lcs.structure_diff(["a"], ["b"]) == 1.0
    assert lcs.structure_diff(["a", "b"], ["a", "b", "c", "d"]) == 0.5


def test_benchmark_runs(capsys):
    bench = runpy.run_path(str(BENCH))
    bench["main"](["--sizes", "8", "32", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "active backend: cython" in out and "x" in out
