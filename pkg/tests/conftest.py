import sys
from pathlib import Path

import pytest

from taintcrawl.gsl import load_bundle

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
APPS = sorted(p.name for p in CORPUS.iterdir() if (p / "manifest.json").exists())

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def bundles():
    return {name: load_bundle(CORPUS / name) for name in APPS}
