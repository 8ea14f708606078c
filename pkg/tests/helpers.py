"""Small in-memory bundles for unit tests."""

from taintcrawl.gsl import bundle_from_manifest


def make_bundle(scripts: dict, dom=None, seed="http://app.local/", extra_pages=(), config=None):
    pages = [{"path": "/", "dom": dom or {"tag": "html", "children": [{"tag": "body"}]},
              "scripts": list(scripts)}]
    pages += list(extra_pages)
    manifest = {"seed_url": seed, "pages": pages}
    if config is not None:
        manifest["config"] = config
    all_scripts = dict(scripts)
    for page in extra_pages:
        for name in page.get("scripts", []):
            all_scripts.setdefault(name, "")
    return bundle_from_manifest(manifest, all_scripts)


def body(*children):
    return {"tag": "html", "children": [{"tag": "body", "children": list(children)}]}


def kinds(trace):
    return [e.kind for e in trace]
