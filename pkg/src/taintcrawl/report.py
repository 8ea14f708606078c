"""Report assembly, serialization and schema validation."""

from __future__ import annotations

import json
from importlib import resources
from typing import Optional

import jsonschema

from . import __version__
from .crawler.search import CrawlResult

SCHEMA_VERSION = "1.0"
TOOL = "taintcrawl"

# keys whose provenance (default vs user-supplied) the header records
TUNABLES = ("theta", "eta", "size_threshold", "structure_threshold", "budget", "hybrid_period")


def load_schema(name: str) -> dict:
    return json.loads(resources.files("taintcrawl.schemas").joinpath(name).read_text())


def header(result: CrawlResult, user_set: frozenset = frozenset()) -> dict:
    cfg, params = result.cfg, result.params
    config = {
        "app": result.bundle.name,
        "seed_url": result.bundle.seed_url,
        "analysis": result.analysis.kind,
        "strategy": cfg.kind,
        "hybrid_period": cfg.hybrid_random_period,
        "budget": cfg.event_budget,
        "size_threshold": cfg.size_change_threshold,
        "structure_threshold": cfg.structure_diff_threshold,
        "theta": params.theta,
        "eta": params.eta,
    }
    return {
        "tool": TOOL,
        "version": __version__,
        "config": config,
        "seeds": [cfg.seed],
        "theta": params.theta,
        "eta": params.eta,
        "param_provenance": {k: ("user" if k in user_set else "default") for k in TUNABLES},
    }


def state_graph_summary(result: CrawlResult) -> dict:
    states = result.graph.states.values()
    return {
        "states": len(result.graph.states),
        "edges": len(result.graph.edges),
        "stale": sum(1 for s in states if s.stale),
        "analyzed": sum(1 for s in states if s.analyzed),
        "max_depth": max((len(s.event_seq) for s in states), default=0),
        "pages": sorted({s.path for s in states}),
        "events_dispatched": result.dispatched,
        "restores": result.restores,
        "restore_failures": result.restore_failures,
    }


def build_report(result: CrawlResult, user_set: frozenset = frozenset()) -> dict:
    flows = [v.to_json() for v in result.verdicts if v.is_flow]
    rejected = [v.to_json() for v in result.verdicts if not v.is_flow]
    endpoints = sorted(result.endpoints.items(), key=lambda kv: (kv[1], kv[0]))
    return {
        "schema_version": SCHEMA_VERSION,
        "header": header(result, user_set),
        "flows": flows,
        "rejected_pairs": rejected,
        "ajax_endpoints": [{"method": m, "url": u, "first_seen_event": n} for (m, u), n in endpoints],
        "coverage_series": [list(p) for p in result.coverage],
        "generated_inputs": [g.to_json() for g in result.generated],
        "state_graph_summary": state_graph_summary(result),
        "warnings": list(result.warnings),
        "budget_exhausted": result.budget_exhausted,
        "input_truncated": result.input_truncated,
    }


def validate_report(report: dict):
    jsonschema.validate(report, load_schema("report.schema.json"))


def dumps(doc: dict) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_report(report: dict, path: Optional[str]) -> str:
    text = dumps(report)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
