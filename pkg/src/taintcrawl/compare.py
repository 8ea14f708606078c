"""Seeded strategy comparison: several strategies, many seeds, median coverage figures."""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .analyses import DOM_XSS, TargetAnalysis
from .crawler import GUIDED, HYBRID, RANDOM, StrategyConfig, crawl
from .gsl.bundle import AppBundle
from .taint.stages import TaintParams


@dataclass
class RunSummary:
    strategy: str
    seed: int
    coverage: list  # (events dispatched, count)
    reached: frozenset  # endpoint keys (ajax) or sink locations (xss)
    dispatched: int

    def count_at(self, events: int) -> int:
        count = 0
        for e, c in self.coverage:
            if e > events:
                break
            count = c
        return count

    def events_to(self, goal: int) -> Optional[int]:
        for e, c in self.coverage:
            if c >= goal:
                return e
        return None


@dataclass
class StrategyRow:
    strategy: str
    runs: int
    full_coverage: int
    median_events_to_all: Optional[float]
    median_final: float
    median_series: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"strategy": self.strategy, "runs": self.runs, "full_coverage": self.full_coverage,
                "median_events_to_all": self.median_events_to_all,
                "median_final": self.median_final,
                "median_series": [list(p) for p in self.median_series]}


@dataclass
class Comparison:
    total: int
    budget: int
    seeds: list
    rows: list[StrategyRow]
    runs: list[RunSummary]

    def row(self, strategy: str) -> StrategyRow:
        return next(r for r in self.rows if r.strategy == strategy)

    def to_json(self) -> dict:
        return {"targets_total": self.total, "budget": self.budget, "seeds": list(self.seeds),
                "rows": [r.to_json() for r in self.rows]}

    def table(self) -> str:
        head = f"{'strategy':<8} {'runs':>5} {'full':>5} {'median events-to-all':>21} {'median final':>13}"
        lines = [f"targets reachable (union over runs): {self.total}", head]
        for r in self.rows:
            med = "n/a" if r.median_events_to_all is None else f"{r.median_events_to_all:g}"
            lines.append(f"{r.strategy:<8} {r.runs:>5} {r.full_coverage:>5} {med:>21} {r.median_final:>13g}")
        return "\n".join(lines)


def _run(job) -> RunSummary:
    bundle, analysis, kind, seed, budget, period, params = job
    cfg = StrategyConfig(kind=kind, seed=seed, event_budget=budget, hybrid_random_period=period)
    res = crawl(bundle, analysis, cfg, params)
    reached = res.sinks_reached if analysis.kind == DOM_XSS else res.endpoints
    return RunSummary(kind, seed, list(res.coverage), frozenset(reached), res.dispatched)


def _median(values: list) -> Optional[float]:
    """Median where ``None`` (never reached) sorts above every number."""
    ordered = sorted(values, key=lambda v: (v is None, v or 0))
    n = len(ordered)
    mid = ordered[(n - 1) // 2], ordered[n // 2]
    if None in mid:
        return None
    return (mid[0] + mid[1]) / 2


def compare_strategies(bundle: AppBundle, strategies=(GUIDED, RANDOM), n_seeds: int = 20,
                       budget: int = 300, analysis: Optional[TargetAnalysis] = None,
                       base_seed: int = 0, jobs: int = 1, hybrid_period: int = 5,
                       params: Optional[TaintParams] = None) -> Comparison:
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    analysis = analysis or TargetAnalysis.from_cli("ajax")
    seeds = list(range(base_seed, base_seed + n_seeds))
    todo = [(bundle, analysis, kind, seed, budget, hybrid_period, params)
            for kind in strategies for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run, todo))
    else:
        runs = [_run(job) for job in todo]

    union = frozenset().union(*(r.reached for r in runs))
    total = len(union)
    rows = []
    for kind in strategies:
        mine = [r for r in runs if r.strategy == kind]
        ticks = sorted({e for r in mine for e, _ in r.coverage})
        series = [(t, statistics.median(r.count_at(t) for r in mine)) for t in ticks]
        rows.append(StrategyRow(
            strategy=kind,
            runs=len(mine),
            full_coverage=sum(1 for r in mine if r.reached == union),
            median_events_to_all=_median([r.events_to(total) for r in mine]),
            median_final=statistics.median(len(r.reached) for r in mine),
            median_series=series,
        ))
    return Comparison(total, budget, seeds, rows, runs)


ALL_STRATEGIES = (GUIDED, RANDOM, HYBRID)
