"""Pair formation and the staged source-to-sink inference pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional

from ..gsl.ast import SourceLoc
from .lcs import LengthExceeded
from .mutate import mutate
from .stages import (MATCH, MATCHES, YES, TaintParams, edit_distance_stage, substring_stage,
                     trace_check_stage)

SUBSTRING = "Substring"
EDIT_DISTANCE = "EditDistance"
SINK_CHECK = "SinkCheck"
TRACE_CHECK = "TraceCheck"
STAGES = (SUBSTRING, EDIT_DISTANCE, SINK_CHECK, TRACE_CHECK)

FLOW = "Flow"
NO_FLOW = "NoFlow"

SINK_MISSED = "SinkMissed"
SINK_CHANGED = "SinkChanged"
SINK_IDENTICAL = "SinkIdentical"
NOT_RUN = "NotRun"


class RerunFailed(Exception):
    pass


@dataclass(frozen=True)
class Observation:
    loc: SourceLoc
    kind: str
    value: str
    seq: int
    state_id: Optional[int] = None
    event_seq: tuple = ()
    input_url: Optional[str] = None

    def to_json(self) -> dict:
        return {"loc": self.loc.to_json(), "kind": self.kind, "value": self.value,
                "state_id": self.state_id, "input_url": self.input_url}


@dataclass
class Execution:
    """One recorded run: the trace plus whatever the rerun callback needs to replay it."""
    trace: list
    input_url: Optional[str] = None
    state_id: Optional[int] = None
    event_seq: tuple = ()
    context: Any = None


@dataclass
class CandidatePair:
    source: Observation
    sink: Observation
    d_i: Optional[int] = None
    d_d: Optional[int] = None

    @property
    def key(self) -> tuple:
        return (self.source.loc, self.sink.loc)


@dataclass
class FlowVerdict:
    pair: CandidatePair
    stage_reached: str
    verdict: str
    d_ti: int = 0
    d_td: int = 0
    mutation_outcome: str = NOT_RUN
    similarity: Optional[float] = None
    degraded: bool = False
    warnings: list = field(default_factory=list)

    @property
    def is_flow(self) -> bool:
        return self.verdict == FLOW

    def sort_key(self) -> tuple:
        return (self.pair.sink.loc, self.pair.source.loc)

    def to_json(self) -> dict:
        return {
            "source": self.pair.source.to_json(),
            "sink": self.pair.sink.to_json(),
            "d_i": self.pair.d_i,
            "d_d": self.pair.d_d,
            "d_ti": self.d_ti,
            "d_td": self.d_td,
            "stage_reached": self.stage_reached,
            "verdict": self.verdict,
            "mutation_outcome": self.mutation_outcome,
            "similarity": self.similarity,
            "degraded": self.degraded,
            "warnings": list(self.warnings),
        }


Rerun = Callable[[Execution, dict], list]


def form_pairs(execution: Execution, sink_kinds: Optional[Iterable[str]] = None) -> list[CandidatePair]:
    """Source reads paired with every later sink write of the same execution."""
    wanted = None if sink_kinds is None else set(sink_kinds)
    sources, pairs = [], []
    for ev in execution.trace:
        if ev.kind == "SourceRead":
            # empty reads and values the app stored itself cannot carry attacker input
            if ev.value and not ev.app_seeded:
                sources.append(Observation(ev.loc, ev.source_kind, ev.value, ev.seq,
                                           execution.state_id, execution.event_seq, execution.input_url))
        elif ev.kind == "SinkWrite" and ev.value and (wanted is None or ev.sink_kind in wanted):
            sink = Observation(ev.loc, ev.sink_kind, ev.value, ev.seq,
                               execution.state_id, execution.event_seq, execution.input_url)
            pairs.extend(CandidatePair(src, sink) for src in sources)
    return pairs


def _sink_values(trace: list, loc: SourceLoc) -> list[str]:
    return [ev.value for ev in trace if ev.kind == "SinkWrite" and ev.loc == loc]


def sink_check_stage(pair: CandidatePair, execution: Execution, rerun: Rerun,
                     params: TaintParams) -> tuple[bool, str, list]:
    """Return ``(proceed, mutation_outcome, warnings)``.

    Each trial mutates the source value and replays the execution; the pair is
    dropped only if every trial leaves the sink value unchanged.
    """
    index = [ev.seq for ev in execution.trace
             if ev.kind == "SinkWrite" and ev.loc == pair.sink.loc].index(pair.sink.seq)
    tried = set()
    for trial in range(params.mutation_trials):
        mutated = mutate(pair.source.value, params.mutation_fraction, params.seed, trial)
        if mutated == pair.source.value:
            return True, NOT_RUN, ["source value has no mutable characters"]
        if mutated in tried:
            continue
        tried.add(mutated)
        try:
            trace = rerun(execution, {pair.source.loc: mutated})
        except RerunFailed as exc:
            return True, NOT_RUN, [f"rerun failed: {exc}"]
        values = _sink_values(trace, pair.sink.loc)
        if index >= len(values):
            return True, SINK_MISSED, []
        if values[index] != pair.sink.value:
            return True, SINK_CHANGED, []
    return False, SINK_IDENTICAL, []


def evaluate_pair(pair: CandidatePair, execution: Execution, rerun: Optional[Rerun],
                  params: TaintParams) -> FlowVerdict:
    a_v, b_v = pair.source.value, pair.sink.value
    if substring_stage(a_v, b_v, params.theta) == MATCH:
        pair.d_i = pair.d_d = 0
        return FlowVerdict(pair, SUBSTRING, FLOW, similarity=1.0 if a_v == b_v else None)
    try:
        decision, d_i, d_d, sim = edit_distance_stage(a_v, b_v, params.eta, params.max_lcs_len)
    except LengthExceeded:
        return FlowVerdict(pair, SUBSTRING, NO_FLOW, degraded=True,
                           warnings=["value too long for edit-distance stage"])
    pair.d_i, pair.d_d = d_i, d_d
    if decision != YES:
        return FlowVerdict(pair, EDIT_DISTANCE, NO_FLOW, similarity=sim)

    warnings: list = []
    outcome = NOT_RUN
    if rerun is not None:
        proceed, outcome, warnings = sink_check_stage(pair, execution, rerun, params)
        if not proceed:
            return FlowVerdict(pair, SINK_CHECK, NO_FLOW, mutation_outcome=outcome, similarity=sim)
    else:
        warnings = ["sink check skipped: no rerun available"]

    window = [ev for ev in execution.trace if pair.source.seq < ev.seq < pair.sink.seq]
    verdict, d_ti, d_td = trace_check_stage(a_v, d_i, d_d, window, params)
    return FlowVerdict(pair, TRACE_CHECK, FLOW if verdict == MATCHES else NO_FLOW,
                       d_ti=d_ti, d_td=d_td, mutation_outcome=outcome,
                       similarity=sim, warnings=warnings)


def run_pipeline(executions: Iterable[Execution], rerun: Optional[Rerun], params: TaintParams,
                 sink_kinds: Optional[Iterable[str]] = None) -> list[FlowVerdict]:
    """Evaluate every (source, sink) pair; one verdict per (source loc, sink loc).

    A location pair keeps the first Flow seen across executions, otherwise the
    first verdict. Results are ordered by sink location, then source location.
    """
    sink_kinds = None if sink_kinds is None else tuple(sink_kinds)
    best: dict[tuple, FlowVerdict] = {}
    for execution in executions:
        for pair in form_pairs(execution, sink_kinds):
            prior = best.get(pair.key)
            if prior is not None and prior.is_flow:
                continue
            verdict = evaluate_pair(pair, execution, rerun, params)
            if prior is None or verdict.is_flow:
                best[pair.key] = verdict
    return sorted(best.values(), key=FlowVerdict.sort_key)
