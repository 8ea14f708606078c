from .lcs import BACKEND, DEFAULT_MAX_LCS_LEN, LengthExceeded, lcs_counts, lcs_length, structure_diff
from .mutate import mutate
from .pipeline import (EDIT_DISTANCE, FLOW, NO_FLOW, NOT_RUN, SINK_CHANGED, SINK_CHECK,
                       SINK_IDENTICAL, SINK_MISSED, STAGES, SUBSTRING, TRACE_CHECK, CandidatePair,
                       Execution, FlowVerdict, Observation, RerunFailed, evaluate_pair, form_pairs,
                       run_pipeline, sink_check_stage)
from .stages import (MATCH, MATCHES, NO, NO_MATCH, YES, TaintParams, edit_distance_stage,
                     is_op_tainted, similarity, substring_stage, trace_check_rejects,
                     trace_check_stage, value_tainted)

__all__ = [
    "BACKEND", "DEFAULT_MAX_LCS_LEN", "EDIT_DISTANCE", "FLOW", "MATCH", "MATCHES", "NO",
    "NOT_RUN", "NO_FLOW", "NO_MATCH", "SINK_CHANGED", "SINK_CHECK", "SINK_IDENTICAL",
    "SINK_MISSED", "STAGES", "SUBSTRING", "TRACE_CHECK", "YES", "CandidatePair", "Execution",
    "FlowVerdict", "LengthExceeded", "Observation", "RerunFailed", "TaintParams",
    "edit_distance_stage", "evaluate_pair", "form_pairs", "is_op_tainted", "lcs_counts",
    "lcs_length", "mutate", "run_pipeline", "similarity", "sink_check_stage",
    "structure_diff", "substring_stage", "trace_check_rejects", "trace_check_stage",
    "value_tainted",
]
