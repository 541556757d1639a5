"""Private information retrieval under asymmetric per-database traffic.

The toolkit synthesizes executable retrieval schemes for N replicated
databases whose per-database traffic shares are constrained, simulates them
against in-process database nodes, computes the matching capacity upper
bounds, and verifies privacy structure and decodability independently.
"""

from .bounds import (BoundResult, asymmetry_threshold, capacity_small_m,
                     symmetric_capacity, sweep, sweep_csv, upper_bound)
from .checks import (canonical_shape, check_capacity_match,
                     check_privacy_shape, check_query_distribution,
                     check_view_invariance, oracle_decode)
from .fields import (DEFAULT_PRIME, Field, MessageStore, Permutation,
                     load_store, make_store, save_store)
from .mixing import Mixture, best_rate, mixture
from .plans import (DecodeMap, Query, QueryPlan, concatenate, render_table,
                    required_length, synthesize)
from .simulate import (AnswerString, DatabaseNode, HarnessReport,
                       RetrievalResult, make_nodes, resolve_corner_request,
                       resolve_target_request, retrieve, run_harness)
from .stages import (CornerPoint, SchemeSpec, StageCounts, TrafficVector,
                     corner_point, enumerate_corners, n2_profile,
                     n2_tradeoff, solve_stages)

__version__ = "0.1.0"

__all__ = [
    "AnswerString",
    "BoundResult",
    "CornerPoint",
    "DEFAULT_PRIME",
    "DatabaseNode",
    "DecodeMap",
    "Field",
    "HarnessReport",
    "MessageStore",
    "Mixture",
    "Permutation",
    "Query",
    "QueryPlan",
    "RetrievalResult",
    "SchemeSpec",
    "StageCounts",
    "TrafficVector",
    "asymmetry_threshold",
    "best_rate",
    "canonical_shape",
    "capacity_small_m",
    "check_capacity_match",
    "check_privacy_shape",
    "check_query_distribution",
    "check_view_invariance",
    "concatenate",
    "corner_point",
    "enumerate_corners",
    "load_store",
    "make_nodes",
    "make_store",
    "mixture",
    "n2_profile",
    "n2_tradeoff",
    "oracle_decode",
    "render_table",
    "required_length",
    "resolve_corner_request",
    "resolve_target_request",
    "retrieve",
    "run_harness",
    "save_store",
    "solve_stages",
    "sweep",
    "sweep_csv",
    "symmetric_capacity",
    "synthesize",
    "upper_bound",
]
