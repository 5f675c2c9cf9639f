"""Trace-driven simulator for online caching with next-arrival predictions.

Implements the naive prediction-following eviction policy, classical robust
policies (LRU, randomized marking, offline optimal), deterministic and
randomized black-box combiners, prediction-error metrics with competitive
bound checkers, and an adaptive lower-bound adversary, plus a CSV experiment
runner.
"""

from .adversary import AdversaryConfig, AdversaryResult, certify_lower_bound, run_adversary
from .combine import CombinedResult, FtlCombiner, MwCombiner, mw_update, run_ftl, run_mw
from .errors import ConfigError, NondeterministicPolicyError, TraceParseError
from .metrics import (
    BOUND_IDS,
    BoundRecord,
    BoundReport,
    ErrorSummary,
    SlackPolicy,
    check_bounds,
    count_inversions_fast,
    count_inversions_naive,
    ell1_loss,
    harmonic,
    summarize_errors,
)
from .policies import (
    POLICY_NAMES,
    Belady,
    BlindOracle,
    CacheEntry,
    CacheState,
    LRU,
    Marker,
    Policy,
    RunResult,
    make_policy,
    run_policy,
)
from .trace import (
    NoiseSpec,
    PageId,
    Trace,
    WorkloadSpec,
    generate_workload,
    next_arrivals,
    parse_trace,
    perturb_predictions,
    synthesize,
    write_trace,
)

__version__ = "0.1.0"
