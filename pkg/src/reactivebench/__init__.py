"""reactivebench: a fine-grained signal runtime, two baseline reactivity
runtimes, and a deterministic benchmark harness with a statistics kernel."""

from .live import LiveCounts
from .observables import ClosedSubjectError, ObservableContext, Subject, Subscription
from .scenarios import (
    DagDescription,
    InvalidScenarioError,
    RUNTIMES,
    ScenarioSpec,
    TOPOLOGIES,
    build,
    evaluate_dag,
    final_source_values,
    generate,
    load_scenario,
    oracle,
    random_script,
    run_repeated,
    run_script,
)
from .signals import (
    ALWAYS_CHANGED,
    VALUE_EQUALITY,
    Counters,
    CycleError,
    DanglingNodeError,
    DisposedScopeError,
    NodeKind,
    NonConvergenceError,
    ReactiveError,
    ReactiveGraph,
    Scope,
    StabilizationStats,
    WriteDuringComputeError,
    WriteToComputedError,
)
from .stats import (
    MetricSpec,
    PropagationEfficiency,
    bh_adjust,
    bootstrap_ci,
    budget_score,
    classical_rank_sum_p,
    cliffs_d,
    object_ratio,
    perf_score,
    propagation_efficiency,
    rank_sum_p,
    scaling_fit,
    summarize,
    tradeoff_score,
)
from .store import MemoSelector, Store, StoreSubscription
from .trace import RunTrace, TraceSample

__version__ = "0.1.0"
