"""Statistics kernel and composite scoring for benchmark traces.

Implements the quantitative toolkit the harness reports with: propagation
efficiency with its structural bound, weighted composite scoring, a
rank-sum significance test (normalized-statistic form, with a classical
normal-approximation p alongside), Cliff's d effect sizes, seeded bootstrap
percentile intervals, Benjamini-Hochberg adjustment, tradeoff and budget
scores, log-log scaling-exponent fits, and live-object ratios.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .live import LiveCounts

__all__ = [
    "MetricSpec",
    "PropagationEfficiency",
    "bh_adjust",
    "bootstrap_ci",
    "budget_score",
    "classical_rank_sum_p",
    "cliffs_d",
    "object_ratio",
    "perf_score",
    "propagation_efficiency",
    "rank_sum_p",
    "scaling_fit",
    "summarize",
    "tradeoff_score",
]


def summarize(samples: Sequence[float]) -> dict[str, float]:
    """Mean/std and order statistics for one metric's samples."""
    if len(samples) == 0:
        raise ValueError("cannot summarize an empty sample")
    arr = np.asarray(samples, dtype=float)
    p50, p90, p99 = np.percentile(arr, [50, 90, 99])
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=0)),
        "min": float(arr.min()),
        "max": float(arr.max()),
        "p50": float(p50),
        "p90": float(p90),
        "p99": float(p99),
    }


# -- rank-based significance ------------------------------------------------


def _midranks(pooled: Sequence[float]) -> list[float]:
    order = sorted(range(len(pooled)), key=lambda i: pooled[i])
    ranks = [0.0] * len(pooled)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pooled[order[j + 1]] == pooled[order[i]]:
            j += 1
        midrank = (i + j) / 2 + 1  # 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks


def rank_sum_p(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Two-tailed rank-sum test in normalized-statistic form.

    The Wilcoxon rank sum of ``x`` within the pooled midranking is shifted
    and scaled to ``r`` in [0, n] (n = pooled size), so r/n is the tie-aware
    probability estimate that an x sample exceeds a y sample. The p value is
    ``2 * min(r/n, 1 - r/n)`` clipped to [0, 1]: identical samples give
    r/n = 0.5 and p = 1, complete separation gives p = 0. The statistic is
    rank-based, hence invariant under strictly monotone transforms and
    symmetric under swapping the samples. See classical_rank_sum_p for the
    conventional normal-approximation companion.
    """
    mx, my = len(x), len(y)
    if mx == 0 or my == 0:
        raise ValueError("rank_sum_p requires both samples to be nonempty")
    pooled = list(x) + list(y)
    ranks = _midranks(pooled)
    w = sum(ranks[:mx])
    u = w - mx * (mx + 1) / 2
    n = mx + my
    r = n * u / (mx * my)
    p = 2 * min(r / n, 1 - r / n)
    return r, min(max(p, 0.0), 1.0)


def classical_rank_sum_p(x: Sequence[float], y: Sequence[float]) -> float:
    """Two-sided Wilcoxon/Mann-Whitney p via the tie-corrected normal
    approximation."""
    mx, my = len(x), len(y)
    if mx == 0 or my == 0:
        raise ValueError("classical_rank_sum_p requires nonempty samples")
    pooled = list(x) + list(y)
    ranks = _midranks(pooled)
    w = sum(ranks[:mx])
    u = w - mx * (mx + 1) / 2
    n = mx + my
    mean_u = mx * my / 2
    tie_counts: dict[float, int] = {}
    for v in pooled:
        tie_counts[v] = tie_counts.get(v, 0) + 1
    tie_term = sum(t**3 - t for t in tie_counts.values())
    var_u = mx * my / 12 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var_u <= 0:
        return 1.0
    z = (u - mean_u) / math.sqrt(var_u)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


def cliffs_d(x: Sequence[float], y: Sequence[float]) -> float:
    """Cliff's d: (#{x_i > y_j} - #{x_i < y_j}) / (|x| |y|), in [-1, 1]."""
    if len(x) == 0 or len(y) == 0:
        raise ValueError("cliffs_d requires both samples to be nonempty")
    xa = np.asarray(x, dtype=float)[:, None]
    ya = np.asarray(y, dtype=float)[None, :]
    greater = int(np.count_nonzero(xa > ya))
    less = int(np.count_nonzero(xa < ya))
    return (greater - less) / (len(x) * len(y))


def bootstrap_ci(
    statistic: Callable[[np.ndarray, np.ndarray], float],
    x: Sequence[float],
    y: Sequence[float],
    iters: int = 10_000,
    seed: int = 0,
    confidence: float = 0.95,
) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for a two-sample statistic.

    Both samples are resampled with replacement ``iters`` times; the interval
    is the central ``confidence`` mass of the resulting statistic
    distribution. Fixed seeds give bit-identical intervals.
    """
    if len(x) == 0 or len(y) == 0:
        raise ValueError("bootstrap_ci requires both samples to be nonempty")
    if iters < 1:
        raise ValueError("bootstrap_ci requires iters >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    values = np.empty(iters, dtype=float)
    for i in range(iters):
        xs = xa[rng.integers(0, len(xa), size=len(xa))]
        ys = ya[rng.integers(0, len(ya), size=len(ya))]
        values[i] = statistic(xs, ys)
    alpha = (1 - confidence) / 2
    lo, hi = np.percentile(values, [100 * alpha, 100 * (1 - alpha)])
    return float(lo), float(hi)


def mean_difference(x: np.ndarray, y: np.ndarray) -> float:
    """Difference of sample means; the default bootstrap statistic."""
    return float(np.mean(x) - np.mean(y))


def bh_adjust(pvals: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjustment.

    Returns adjusted p values in the input order; when the input is sorted
    ascending the output is monotone nondecreasing, and never exceeds 1.
    """
    m = len(pvals)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: pvals[i])
    adjusted = [0.0] * m
    running_min = 1.0
    for rank_pos in range(m - 1, -1, -1):
        idx = order[rank_pos]
        candidate = pvals[idx] * m / (rank_pos + 1)
        running_min = min(running_min, candidate)
        adjusted[idx] = min(running_min, 1.0)
    return adjusted


# -- composite scores -------------------------------------------------------


@dataclass(frozen=True)
class MetricSpec:
    """Baseline and importance weight for one scored metric."""

    name: str
    baseline: float = 0.0
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.weight <= 0:
            raise ValueError(f"metric {self.name!r} requires a positive weight")


def perf_score(measurements: Iterable[tuple[float, MetricSpec]]) -> float:
    """Weighted composite score: mean of (measured - baseline) / weight, x100."""
    terms = [(m, spec) for m, spec in measurements]
    if not terms:
        raise ValueError("perf_score requires at least one measurement")
    return sum((m - spec.baseline) / spec.weight for m, spec in terms) / len(terms) * 100.0


def tradeoff_score(performance: float, experience: float, complexity: float) -> float:
    """Architectural efficiency: performance x experience / complexity."""
    if complexity <= 0:
        raise ValueError("complexity must be positive")
    return performance * experience / complexity


def budget_score(signals: float, store: float, observables: float) -> float:
    """Weighted architecture budget over the three runtimes' scores."""
    for name, value in (("signals", signals), ("store", store), ("observables", observables)):
        if value < 0:
            raise ValueError(f"{name} score must be >= 0")
    return 1.2 * signals + 0.8 * store + 0.5 * observables


@dataclass(frozen=True)
class PropagationEfficiency:
    """Refreshes per second next to the structural bound 2kn/m."""

    value: float
    work_total: int
    elapsed_s: float
    k: int
    n: int
    m: int
    bound: float
    within_bound: bool


def propagation_efficiency(
    work: Sequence[int], elapsed_s: float, *, k: int, n: int, m: int
) -> PropagationEfficiency:
    """Total per-update refresh work divided by total update time.

    ``k`` is the max out-degree, ``n`` the node count, ``m`` the edge count
    of the scenario DAG; the reported bound is 2kn/m and ``within_bound``
    records whether the measured value stayed under it (informational, never
    asserted: the value is wall-clock dependent).
    """
    if elapsed_s <= 0:
        raise ValueError("elapsed_s must be positive")
    if k <= 0 or n <= 0 or m <= 0:
        raise ValueError("bound parameters k, n, m must be positive")
    total = int(sum(work))
    value = total / elapsed_s
    bound = 2 * k * n / m
    return PropagationEfficiency(
        value=value,
        work_total=total,
        elapsed_s=elapsed_s,
        k=k,
        n=n,
        m=m,
        bound=bound,
        within_bound=value <= bound,
    )


def scaling_fit(sizes: Sequence[float], counts: Sequence[float]) -> float:
    """Least-squares slope of log(count) against log(size).

    Recovers the exponent of a power-law relationship; needs at least three
    strictly positive points with non-degenerate sizes.
    """
    if len(sizes) < 3 or len(sizes) != len(counts):
        raise ValueError("scaling_fit requires >= 3 paired points")
    if any(s <= 0 for s in sizes) or any(c <= 0 for c in counts):
        raise ValueError("scaling_fit requires strictly positive data")
    log_sizes = np.log(np.asarray(sizes, dtype=float))
    log_counts = np.log(np.asarray(counts, dtype=float))
    if np.allclose(log_sizes, log_sizes[0]):
        raise ValueError("scaling_fit requires varying sizes")
    slope, _intercept = np.polyfit(log_sizes, log_counts, 1)
    return float(slope)


def object_ratio(a: LiveCounts, b: LiveCounts) -> float:
    """Ratio of total live objects (nodes + edges + subscriptions), a / b."""
    denom = b.object_total()
    if denom <= 0:
        raise ZeroDivisionError("denominator live counts are empty")
    return a.object_total() / denom
