"""Report assembly: traces in, JSON/CSV summaries out.

A report is a plain nested dict (schema below) so it serializes directly.
Counter-derived fields are deterministic functions of (scenario, seed); every
wall-clock-derived value lives under a ``"timing"`` key so
:func:`strip_timing` can produce the byte-stable core.

Schema (version 1)::

    schema_version: int
    scenario:   spec echo + structure (node/edge counts, max out-degree,
                2kn/m bound when defined)
    config:     runtimes, repetitions, seed, weights
    runtimes:   per runtime -> samples {work, notifications, live_objects},
                totals, metrics (summary stats per metric), final_live,
                terminal_value, oracle_match, timing {elapsed_us, summary,
                propagation_efficiency}
    pairwise:   per runtime pair -> per metric -> {r, p, p_classical, p_bh,
                cliffs_d, bootstrap_ci}
    composite:  perf_score per runtime, tradeoff per runtime, budget
    oracle:     terminal_value, all_match
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from typing import Any

from . import stats
from .scenarios import DagDescription, ScenarioSpec, generate, oracle
from .trace import RunTrace

__all__ = [
    "IncompatibleReportError",
    "METRIC_SAMPLE_KEYS",
    "SCHEMA_VERSION",
    "build_report",
    "compare_reports",
    "report_to_csv",
    "report_to_json",
    "strip_timing",
]

SCHEMA_VERSION = 1

# metric name -> key under runtimes.<rt>.samples
METRIC_SAMPLE_KEYS = {
    "work_per_update": "work",
    "notifications_per_update": "notifications",
    "live_objects": "live_objects",
}


class IncompatibleReportError(ValueError):
    """Raised when reports under comparison share no metric names."""


def _metric_specs(weights: dict[str, Any] | None) -> dict[str, stats.MetricSpec]:
    configured = (weights or {}).get("metrics", {})
    specs: dict[str, stats.MetricSpec] = {}
    for name in METRIC_SAMPLE_KEYS:
        entry = configured.get(name, {})
        specs[name] = stats.MetricSpec(
            name=name,
            baseline=float(entry.get("baseline", 0.0)),
            weight=float(entry.get("weight", 1.0)),
        )
    return specs


def _runtime_section(trace: RunTrace, dag: DagDescription, expected_terminal: int) -> dict:
    work = trace.work_samples()
    notifications = trace.notification_samples()
    live_objects = trace.live_object_samples()
    elapsed = trace.elapsed_samples()
    metrics = {}
    if work:
        metrics = {
            "work_per_update": stats.summarize(work),
            "notifications_per_update": stats.summarize(notifications),
            "live_objects": stats.summarize(live_objects),
        }
    timing: dict[str, Any] = {
        "elapsed_us": [dt * 1e6 for dt in elapsed],
        "total_elapsed_s": sum(elapsed),
        "elapsed_summary_us": stats.summarize([dt * 1e6 for dt in elapsed]) if elapsed else {},
        "propagation_efficiency": None,
    }
    total_elapsed = sum(elapsed)
    if work and total_elapsed > 0 and dag.edge_count > 0:
        eff = stats.propagation_efficiency(
            work,
            total_elapsed,
            k=dag.max_out_degree,
            n=dag.node_count,
            m=dag.edge_count,
        )
        timing["propagation_efficiency"] = asdict(eff)
    return {
        "samples": {
            "work": work,
            "notifications": notifications,
            "live_objects": live_objects,
        },
        "totals": {
            "work": trace.cumulative_work,
            "notifications": trace.cumulative_notifications,
            "work_in_samples": trace.work_total(),
            "notifications_in_samples": trace.notifications_total(),
        },
        "metrics": metrics,
        "final_live": trace.final_live.as_dict(),
        "terminal_value": trace.terminal_value,
        "oracle_match": trace.terminal_value == expected_terminal,
        "timing": timing,
    }


def _pairwise_section(
    sections: dict[str, dict], seed: int, bootstrap_iters: int
) -> dict[str, dict]:
    names = sorted(sections)
    pairwise: dict[str, dict] = {}
    p_refs: list[tuple[str, str]] = []  # (pair key, metric) in insertion order
    p_values: list[float] = []
    pair_index = 0
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            key = f"{a}_vs_{b}"
            entry: dict[str, dict] = {}
            for metric, sample_key in METRIC_SAMPLE_KEYS.items():
                xs = sections[a]["samples"][sample_key]
                ys = sections[b]["samples"][sample_key]
                if not xs or not ys:
                    continue
                r, p = stats.rank_sum_p(xs, ys)
                ci = stats.bootstrap_ci(
                    stats.mean_difference,
                    xs,
                    ys,
                    iters=bootstrap_iters,
                    seed=seed + 7919 * pair_index,
                )
                entry[metric] = {
                    "r": r,
                    "p": p,
                    "p_classical": stats.classical_rank_sum_p(xs, ys),
                    "p_bh": None,
                    "cliffs_d": stats.cliffs_d(xs, ys),
                    "bootstrap_ci": list(ci),
                }
                p_refs.append((key, metric))
                p_values.append(p)
                pair_index += 1
            if entry:
                pairwise[key] = entry
    if p_values:
        adjusted = stats.bh_adjust(p_values)
        for (key, metric), adj in zip(p_refs, adjusted):
            pairwise[key][metric]["p_bh"] = adj
    return pairwise


def _composite_section(
    sections: dict[str, dict], specs: dict[str, stats.MetricSpec]
) -> dict[str, Any]:
    perf: dict[str, float] = {}
    for name, section in sections.items():
        if not section["metrics"]:
            continue
        measurements = [
            (section["metrics"][metric]["mean"], specs[metric]) for metric in METRIC_SAMPLE_KEYS
        ]
        perf[name] = stats.perf_score(measurements)
    tradeoff: dict[str, dict[str, float]] | None = None
    budget = None
    scored = [name for name in sections if sections[name]["metrics"]]
    if len(scored) >= 2:
        work_means = {n: sections[n]["metrics"]["work_per_update"]["mean"] for n in scored}
        subs = {n: sections[n]["final_live"]["subscriptions"] for n in scored}
        objects = {
            n: sections[n]["final_live"]["nodes"]
            + sections[n]["final_live"]["edges"]
            + sections[n]["final_live"]["subscriptions"]
            for n in scored
        }

        def minmax(values: dict[str, float]) -> dict[str, float]:
            lo, hi = min(values.values()), max(values.values())
            if hi == lo:
                return {n: 0.5 for n in values}
            return {n: (v - lo) / (hi - lo) for n, v in values.items()}

        work_mm, subs_mm, obj_mm = minmax(work_means), minmax(subs), minmax(objects)
        tradeoff = {}
        for n in scored:
            performance = 1.0 - work_mm[n]
            experience = 1.0 - subs_mm[n]
            complexity = 0.5 + obj_mm[n]
            tradeoff[n] = {
                "performance": performance,
                "experience": experience,
                "complexity": complexity,
                "score": stats.tradeoff_score(performance, experience, complexity),
            }
        if all(rt in tradeoff for rt in ("signals", "store", "observables")):
            budget = stats.budget_score(
                tradeoff["signals"]["score"],
                tradeoff["store"]["score"],
                tradeoff["observables"]["score"],
            )
    return {"perf_score": perf, "tradeoff": tradeoff, "budget": budget}


def build_report(
    spec: ScenarioSpec,
    traces: dict[str, RunTrace],
    *,
    seed: int = 0,
    repetitions: int = 1,
    weights: dict[str, Any] | None = None,
    bootstrap_iters: int = 10_000,
) -> dict:
    """Aggregate runtime traces for one scenario into a report dict."""
    dag = generate(spec)
    expected = oracle(spec)
    sections = {
        name: _runtime_section(trace, dag, expected) for name, trace in traces.items()
    }
    specs = _metric_specs(weights)
    scenario_info = dict(spec.to_dict())
    scenario_info.pop("script")
    scenario_info.update(
        {
            "script_length": len(spec.script),
            "digest": spec.digest(),
            "node_count": dag.node_count,
            "edge_count": dag.edge_count,
            "max_out_degree": dag.max_out_degree,
            "source_count": len(dag.sources),
            "sink_count": len(dag.sinks),
            "bound_2kn_over_m": (
                2 * dag.max_out_degree * dag.node_count / dag.edge_count
                if dag.edge_count
                else None
            ),
        }
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario_info,
        "config": {
            "runtimes": sorted(traces),
            "repetitions": repetitions,
            "seed": seed,
            "weights": weights,
        },
        "runtimes": sections,
        "pairwise": _pairwise_section(sections, seed, bootstrap_iters),
        "composite": _composite_section(sections, specs),
        "oracle": {
            "terminal_value": expected,
            "all_match": all(s["oracle_match"] for s in sections.values()),
        },
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def report_to_csv(report: dict) -> str:
    """Flat summary: one row per runtime x metric (timing rows included,
    marked by the elapsed_us metric name)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["runtime", "metric", "mean", "std", "min", "max", "p50", "p90", "p99"])
    for runtime in sorted(report["runtimes"]):
        section = report["runtimes"][runtime]
        for metric in sorted(section["metrics"]):
            row = section["metrics"][metric]
            writer.writerow(
                [runtime, metric]
                + [row[k] for k in ("mean", "std", "min", "max", "p50", "p90", "p99")]
            )
        summary = section["timing"].get("elapsed_summary_us")
        if summary:
            writer.writerow(
                [runtime, "elapsed_us"]
                + [summary[k] for k in ("mean", "std", "min", "max", "p50", "p90", "p99")]
            )
    return buf.getvalue()


def strip_timing(obj: Any) -> Any:
    """Recursively drop every ``"timing"`` key; the remainder is the
    deterministic core of a report."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "timing"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def compare_reports(reports: list[tuple[str, dict]], *, seed: int = 0) -> dict:
    """Merge two or more reports into one pairwise comparison table.

    Every (report, runtime) section is one comparison entry; entries are
    compared pairwise on the metric names shared by ALL entries, with a
    single Benjamini-Hochberg pass over the pooled p values.
    """
    if len(reports) < 2:
        raise IncompatibleReportError("compare requires at least two reports")
    entries: dict[str, dict] = {}
    for index, (label, report) in enumerate(reports, start=1):
        if "runtimes" not in report:
            raise IncompatibleReportError(f"report {label!r} has no runtime sections")
        for runtime, section in report["runtimes"].items():
            key = f"{label}:{runtime}"
            if key in entries:
                key = f"{label}#{index}:{runtime}"
            entries[key] = section
    shared: set[str] | None = None
    for section in entries.values():
        present = {m for m in section.get("metrics", {})}
        shared = present if shared is None else shared & present
    if not shared:
        raise IncompatibleReportError("reports share no metric names")
    names = sorted(entries)
    rows: list[dict[str, Any]] = []
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            for metric in sorted(shared):
                xs = entries[a]["samples"][METRIC_SAMPLE_KEYS[metric]]
                ys = entries[b]["samples"][METRIC_SAMPLE_KEYS[metric]]
                r, p = stats.rank_sum_p(xs, ys)
                rows.append(
                    {
                        "left": a,
                        "right": b,
                        "metric": metric,
                        "r": r,
                        "p": p,
                        "cliffs_d": stats.cliffs_d(xs, ys),
                        "left_total": sum(xs),
                        "right_total": sum(ys),
                    }
                )
    adjusted = stats.bh_adjust([row["p"] for row in rows])
    for row, adj in zip(rows, adjusted):
        row["p_bh"] = adj
    return {
        "schema_version": SCHEMA_VERSION,
        "entries": names,
        "entry_totals": {name: dict(entries[name]["totals"]) for name in names},
        "metrics": sorted(shared),
        "comparisons": rows,
    }
