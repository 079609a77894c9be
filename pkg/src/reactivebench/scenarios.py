"""Declarative dataflow scenarios realized on all three runtimes.

A :class:`ScenarioSpec` names a topology, a size, a seed, and an update
script. :func:`generate` expands it into a concrete DAG description (edges,
per-node constants, initial source values) that is identical for a given
(seed, parameters) pair. :func:`build` realizes that DAG on the signal
runtime, the observable baseline, or the store baseline; the three builds
are isomorphic in node and edge counts. :func:`oracle` evaluates the DAG
directly from final source values, independent of any runtime code path.

Topologies
----------
``chain``           n nodes in a line; node 0 is the source.
``fan_out``         one source feeding n-1 sibling nodes.
``diamond_ladder``  d stacked diamonds (two branches re-joining), 1+3d nodes;
                    the topology that separates glitch-free propagation from
                    depth-first re-emission.
``combine_ladder``  n sources folded pairwise into a chain of n-1 two-input
                    joins (2n-1 nodes); updating every source once is the
                    canonical quadratic workload for eager observables.
``random_dag``      seeded layered DAG: a tree backbone plus a bounded number
                    of extra forward edges, in-degree capped at 2 so every
                    node maps onto the binary combine operator.

Node values are integers: a source holds its written value, a derived node
computes sum(parents) + constant.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from typing import Any

from .live import LiveCounts
from .observables import ObservableContext, Subject
from .signals import ReactiveGraph
from .store import MemoSelector, Store
from .trace import RunTrace, TraceSample

__all__ = [
    "DagDescription",
    "InvalidScenarioError",
    "RUNTIMES",
    "ScenarioSpec",
    "TOPOLOGIES",
    "build",
    "evaluate_dag",
    "final_source_values",
    "generate",
    "load_scenario",
    "oracle",
    "random_script",
    "run_repeated",
    "run_script",
]

TOPOLOGIES = ("chain", "fan_out", "diamond_ladder", "combine_ladder", "random_dag")
RUNTIMES = ("signals", "observables", "store")


class InvalidScenarioError(ValueError):
    """Bad scenario parameters or a malformed scenario file."""


_SCENARIO_FIELDS = {"topology", "n", "d", "seed", "script", "repetitions"}


@dataclass(frozen=True)
class ScenarioSpec:
    topology: str
    n: int = 0
    d: int = 0
    seed: int = 0
    script: tuple[tuple[int, int], ...] = ()
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise InvalidScenarioError(f"unknown topology {self.topology!r}")
        if self.topology == "chain" and self.n < 1:
            raise InvalidScenarioError("chain requires n >= 1")
        if self.topology in ("fan_out", "combine_ladder") and self.n < 2:
            raise InvalidScenarioError(f"{self.topology} requires n >= 2")
        if self.topology == "random_dag" and self.n < 1:
            raise InvalidScenarioError("random_dag requires n >= 1")
        if self.topology == "diamond_ladder" and self.d < 1:
            raise InvalidScenarioError("diamond_ladder requires d >= 1")
        if self.repetitions < 1:
            raise InvalidScenarioError("repetitions must be >= 1")
        object.__setattr__(self, "script", tuple((int(i), int(v)) for i, v in self.script))

    def to_dict(self) -> dict[str, Any]:
        return {
            "topology": self.topology,
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "script": [list(u) for u in self.script],
            "repetitions": self.repetitions,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        if not isinstance(data, dict):
            raise InvalidScenarioError("scenario must be a JSON object")
        unknown = set(data) - _SCENARIO_FIELDS
        if unknown:
            raise InvalidScenarioError(f"unknown scenario fields: {sorted(unknown)}")
        if "topology" not in data:
            raise InvalidScenarioError("scenario is missing required field 'topology'")
        for key in ("n", "d", "seed", "repetitions"):
            if key in data and not isinstance(data[key], int):
                raise InvalidScenarioError(f"field {key!r} must be an integer")
        script = data.get("script", [])
        if not isinstance(script, list):
            raise InvalidScenarioError("field 'script' must be a list of [index, value] pairs")
        parsed: list[tuple[int, int]] = []
        for entry in script:
            if (
                not isinstance(entry, (list, tuple))
                or len(entry) != 2
                or not all(isinstance(x, int) for x in entry)
            ):
                raise InvalidScenarioError(f"bad script entry {entry!r}; expected [index, value]")
            parsed.append((entry[0], entry[1]))
        return cls(
            topology=data["topology"],
            n=data.get("n", 0),
            d=data.get("d", 0),
            seed=data.get("seed", 0),
            script=tuple(parsed),
            repetitions=data.get("repetitions", 1),
        )

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_scenario(path: str) -> ScenarioSpec:
    """Load and validate a scenario JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return ScenarioSpec.from_dict(data)


@dataclass(frozen=True)
class DagDescription:
    """Concrete expansion of a scenario: structure plus seeded constants."""

    parents: tuple[tuple[int, ...], ...]
    constants: tuple[int, ...]
    initials: tuple[int, ...]
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    terminal: int

    @property
    def node_count(self) -> int:
        return len(self.parents)

    @property
    def edge_count(self) -> int:
        return sum(len(p) for p in self.parents)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, k) for k, ps in enumerate(self.parents) for p in ps]

    @property
    def max_out_degree(self) -> int:
        out = [0] * self.node_count
        for ps in self.parents:
            for p in ps:
                out[p] += 1
        return max(out, default=0)


def _structure(spec: ScenarioSpec) -> tuple[list[tuple[int, ...]], random.Random]:
    rng = random.Random(spec.seed)
    if spec.topology == "chain":
        parents: list[tuple[int, ...]] = [() if k == 0 else (k - 1,) for k in range(spec.n)]
    elif spec.topology == "fan_out":
        parents = [() if k == 0 else (0,) for k in range(spec.n)]
    elif spec.topology == "diamond_ladder":
        parents = [()]
        for level in range(1, spec.d + 1):
            prev_join = 3 * (level - 1)
            a, b = 3 * level - 2, 3 * level - 1
            parents.append((prev_join,))  # a
            parents.append((prev_join,))  # b
            parents.append((a, b))  # join
    elif spec.topology == "combine_ladder":
        w = spec.n
        parents = [() for _ in range(w)]
        parents.append((0, 1))
        for i in range(2, w):
            parents.append((w + i - 2, i))
    else:  # random_dag
        n = spec.n
        n_sources = min(n, 1 + n // 50)
        parents = [() for _ in range(n_sources)]
        for k in range(n_sources, n):
            parents.append((rng.randrange(0, k),))
        # A bounded number of extra forward edges keeps observable re-emission
        # cascades from compounding exponentially while still exercising joins.
        for _ in range(min(6, n // 10)):
            for _attempt in range(20):
                v = rng.randrange(n_sources, n) if n > n_sources else None
                if v is None:
                    break
                u = rng.randrange(0, v)
                if len(parents[v]) >= 2 or u in parents[v]:
                    continue
                parents[v] = tuple(sorted(parents[v] + (u,)))
                break
    return parents, rng


def generate(spec: ScenarioSpec) -> DagDescription:
    """Expand a spec into a deterministic DAG description.

    Identical (seed, parameters) produce identical structure, constants, and
    initial values. Script source indexes are validated against the
    generated source list.
    """
    parents, rng = _structure(spec)
    constants: list[int] = []
    initials: list[int] = []
    for ps in parents:
        if ps:
            constants.append(rng.randint(-10, 10))
            initials.append(0)
        else:
            constants.append(0)
            initials.append(rng.randint(0, 99))
    sources = tuple(k for k, ps in enumerate(parents) if not ps)
    has_child = [False] * len(parents)
    for ps in parents:
        for p in ps:
            has_child[p] = True
    sinks = tuple(k for k, c in enumerate(has_child) if not c)
    for idx, _value in spec.script:
        if not 0 <= idx < len(sources):
            raise InvalidScenarioError(
                f"script source index {idx} out of range (scenario has {len(sources)} sources)"
            )
    return DagDescription(
        parents=tuple(parents),
        constants=tuple(constants),
        initials=tuple(initials),
        sources=sources,
        sinks=sinks,
        terminal=len(parents) - 1,
    )


def random_script(dag: DagDescription, length: int, seed: int) -> tuple[tuple[int, int], ...]:
    """Deterministic script: seeded source positions and values."""
    rng = random.Random(seed)
    return tuple(
        (rng.randrange(len(dag.sources)), rng.randint(0, 999)) for _ in range(length)
    )


# -- oracle ---------------------------------------------------------------


def evaluate_dag(dag: DagDescription, source_values: dict[int, int]) -> list[int]:
    """Evaluate every node directly from source values in one forward pass.

    ``source_values`` maps source position (index into ``dag.sources``) to
    value. Parents always precede children by construction, so a single
    index-ordered sweep is a memoized recursion.
    """
    by_node = {dag.sources[pos]: v for pos, v in source_values.items()}
    values = [0] * dag.node_count
    for k, ps in enumerate(dag.parents):
        if not ps:
            values[k] = by_node.get(k, dag.initials[k])
        else:
            values[k] = sum(values[p] for p in ps) + dag.constants[k]
    return values


def final_source_values(spec: ScenarioSpec, dag: DagDescription) -> dict[int, int]:
    """Source values after the whole script has been applied."""
    values = {pos: dag.initials[node] for pos, node in enumerate(dag.sources)}
    for pos, value in spec.script:
        values[pos] = value
    return values


def oracle(spec: ScenarioSpec, source_values: dict[int, int] | None = None) -> int:
    """Terminal value from direct DAG evaluation, independent of any runtime.

    With ``source_values`` omitted, evaluates at the post-script state.
    """
    dag = generate(spec)
    if source_values is None:
        source_values = final_source_values(spec, dag)
    return evaluate_dag(dag, source_values)[dag.terminal]


# -- runtime builds -------------------------------------------------------


class SignalsInstance:
    """Scenario realized on the signal runtime: one effect per sink.

    Passing ``graph`` builds into a child scope of an existing graph, which
    is how repeated build/dispose cycles against one long-lived graph are
    exercised.
    """

    runtime = "signals"

    def __init__(self, spec: ScenarioSpec, dag: DagDescription, graph: ReactiveGraph | None = None):
        self.dag = dag
        self.graph = graph if graph is not None else ReactiveGraph()
        self.scope = self.graph.create_scope()
        self.observed: dict[int, int] = {}
        g = self.graph
        read = g.read
        ids: list[int] = []
        for k, ps in enumerate(dag.parents):
            if not ps:
                ids.append(g.create_signal(self.scope, dag.initials[k]))
                continue
            const = dag.constants[k]
            if len(ps) == 1:
                fn = lambda a=ids[ps[0]], c=const: read(a) + c
            elif len(ps) == 2:
                fn = lambda a=ids[ps[0]], b=ids[ps[1]], c=const: read(a) + read(b) + c
            else:
                dep_ids = tuple(ids[p] for p in ps)
                fn = lambda deps=dep_ids, c=const: sum(read(d) for d in deps) + c
            ids.append(g.create_computed(self.scope, fn))
        self.node_ids = ids
        self.effect_ids = [
            g.create_effect(
                self.scope,
                lambda s=sink, nid=ids[sink]: self.observed.__setitem__(s, g.read(nid)),
            )
            for sink in dag.sinks
        ]

    @property
    def node_count(self) -> int:
        return self.dag.node_count

    @property
    def edge_count(self) -> int:
        return self.dag.edge_count

    def terminal_value(self) -> int:
        return self.graph.read(self.node_ids[self.dag.terminal])

    def apply_update(self, source_pos: int, value: int) -> None:
        self.graph.write(self.node_ids[self.dag.sources[source_pos]], value)

    def work_total(self) -> int:
        return self.graph.counters.recomputations

    def notifications_total(self) -> int:
        return self.graph.counters.effect_runs

    def live_counts(self) -> LiveCounts:
        return self.graph.live_counts()

    def dispose(self) -> None:
        self.graph.dispose(self.scope)


class ObservablesInstance:
    """Scenario realized on eager observable chains."""

    runtime = "observables"

    def __init__(self, spec: ScenarioSpec, dag: DagDescription, ctx: ObservableContext | None = None):
        self.dag = dag
        self.ctx = ctx if ctx is not None else ObservableContext()
        self.observed: dict[int, int] = {}
        subjects: list[Subject] = []
        for k, ps in enumerate(dag.parents):
            const = dag.constants[k]
            if not ps:
                subjects.append(self.ctx.subject(dag.initials[k]))
            elif len(ps) == 1:
                subjects.append(self.ctx.map(subjects[ps[0]], lambda v, c=const: v + c))
            elif len(ps) == 2:
                subjects.append(
                    self.ctx.combine(
                        subjects[ps[0]], subjects[ps[1]], lambda x, y, c=const: x + y + c
                    )
                )
            else:  # pragma: no cover - generator caps in-degree at 2
                raise InvalidScenarioError("observable build supports at most 2 parents per node")
        self.subjects = subjects
        self.consumer_subs = [
            subjects[sink].subscribe(lambda v, s=sink: self.observed.__setitem__(s, v))
            for sink in dag.sinks
        ]

    @property
    def node_count(self) -> int:
        return self.dag.node_count

    @property
    def edge_count(self) -> int:
        return self.dag.edge_count

    def terminal_value(self) -> int:
        return self.subjects[self.dag.terminal].value

    def apply_update(self, source_pos: int, value: int) -> None:
        self.subjects[self.dag.sources[source_pos]].next(value)

    def work_total(self) -> int:
        return self.ctx.emissions

    def notifications_total(self) -> int:
        return self.ctx.notifications

    def live_counts(self) -> LiveCounts:
        return self.ctx.live_counts()

    def dispose(self) -> None:
        for sub in self.consumer_subs:
            sub.unsubscribe()
        for subject in reversed(self.subjects):
            self.ctx.dispose_subject(subject)


class StoreInstance:
    """Scenario realized on the store: composed ref-memoized selectors."""

    runtime = "store"

    def __init__(self, spec: ScenarioSpec, dag: DagDescription):
        self.dag = dag
        self.observed: dict[int, int] = {}
        initial_state = {node: dag.initials[node] for node in dag.sources}

        def reducer(state: dict[int, int], action: tuple[int, int]) -> dict[int, int]:
            node, value = action
            if state[node] == value:
                return state
            new_state = dict(state)
            new_state[node] = value
            return new_state

        # Composed selectors are evaluated in dependency order on every new
        # snapshot (see Store.on_new_snapshot), so the demand-driven calls in
        # each projection always hit the memo and recursion stays shallow even
        # for very deep chains.
        self.store = Store(initial_state, reducer, on_new_snapshot=self._warm_selectors)
        selectors: dict[int, MemoSelector] = {}
        self._derived_order: list[int] = []
        for k, ps in enumerate(dag.parents):
            if not ps:
                continue
            const = dag.constants[k]
            inputs = tuple(
                (("leaf", p) if not dag.parents[p] else ("sel", selectors[p])) for p in ps
            )
            selectors[k] = self.store.selector(_store_projection(inputs, const))
            self._derived_order.append(k)
        self.selectors = selectors
        self._derived_count = len(selectors)
        self._warm_selectors(self.store.state)
        self.consumer_subs = []
        for sink in dag.sinks:
            sel = selectors.get(sink)
            if sel is None:  # a source with no children still gets a consumer
                sel = self.store.selector(lambda state, p=sink: state[p])
            self.consumer_subs.append(
                self.store.subscribe(sel, lambda v, s=sink: self.observed.__setitem__(s, v))
            )
        self._disposed = False

    def _warm_selectors(self, state: dict[int, int]) -> None:
        for k in self._derived_order:
            self.selectors[k].evaluate(state)

    @property
    def node_count(self) -> int:
        return self.dag.node_count

    @property
    def edge_count(self) -> int:
        return self.dag.edge_count

    def terminal_value(self) -> int:
        terminal = self.dag.terminal
        if terminal in self.selectors:
            return self.selectors[terminal].evaluate(self.store.state)
        return self.store.state[terminal]

    def apply_update(self, source_pos: int, value: int) -> None:
        self.store.dispatch((self.dag.sources[source_pos], value))

    def work_total(self) -> int:
        return self.store.selector_eval_total()

    def notifications_total(self) -> int:
        return self.store.check_count

    def live_counts(self) -> LiveCounts:
        if self._disposed:
            return LiveCounts()
        return LiveCounts(
            nodes=len(self.store.state) + self._derived_count + len(self.store.history),
            edges=self.dag.edge_count,
            effects=0,
            subscriptions=self.store.subscription_count(),
        )

    def dispose(self) -> None:
        for sub in self.consumer_subs:
            sub.unsubscribe()
        self.store.history.clear()
        self._disposed = True


ScenarioInstance = SignalsInstance | ObservablesInstance | StoreInstance


def build(runtime: str, spec: ScenarioSpec, dag: DagDescription | None = None) -> ScenarioInstance:
    """Realize a scenario on one runtime. All runtimes build the same DAG."""
    if dag is None:
        dag = generate(spec)
    if runtime == "signals":
        return SignalsInstance(spec, dag)
    if runtime == "observables":
        return ObservablesInstance(spec, dag)
    if runtime == "store":
        return StoreInstance(spec, dag)
    raise InvalidScenarioError(f"unknown runtime {runtime!r}")


def run_script(instance: ScenarioInstance, spec: ScenarioSpec) -> RunTrace:
    """Apply the script in order, recording one sample per update."""
    samples: list[TraceSample] = []
    for update_index, (source_pos, value) in enumerate(spec.script):
        work_before = instance.work_total()
        notif_before = instance.notifications_total()
        started = time.perf_counter()
        instance.apply_update(source_pos, value)
        elapsed = time.perf_counter() - started
        samples.append(
            TraceSample(
                update_index=update_index,
                work=instance.work_total() - work_before,
                notifications=instance.notifications_total() - notif_before,
                elapsed_s=elapsed,
                live=instance.live_counts(),
            )
        )
    return RunTrace(
        runtime=instance.runtime,
        spec_digest=spec.digest(),
        samples=tuple(samples),
        terminal_value=instance.terminal_value(),
        final_live=instance.live_counts(),
        cumulative_work=instance.work_total(),
        cumulative_notifications=instance.notifications_total(),
    )


def run_repeated(runtime: str, spec: ScenarioSpec, repetitions: int) -> RunTrace:
    """Run ``repetitions`` fresh builds of the scenario and merge the samples.

    Counter fields repeat identically across repetitions; only elapsed times
    vary. Instances are disposed between repetitions.
    """
    dag = generate(spec)
    merged: list[TraceSample] = []
    terminal = evaluate_dag(dag, {pos: dag.initials[n] for pos, n in enumerate(dag.sources)})[
        dag.terminal
    ]
    final_live = LiveCounts()
    work = notifications = 0
    for _rep in range(repetitions):
        instance = build(runtime, spec, dag)
        trace = run_script(instance, spec)
        merged.extend(trace.samples)
        terminal = trace.terminal_value
        final_live = trace.final_live
        work += trace.cumulative_work
        notifications += trace.cumulative_notifications
        instance.dispose()
    return RunTrace(
        runtime=runtime,
        spec_digest=spec.digest(),
        samples=tuple(merged),
        terminal_value=terminal,
        final_live=final_live,
        cumulative_work=work,
        cumulative_notifications=notifications,
    )
