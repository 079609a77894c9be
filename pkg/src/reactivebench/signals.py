"""Fine-grained reactive runtime: source signals, computed values, effects.

All state lives in a :class:`ReactiveGraph`. Sources are the only writable
cells, derived values are memoized pure functions of whatever they actually
read, and side effects are isolated in observer nodes that run in a separate
phase once every derived value is consistent.

Propagation is glitch-free. Each node carries a topological rank (strictly
greater than the rank of every dependency), dirty nodes are refreshed in
ascending rank order, and every affected node recomputes at most once per
stabilization. A recomputation whose result is judged equal to the previous
value under the node's equality policy cuts invalidation off on the spot:
nothing downstream is touched.

Dependency edges are discovered dynamically: after every evaluation the
stored dependency set is exactly the set of nodes read during that
evaluation, with stale edges pruned. Ranks are repaired incrementally when a
new read would violate the ordering; a repair that would cycle back to the
reading node raises :class:`CycleError` with the offending path.

Scopes own nodes and child scopes. Disposing a scope removes everything it
owns, which is why this runtime never retains an explicit subscription: the
live-count snapshot reports ``subscriptions == 0`` at all times.
"""

from __future__ import annotations

import heapq
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .live import LiveCounts

__all__ = [
    "ALWAYS_CHANGED",
    "VALUE_EQUALITY",
    "Counters",
    "CycleError",
    "DanglingNodeError",
    "DisposedScopeError",
    "NodeKind",
    "NonConvergenceError",
    "ReactiveError",
    "ReactiveGraph",
    "Scope",
    "StabilizationStats",
    "WriteDuringComputeError",
    "WriteToComputedError",
]


class ReactiveError(Exception):
    """Base class for reactive-graph errors."""


class DisposedScopeError(ReactiveError):
    """Raised when creating nodes or scopes under a disposed scope."""


class DanglingNodeError(ReactiveError):
    """Raised when a handle refers to a node that no longer exists."""


class WriteToComputedError(ReactiveError):
    """Raised when the target of a write is not a source signal."""


class WriteDuringComputeError(ReactiveError):
    """Raised when a computed evaluation tries to write a signal."""


class NonConvergenceError(ReactiveError):
    """Raised when effect-triggered write cascades never settle."""


class CycleError(ReactiveError):
    """Raised when a dependency cycle is detected.

    ``path`` lists the node ids along the offending cycle, ending where it
    started.
    """

    def __init__(self, path: list[int]):
        self.path = list(path)
        super().__init__("dependency cycle: " + " -> ".join(str(n) for n in self.path))


# An equality policy answers "is the new value unchanged?". Returning True
# suppresses downstream invalidation.
EqualityPolicy = Callable[[Any, Any], bool]


def VALUE_EQUALITY(old: Any, new: Any) -> bool:
    """Default policy: unchanged iff ``old == new``.

    Falls back to "changed" for payloads whose ``==`` does not produce a
    plain truth value (e.g. array-likes), which degrades gracefully to
    always-propagate for such types.
    """
    try:
        return bool(old == new)
    except Exception:
        return False


def ALWAYS_CHANGED(old: Any, new: Any) -> bool:
    """Policy that treats every write and recomputation as a change."""
    return False


class NodeKind(Enum):
    SOURCE = "source"
    COMPUTED = "computed"
    EFFECT = "effect"


@dataclass
class StabilizationStats:
    """Work performed by one stabilization pass."""

    recomputations: int = 0
    equality_cuts: int = 0
    effects_run: int = 0


@dataclass
class Counters:
    """Cumulative instrumentation for a graph instance."""

    recomputations: int = 0
    equality_cuts: int = 0
    effect_runs: int = 0
    stabilizations: int = 0

    def copy(self) -> "Counters":
        return Counters(
            self.recomputations, self.equality_cuts, self.effect_runs, self.stabilizations
        )


class Scope:
    """Ownership domain for nodes; disposing it disposes everything owned."""

    __slots__ = ("scope_id", "parent", "disposed", "_children", "_node_ids", "_graph")

    def __init__(self, scope_id: int, parent: "Scope | None", graph: "ReactiveGraph"):
        self.scope_id = scope_id
        self.parent = parent
        self.disposed = False
        self._children: list[Scope] = []
        self._node_ids: list[int] = []
        self._graph = graph

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Scope({self.scope_id}, disposed={self.disposed})"


class _Node:
    __slots__ = (
        "node_id",
        "kind",
        "scope",
        "order",
        "rank",
        "value",
        "version",
        "equals",
        "fn",
        "deps",
        "dep_versions",
        "subs",
        "dirty",
        "disposed",
        "recompute_count",
        "run_count",
    )

    def __init__(self, node_id: int, kind: NodeKind, scope: Scope, order: int):
        self.node_id = node_id
        self.kind = kind
        self.scope = scope
        self.order = order
        self.rank = 0
        self.value: Any = None
        self.version = 0
        self.equals: EqualityPolicy = VALUE_EQUALITY
        self.fn: Callable[[], Any] | None = None
        self.deps: set[int] = set()
        self.dep_versions: dict[int, int] = {}
        self.subs: set[int] = set()
        self.dirty = False
        self.disposed = False
        self.recompute_count = 0
        self.run_count = 0


class _Frame:
    __slots__ = ("node", "reads")

    def __init__(self, node: _Node):
        self.node = node
        self.reads: set[int] = set()


class ReactiveGraph:
    """A single-threaded reactive dependency graph.

    One graph instance and all its nodes are confined to one thread of
    execution; independent instances may run in parallel workers.
    """

    def __init__(self, max_write_cascades: int = 100):
        self._nodes: dict[int, _Node] = {}
        self._next_id = 0
        self._next_order = 0
        self._next_scope_id = 1
        self._dirty_heap: list[tuple[int, int]] = []  # (rank, node_id); stale entries skipped
        self._pending_effects: set[int] = set()
        self._queued_writes: list[tuple[int, Any]] = []
        self._deferred_disposals: list[Scope] = []
        self._eval_stack: list[_Frame] = []
        self._batch_depth = 0
        self._stabilizing = False
        self._active_stats: StabilizationStats | None = None
        self._edge_count = 0
        self._effect_count = 0
        self.max_write_cascades = max_write_cascades
        self.counters = Counters()
        #: node ids recomputed by the most recent stabilization, in order
        self.last_recompute_sequence: list[int] = []
        self.root_scope = Scope(0, None, self)

    # -- scopes ---------------------------------------------------------

    def create_scope(self, parent: Scope | None = None) -> Scope:
        parent = parent if parent is not None else self.root_scope
        self._check_scope(parent)
        scope = Scope(self._next_scope_id, parent, self)
        self._next_scope_id += 1
        parent._children.append(scope)
        return scope

    def dispose(self, scope: Scope) -> None:
        """Dispose a scope, its descendants, their nodes, and incident edges.

        Disposing an already-disposed scope is a no-op. During a
        stabilization the structural teardown is deferred to the end of the
        current phase; the owned nodes are immediately excluded from any
        further scheduling.
        """
        if scope.disposed:
            return
        if scope._graph is not self:
            raise ReactiveError("scope belongs to a different graph")
        self._mark_disposed(scope)
        if self._stabilizing:
            self._deferred_disposals.append(scope)
        else:
            self._teardown_scope(scope)

    def _mark_disposed(self, scope: Scope) -> None:
        scope.disposed = True
        for nid in scope._node_ids:
            node = self._nodes.get(nid)
            if node is not None:
                node.disposed = True
                node.dirty = False
                self._pending_effects.discard(nid)
        for child in scope._children:
            if not child.disposed:
                self._mark_disposed(child)

    def _teardown_scope(self, scope: Scope) -> None:
        for child in list(scope._children):
            self._teardown_scope(child)
        scope._children.clear()
        for nid in scope._node_ids:
            node = self._nodes.get(nid)
            if node is not None:
                self._remove_node(node)
        scope._node_ids.clear()
        if scope.parent is not None and scope in scope.parent._children:
            scope.parent._children.remove(scope)

    def _remove_node(self, node: _Node) -> None:
        for dep_id in node.deps:
            dep = self._nodes.get(dep_id)
            if dep is not None:
                dep.subs.discard(node.node_id)
        self._edge_count -= len(node.deps)
        node.deps.clear()
        node.dep_versions.clear()
        for sub_id in list(node.subs):
            sub = self._nodes.get(sub_id)
            if sub is not None and node.node_id in sub.deps:
                sub.deps.discard(node.node_id)
                sub.dep_versions.pop(node.node_id, None)
                self._edge_count -= 1
        node.subs.clear()
        if node.kind is NodeKind.EFFECT:
            self._effect_count -= 1
        del self._nodes[node.node_id]

    def _check_scope(self, scope: Scope) -> None:
        if scope._graph is not self:
            raise ReactiveError("scope belongs to a different graph")
        if scope.disposed:
            raise DisposedScopeError(f"scope {scope.scope_id} is disposed")

    # -- node creation --------------------------------------------------

    def _new_node(self, kind: NodeKind, scope: Scope) -> _Node:
        node = _Node(self._next_id, kind, scope, self._next_order)
        self._next_id += 1
        self._next_order += 1
        self._nodes[node.node_id] = node
        scope._node_ids.append(node.node_id)
        return node

    def create_signal(
        self, scope: Scope, initial: Any, equals: EqualityPolicy = VALUE_EQUALITY
    ) -> int:
        """Register a source signal with rank 0; readable immediately."""
        self._check_scope(scope)
        node = self._new_node(NodeKind.SOURCE, scope)
        node.value = initial
        node.version = 1
        node.equals = equals
        return node.node_id

    def create_computed(
        self, scope: Scope, fn: Callable[[], Any], equals: EqualityPolicy = VALUE_EQUALITY
    ) -> int:
        """Register a derived value and evaluate it once, eagerly.

        The eager evaluation records the dependency set and assigns the
        topological rank before any write can occur. Errors raised by ``fn``
        propagate and the half-registered node is removed.
        """
        self._check_scope(scope)
        node = self._new_node(NodeKind.COMPUTED, scope)
        node.fn = fn
        node.equals = equals
        try:
            node.value = self._evaluate(node)
        except BaseException:
            self._discard_creation(node)
            raise
        node.version = 1
        return node.node_id

    def create_effect(self, scope: Scope, fn: Callable[[], Any]) -> int:
        """Register a side-effect observer and run it once immediately.

        The run is tracked, so the effect re-runs during the effect phase of
        any stabilization in which a dependency changed. Writes performed
        inside the callback are queued and applied afterwards as a fresh
        batch, subject to the convergence limit.
        """
        self._check_scope(scope)
        node = self._new_node(NodeKind.EFFECT, scope)
        node.fn = fn
        self._effect_count += 1
        try:
            self._evaluate(node)
        except BaseException:
            self._discard_creation(node)
            raise
        node.run_count = 1
        self.counters.effect_runs += 1
        if self._queued_writes and not self._stabilizing and self._batch_depth == 0:
            self._flush_initial_effect_writes()
        return node.node_id

    def _discard_creation(self, node: _Node) -> None:
        self._remove_node(node)
        if node.node_id in node.scope._node_ids:
            node.scope._node_ids.remove(node.node_id)

    def _flush_initial_effect_writes(self) -> None:
        writes, self._queued_writes = self._queued_writes, []
        for nid, value in writes:
            node = self._nodes.get(nid)
            if node is not None and not node.disposed:
                self._apply_write(node, value)
        self.stabilize()

    # -- reads and writes -------------------------------------------------

    def _node(self, node_id: int) -> _Node:
        node = self._nodes.get(node_id)
        if node is None or node.disposed:
            raise DanglingNodeError(f"node {node_id} does not exist or was disposed")
        return node

    def read(self, node_id: int) -> Any:
        """Return a node's current value, recording a dependency edge when
        invoked inside a tracked evaluation."""
        node = self._nodes.get(node_id)
        if node is None or node.disposed:
            raise DanglingNodeError(f"node {node_id} does not exist or was disposed")
        if node.kind is NodeKind.EFFECT:
            raise ReactiveError("effects have no readable value")
        stack = self._eval_stack
        if stack:
            for i, frame in enumerate(stack):
                if frame.node is node:
                    path = [f.node.node_id for f in stack[i:]] + [node.node_id]
                    raise CycleError(path)
            stack[-1].reads.add(node_id)
        # Mid-stabilization, a dynamically discovered dependency may still be
        # pending; refresh it first so every observed value is final.
        if node.dirty and self._stabilizing and node.kind is NodeKind.COMPUTED:
            self._refresh(node, self._active_stats)
        return node.value

    def write(self, node_id: int, value: Any) -> None:
        """Write a source signal.

        A write judged unchanged by the signal's equality policy is a no-op.
        Otherwise subscribers are marked dirty and a stabilization runs
        immediately unless a batch is open. Writes from inside an effect
        callback are queued and applied after the current effect phase.
        """
        node = self._node(node_id)
        if node.kind is not NodeKind.SOURCE:
            raise WriteToComputedError(
                f"write target must be a source signal, got {node.kind.value} {node_id}"
            )
        for frame in self._eval_stack:
            if frame.node.kind is NodeKind.COMPUTED:
                raise WriteDuringComputeError(
                    f"computed {frame.node.node_id} attempted to write signal {node_id}"
                )
        if self._stabilizing or any(
            f.node.kind is NodeKind.EFFECT for f in self._eval_stack
        ):
            self._queued_writes.append((node_id, value))
            return
        self._apply_write(node, value)
        if self._batch_depth == 0:
            self.stabilize()

    def _apply_write(self, node: _Node, value: Any) -> None:
        if node.equals(node.value, value):
            return
        node.value = value
        node.version += 1
        self._mark_subscribers(node)

    def batch(self, body: Callable[[], Any]) -> Any:
        """Run ``body`` with propagation deferred; stabilize once at the end.

        Nested batches flatten into the outermost one. Errors from ``body``
        propagate after the depth is restored (and after the deferred
        stabilization, so the graph is left consistent either way).
        """
        self._batch_depth += 1
        try:
            return body()
        finally:
            self._batch_depth -= 1
            if self._batch_depth == 0:
                self.stabilize()

    # -- propagation ----------------------------------------------------

    def _mark_subscribers(self, node: _Node) -> None:
        for sub_id in node.subs:
            sub = self._nodes.get(sub_id)
            if sub is None or sub.disposed:
                continue
            if sub.kind is NodeKind.COMPUTED:
                if not sub.dirty:
                    sub.dirty = True
                    heapq.heappush(self._dirty_heap, (sub.rank, sub.node_id))
            else:
                self._pending_effects.add(sub_id)

    def stabilize(self) -> StabilizationStats:
        """Propagate pending changes until the graph is clean.

        Dirty computeds are refreshed in ascending rank order; affected
        effects then run in creation order; writes queued by effects are
        applied and the cycle repeats, up to ``max_write_cascades`` rounds.
        Idempotent (and free) when nothing is pending.
        """
        if self._stabilizing:
            return StabilizationStats()
        if not (self._dirty_heap or self._pending_effects or self._queued_writes):
            return StabilizationStats()
        stats = StabilizationStats()
        self._stabilizing = True
        self._active_stats = stats
        self.counters.stabilizations += 1
        self.last_recompute_sequence = []
        cascades = 0
        try:
            while True:
                while self._dirty_heap:
                    rank, nid = heapq.heappop(self._dirty_heap)
                    node = self._nodes.get(nid)
                    if node is None or node.disposed or not node.dirty:
                        continue
                    if rank != node.rank:
                        continue  # superseded by a rank repair; a fresh entry exists
                    self._refresh(node, stats)
                self._run_effect_phase(stats)
                self._apply_deferred_disposals()
                if self._queued_writes:
                    cascades += 1
                    if cascades >= self.max_write_cascades:
                        raise NonConvergenceError(
                            f"effect write cascade did not settle within "
                            f"{self.max_write_cascades} rounds"
                        )
                    writes, self._queued_writes = self._queued_writes, []
                    for nid, value in writes:
                        node = self._nodes.get(nid)
                        if node is not None and not node.disposed:
                            self._apply_write(node, value)
                if not (self._dirty_heap or self._pending_effects or self._queued_writes):
                    break
        finally:
            self._stabilizing = False
            self._active_stats = None
            self._apply_deferred_disposals()
        return stats

    def _run_effect_phase(self, stats: StabilizationStats) -> None:
        if not self._pending_effects:
            return
        effect_ids = sorted(self._pending_effects, key=lambda nid: self._nodes[nid].order)
        self._pending_effects.clear()
        for nid in effect_ids:
            node = self._nodes.get(nid)
            if node is None or node.disposed:
                continue
            self._evaluate(node)
            node.run_count += 1
            self.counters.effect_runs += 1
            stats.effects_run += 1

    def _apply_deferred_disposals(self) -> None:
        while self._deferred_disposals:
            scope = self._deferred_disposals.pop()
            self._teardown_scope(scope)

    def _refresh(self, node: _Node, stats: StabilizationStats | None) -> None:
        node.dirty = False
        nodes = self._nodes
        for dep_id, seen in node.dep_versions.items():
            if nodes[dep_id].version != seen:
                break
        else:
            return
        old = node.value
        new = self._evaluate(node)
        self.counters.recomputations += 1
        node.recompute_count += 1
        self.last_recompute_sequence.append(node.node_id)
        if stats is not None:
            stats.recomputations += 1
        if node.equals(old, new):
            self.counters.equality_cuts += 1
            if stats is not None:
                stats.equality_cuts += 1
            return
        node.value = new
        node.version += 1
        self._mark_subscribers(node)

    # -- evaluation and dependency upkeep --------------------------------

    def _evaluate(self, node: _Node) -> Any:
        frame = _Frame(node)
        stack = self._eval_stack
        stack.append(frame)
        try:
            result = node.fn()  # type: ignore[misc]
        finally:
            stack.pop()
        reads = frame.reads
        nodes = self._nodes
        if reads == node.deps:
            # common case: same dependency set, just refresh the versions seen
            node.dep_versions = {d: nodes[d].version for d in reads}
        else:
            self._rewire(node, reads)
        return result

    def _rewire(self, node: _Node, reads: set[int]) -> None:
        # A node read earlier in this evaluation may have been disposed by the
        # evaluation itself; drop such ids.
        reads = {r for r in reads if r in self._nodes}
        old = node.deps
        for dep_id in old - reads:
            dep = self._nodes.get(dep_id)
            if dep is not None:
                dep.subs.discard(node.node_id)
            self._edge_count -= 1
        for dep_id in reads - old:
            self._nodes[dep_id].subs.add(node.node_id)
            self._edge_count += 1
        node.deps = reads
        node.dep_versions = {d: self._nodes[d].version for d in reads}
        required = 0
        for dep_id in reads:
            rank = self._nodes[dep_id].rank
            if rank + 1 > required:
                required = rank + 1
        if required > node.rank:
            self._raise_rank(node, required, [])

    def _raise_rank(self, node: _Node, new_rank: int, path: list[int]) -> None:
        if node.node_id in path:
            raise CycleError(path[path.index(node.node_id) :] + [node.node_id])
        if new_rank <= node.rank:
            return
        node.rank = new_rank
        if node.dirty:
            heapq.heappush(self._dirty_heap, (node.rank, node.node_id))
        path.append(node.node_id)
        for sub_id in list(node.subs):
            sub = self._nodes.get(sub_id)
            if sub is not None:
                self._raise_rank(sub, node.rank + 1, path)
        path.pop()

    # -- introspection ----------------------------------------------------

    def live_counts(self) -> LiveCounts:
        return LiveCounts(
            nodes=len(self._nodes),
            edges=self._edge_count,
            effects=self._effect_count,
            subscriptions=0,
        )

    def kind(self, node_id: int) -> NodeKind:
        return self._node(node_id).kind

    def rank(self, node_id: int) -> int:
        return self._node(node_id).rank

    def version(self, node_id: int) -> int:
        return self._node(node_id).version

    def dependencies(self, node_id: int) -> frozenset[int]:
        return frozenset(self._node(node_id).deps)

    def subscribers(self, node_id: int) -> frozenset[int]:
        return frozenset(self._node(node_id).subs)

    def dependency_versions(self, node_id: int) -> dict[int, int]:
        return dict(self._node(node_id).dep_versions)

    def recompute_count(self, node_id: int) -> int:
        return self._node(node_id).recompute_count

    def run_count(self, node_id: int) -> int:
        return self._node(node_id).run_count

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation.

        Intended for tests: edge mirrors, rank ordering over every edge, and
        an empty dirty set whenever no batch or stabilization is active.
        """
        edge_total = 0
        for node in self._nodes.values():
            edge_total += len(node.deps)
            for dep_id in node.deps:
                dep = self._nodes[dep_id]
                assert node.node_id in dep.subs, "edge mirror broken"
                assert dep.rank < node.rank, (
                    f"rank order violated: {dep_id}(r{dep.rank}) -> "
                    f"{node.node_id}(r{node.rank})"
                )
            for sub_id in node.subs:
                assert node.node_id in self._nodes[sub_id].deps, "edge mirror broken"
        assert edge_total == self._edge_count, "edge counter drifted"
        if self._batch_depth == 0 and not self._stabilizing:
            assert not any(n.dirty for n in self._nodes.values()), "dirty outside batch"
            assert not self._pending_effects and not self._queued_writes
